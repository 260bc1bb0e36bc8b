// Apache License, Version 2.0, refer to LICENSE.txt
//
// Exact ground truth for small discrete problems: Bayesian networks over
// finite domains with CMI computed by exhaustive summation, a GPM wrapper
// over the implied joint, and the two canonical synthetic generators
// (noisy-XOR v-structure and noisy common cause).

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "crossmi/data.hh"
#include "crossmi/gpm.hh"
#include "crossmi/rng.hh"

namespace crossmi {

struct BayesNetVariable {
  std::string name;
  int domain = 2;
  std::vector<int> parents;
  // Conditional probability table: one row per parent configuration
  // (row-major in parent order), each row summing to 1.
  std::vector<std::vector<double>> cpt;
};

class DiscreteBayesNet {
 public:
  explicit DiscreteBayesNet(std::vector<BayesNetVariable> variables);

  size_t size() const { return variables_.size(); }
  const std::vector<BayesNetVariable>& variables() const { return variables_; }
  const std::vector<int>& topological_order() const { return topo_order_; }

  double joint_prob(const std::vector<int>& config) const;
  std::vector<int> sample(RandomStream& rng) const;

  // Total joint configurations; exact queries refuse above 10^6.
  double outcome_space_size() const;

  static DiscreteBayesNet from_json(const std::string& text);
  std::string to_json() const;

 private:
  std::vector<BayesNetVariable> variables_;
  std::vector<int> topo_order_;
};

// I(x_a : x_b | x_c = fixed) in nats by exhaustive summation over the joint
// outcome space; 0 log 0 terms are 0. Exact up to floating-point roundoff.
double exact_cmi(const DiscreteBayesNet& net, const VarSet& a, const VarSet& b,
                 const std::map<int, int>& condition_fixed);

// The net's joint distribution behind the GPM interface: conditional
// simulation and log mass by enumeration.
class BayesNetGpm : public Gpm {
 public:
  explicit BayesNetGpm(DiscreteBayesNet net);

  const Schema& schema() const override { return schema_; }
  Values simulate(const VarSet& query, const Values& condition,
                  RandomStream& rng) const override;
  double logpdf(const Values& target, const Values& condition) const override;

 private:
  double restricted_mass(const Values& fixed) const;

  DiscreteBayesNet net_;
  Schema schema_;
  std::vector<int> domains_;
};

// x1, x2 fair bits; x3 = (x1 xor x2) flipped with probability `noise`.
// Emitted as three Nominal(2) columns.
std::shared_ptr<const Dataset> gen_vstruct(long n, double noise,
                                           RandomStream& rng);
DiscreteBayesNet vstruct_net(double noise);

// x1 a fair bit; x2 and x3 independent noisy copies of x1.
std::shared_ptr<const Dataset> gen_common_cause(long n, double noise,
                                                RandomStream& rng);
DiscreteBayesNet common_cause_net(double noise);

}  // namespace crossmi

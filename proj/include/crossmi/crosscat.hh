// Apache License, Version 2.0, refer to LICENSE.txt
//
// CrossCat layer: an outer CRP partitions the variables into blocks, each
// block carrying an independent DPMM over its columns. Queries route to
// blocks; conditional mutual information decomposes over blocks, so blocks
// that do not contain variables from both query sets are skipped without
// touching the model.

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "crossmi/dpmm.hh"
#include "crossmi/gpm.hh"

namespace crossmi {

struct QueryCounts {
  long simulate_calls = 0;
  long logpdf_calls = 0;
};

struct BlockCmi {
  int64_t block_id = 0;
  McEstimate estimate;
  QueryCounts counts;
};

struct CrosscatCmi {
  double value = 0.0;
  double std_error = 0.0;
  std::vector<BlockCmi> blocks;  // active blocks only, by min involved variable
  QueryCounts counts;
};

class CrossCatState : public Gpm {
 public:
  CrossCatState(std::shared_ptr<const Dataset> data, double outer_alpha,
                std::vector<int64_t> var_assignment,
                std::map<int64_t, DpmmState> blocks,
                std::shared_ptr<const HyperGridSet> grids);

  // Draws alpha' ~ Gamma(1,1), a variable partition from CRP(alpha'), and
  // each block's DPMM from its prior.
  static CrossCatState from_prior(std::shared_ptr<const Dataset> data,
                                  std::shared_ptr<const HyperGridSet> grids,
                                  RandomStream& rng);

  // Copies and moves reset the query counters (atomics are not copyable).
  CrossCatState(const CrossCatState& o);
  CrossCatState& operator=(const CrossCatState& o);
  CrossCatState(CrossCatState&& o) noexcept;
  CrossCatState& operator=(CrossCatState&& o) noexcept;

  // Gpm interface. Per-block child streams are keyed by the smallest
  // involved variable index, so results do not depend on block labels.
  const Schema& schema() const override { return data_->schema(); }
  Values simulate(const VarSet& query, const Values& condition,
                  RandomStream& rng) const override;
  double logpdf(const Values& target, const Values& condition) const override;

  // Block-decomposed Monte Carlo CMI. Blocks intersecting both a and b each
  // contribute a gpm_cmi estimate on their slice of the query; all other
  // blocks contribute exactly 0 with no simulate/logpdf calls.
  CrosscatCmi cmi(const VarSet& a, const VarSet& b, const Values& condition,
                  long t, RandomStream& rng) const;

  // One Gibbs scan over variables. A variable's reassignment weight is the
  // outer CRP weight times the marginal likelihood of its column under the
  // candidate block's current row partition; the auxiliary empty block draws
  // a fresh partition from the prior, except that a variable currently alone
  // in its block keeps that block's partition as the auxiliary (Neal's
  // algorithm 8 with m = 1).
  void gibbs_sweep_variables(RandomStream& rng);

  // Outer concentration by griddy Gibbs, then per-block hyperinference.
  void infer_hypers(RandomStream& rng);

  // Variables, then rows per block, then hyperparameters.
  void full_sweep(RandomStream& rng);

  double outer_alpha() const { return outer_alpha_; }
  const std::vector<int64_t>& variable_assignment() const {
    return var_assignment_;
  }
  int64_t block_of(int variable) const;
  size_t block_count() const { return blocks_.size(); }
  const std::map<int64_t, DpmmState>& blocks() const { return blocks_; }
  const std::shared_ptr<const Dataset>& data() const { return data_; }
  const std::shared_ptr<const HyperGridSet>& grids() const { return grids_; }
  int64_t next_block_id() const { return next_block_id_; }

  QueryCounts counters() const;
  void reset_counters() const;

 private:
  friend CrossCatState crosscat_from_json(
      const std::string& text, std::shared_ptr<const Dataset> data,
      std::shared_ptr<const HyperGridSet> grids);

  std::shared_ptr<const Dataset> data_;
  double outer_alpha_;
  std::vector<int64_t> var_assignment_;
  std::map<int64_t, DpmmState> blocks_;
  std::shared_ptr<const HyperGridSet> grids_;
  int64_t next_block_id_ = 0;

  mutable std::atomic<long> simulate_calls_{0};
  mutable std::atomic<long> logpdf_calls_{0};
};

struct EnsembleProvenance {
  uint64_t seed = 0;
  long sweeps = 0;
  uint64_t dataset_fingerprint = 0;
};

// H independent posterior samples sharing one dataset and schema.
class Ensemble {
 public:
  Ensemble(std::shared_ptr<const Dataset> data,
           std::vector<CrossCatState> members, EnsembleProvenance provenance);

  size_t size() const { return members_.size(); }
  const CrossCatState& member(size_t i) const { return members_.at(i); }
  const std::vector<CrossCatState>& members() const { return members_; }
  const std::shared_ptr<const Dataset>& data() const { return data_; }
  const Schema& schema() const { return data_->schema(); }
  const EnsembleProvenance& provenance() const { return provenance_; }

 private:
  std::shared_ptr<const Dataset> data_;
  std::vector<CrossCatState> members_;
  EnsembleProvenance provenance_;
};

// h independent chains from seed-derived child streams, each initialized
// from the prior and advanced `sweeps` full sweeps. Chains run on up to
// `jobs` threads; the result is identical for any job count.
Ensemble fit_ensemble(std::shared_ptr<const Dataset> data, int h, long sweeps,
                      uint64_t seed, int jobs = 1);

// Fraction of members assigning variables i and j to the same block. Upper
// bounds the posterior probability that their mutual information exceeds
// zero; O(1) per member.
double dependence_probability_bound(const Ensemble& ensemble, int i, int j);

struct DependenceMatrix {
  std::vector<std::vector<double>> values;  // symmetric, diagonal 1.0
  long comparisons = 0;                     // H * D * (D - 1) / 2
};

DependenceMatrix pairwise_dependence_matrix(const Ensemble& ensemble);

void write_dependence_matrix_csv(std::ostream& out, const Schema& schema,
                                 const DependenceMatrix& matrix);

// JSON persistence. Members serialize with cluster statistics included;
// the loader cross-checks them against a replay of the assignments.
std::string crosscat_to_json(const CrossCatState& state);
CrossCatState crosscat_from_json(const std::string& text,
                                 std::shared_ptr<const Dataset> data,
                                 std::shared_ptr<const HyperGridSet> grids);

void save_ensemble(const Ensemble& ensemble, const std::string& directory);
Ensemble load_ensemble(const std::string& directory,
                       std::shared_ptr<const Dataset> data);

// Simple bounded worker pool; f(i) for i in [0, n), deterministic in the
// sense that f writes only to index i of shared output.
void parallel_for(long n, int jobs, const std::function<void(long)>& f);

}  // namespace crossmi

// Apache License, Version 2.0, refer to LICENSE.txt
//
// Generative population model interface: exact conditional simulation and
// log density over sub-vectors of one random vector, plus the generic
// Monte Carlo estimator of conditional mutual information built from the
// two primitives.

#pragma once

#include <memory>

#include "crossmi/data.hh"
#include "crossmi/rng.hh"

namespace crossmi {

class Gpm {
 public:
  virtual ~Gpm() = default;

  virtual const Schema& schema() const = 0;

  // Exact joint sample of `query` from the conditional predictive given the
  // fixed `condition` values. Query and condition must be disjoint.
  virtual Values simulate(const VarSet& query, const Values& condition,
                          RandomStream& rng) const = 0;

  // Joint log density (log mass for nominal variables) of `target` given
  // `condition`. Mixed targets return the log of a product of densities
  // and masses; no unit conversion is attempted.
  virtual double logpdf(const Values& target,
                        const Values& condition) const = 0;
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long sample_count = 0;
};

// Monte Carlo estimate of I(x_a : x_b | x_c = condition) in nats, averaging
//   logpdf(ab | c) - (logpdf(a | c) + logpdf(b | c))
// over t joint draws of (a, b). Sample index t uses child stream rng.child(t).
// The raw average can be negative by Monte Carlo noise and is not clipped.
McEstimate gpm_cmi_estimate(const Gpm& gpm, const VarSet& a, const VarSet& b,
                            const Values& condition, long t,
                            RandomStream& rng);

double gpm_cmi(const Gpm& gpm, const VarSet& a, const VarSet& b,
               const Values& condition, long t, RandomStream& rng);

// Validates the shared preconditions of CMI queries: a, b non-empty,
// pairwise disjoint from each other and the condition, t >= 1, and all
// variables in range.
void check_cmi_query(const Schema& schema, const VarSet& a, const VarSet& b,
                     const Values& condition, long t);

}  // namespace crossmi

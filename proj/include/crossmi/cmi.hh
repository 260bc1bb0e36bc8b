// Apache License, Version 2.0, refer to LICENSE.txt
//
// Posterior layer over conditional mutual information: one CMI estimate per
// ensemble member, thresholded into probabilities and three-way
// independence verdicts. Conditions may fix values, marginalize variables
// (condition on them but average over their predictive), or both.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "crossmi/crosscat.hh"

namespace crossmi {

struct Condition {
  Values fixed;        // the event {x_C = c}
  VarSet marginalized; // conditioned on but averaged over

  void validate(const Schema& schema) const;
};

struct CmiQuery {
  VarSet a;
  VarSet b;
  Condition condition;
  long t = 1000;        // inner Monte Carlo samples per CMI estimate
  long t_outer = 100;   // draws of the marginalized variables

  void validate(const Schema& schema) const;
};

struct CmiSample {
  size_t member = 0;
  double estimate = 0.0;  // nats, unclipped
  double std_error = 0.0;
};

struct CmiPosterior {
  std::vector<CmiSample> estimates;  // one per member, in member order
};

// Per member: a single block-decomposed CMI estimate when nothing is
// marginalized; otherwise the average over t_outer draws of the
// marginalized variables simulated given the fixed values. Members whose
// variable partition separates a from b contribute exactly 0.0 before any
// sampling happens. Member h consumes child stream rng.child(h), so the
// fan-out order does not matter.
CmiPosterior cmi_posterior(const Ensemble& ensemble, const CmiQuery& query,
                           const RandomStream& rng, int jobs = 1);

struct Threshold {
  enum class Op { kLess, kGreater };
  Op op = Op::kLess;
  double value = 0.0;

  bool test(double x) const {
    return op == Op::kLess ? x < value : x > value;
  }
  std::string to_string() const;
};

// Fraction of members whose estimate satisfies the threshold predicate.
double prob_cmi_in(const CmiPosterior& posterior, const Threshold& threshold);

enum class IndependenceKind { kMarginal, kContextSpecific, kConditional };

enum class Verdict { kProbablyIndependent, kProbablyDependent, kUndecided };

struct VerdictReport {
  Verdict verdict = Verdict::kUndecided;
  double prob_below_eps = 0.0;
  double eps = 0.0;
  double confidence = 0.0;
  CmiPosterior posterior;
};

// Reports P[CMI < eps] over the posterior and a three-way verdict:
// probably-independent when that probability reaches `confidence`,
// probably-dependent when it falls below confidence - 0.2, undecided in the
// band between. The condition shape must match the kind: marginal queries
// take an empty condition, context-specific ones fixed values only,
// conditional ones marginalized variables only.
VerdictReport independence_verdict(const Ensemble& ensemble, CmiQuery query,
                                   IndependenceKind kind, double eps,
                                   double confidence, const RandomStream& rng,
                                   int jobs = 1);

void write_posterior_csv(std::ostream& out, const CmiPosterior& posterior);

std::string posterior_summary_json(const CmiPosterior& posterior,
                                   const std::vector<Threshold>& thresholds);

}  // namespace crossmi

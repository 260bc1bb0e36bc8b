// Apache License, Version 2.0, refer to LICENSE.txt
//
// Frequentist baselines for pairwise dependence: pairwise-complete R^2 and
// partial correlation from the inverse correlation matrix, with Bonferroni
// correction across all variable pairs, plus the synthetic hub-structure
// generator used to contrast them with model-based context-specific CMI.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "crossmi/cmi.hh"
#include "crossmi/data.hh"
#include "crossmi/mathutil.hh"
#include "crossmi/rng.hh"

namespace crossmi {

struct PairStat {
  int i = 0;
  int j = 0;
  double statistic = 0.0;  // r^2 or partial correlation
  double p_value = 1.0;
  long complete_rows = 0;
  bool degenerate = false;  // fewer than 3 pairwise-complete rows
  bool significant = false; // p < alpha / test_count, never for degenerate
};

struct BaselineReport {
  std::vector<PairStat> pairs;
  long test_count = 0;  // C(D, 2) over all variables
  double alpha = 0.05;
  double corrected_alpha = 0.0;
};

// R^2 with p-value for one numerical pair over pairwise-complete rows.
// `test_count` feeds the Bonferroni threshold.
PairStat pearson_r2(const Dataset& dataset, int i, int j, long test_count,
                    double alpha = 0.05);

// All numerical pairs; the correction always counts C(D, 2) tests.
BaselineReport r2_report(const Dataset& dataset, double alpha = 0.05);

struct PartialCorrelationResult {
  std::vector<std::vector<double>> matrix;  // D x D, diagonal 1
  BaselineReport report;
  long complete_rows = 0;
  bool degenerate = false;  // too few complete rows to invert
};

// Partial correlations from the inverse of the complete-rows correlation
// matrix; p-values by Fisher's z with the degrees of freedom reduced by the
// number of controlled variables. All variables must be numerical.
PartialCorrelationResult partial_correlation(const Dataset& dataset,
                                             double alpha = 0.05);

void write_baseline_csv(std::ostream& out, const Schema& schema,
                        const BaselineReport& report);

// Five numerical exam-style variables (mech, vectors, algebra, analysis,
// stats) with a hub: a latent regime moves the hub score and flips the
// cross-hub coupling between the left pair's factor and the right pair's
// factor. Linear partial correlation of (vectors, analysis) washes out
// across regimes while the dependence given a hub value is strong and
// regime-specific.
std::shared_ptr<const Dataset> gen_hub_dataset(long n, RandomStream& rng);

// Same five columns with every variable independent.
std::shared_ptr<const Dataset> gen_hub_free_dataset(long n, RandomStream& rng);

struct ContextSpecificReport {
  double hub_low = 0.0;
  double hub_high = 0.0;
  CmiPosterior posterior_low;    // CMI(pair | hub = hub_low)
  CmiPosterior posterior_high;   // CMI(pair | hub = hub_high)
  CmiPosterior posterior_marginalized;
  KsResult low_vs_high;          // two-sample KS between the fixed contexts
  double median_low = 0.0;
  double median_high = 0.0;
  double median_marginalized = 0.0;
};

// Three CMI posteriors for pair (i, j): hub fixed at two values and hub
// marginalized. Qualitative probe of context-specific dependence.
ContextSpecificReport context_specific_demo(const Ensemble& ensemble, int i,
                                            int j, int hub, double hub_low,
                                            double hub_high, long t,
                                            long t_outer,
                                            const RandomStream& rng,
                                            int jobs = 1);

}  // namespace crossmi

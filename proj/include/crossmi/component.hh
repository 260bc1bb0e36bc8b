// Apache License, Version 2.0, refer to LICENSE.txt
//
// Conjugate per-variable component models, collapsed over their parameters:
// Normal likelihood with a Normal-Inverse-Gamma prior for numerical
// variables, Categorical likelihood with a symmetric Dirichlet prior for
// nominal ones. Everything a cluster needs is a sufficient-statistic record;
// predictive densities and marginal likelihoods come out in closed form.

#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "crossmi/data.hh"
#include "crossmi/rng.hh"

namespace crossmi {

// Hyperparameters (m, r, s, nu) of the Normal-Inverse-Gamma prior:
//   sigma^2 ~ InverseGamma(nu/2, s/2)
//   mu | sigma^2 ~ Normal(m, sigma^2 / r)
struct NumericalHypers {
  double m = 0.0;
  double r = 1.0;
  double s = 1.0;
  double nu = 1.0;
};

struct NominalHypers {
  double beta = 1.0;
};

using Hypers = std::variant<NumericalHypers, NominalHypers>;

struct NumericalStats {
  int64_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x);
  void remove(double x);
};

struct NominalStats {
  explicit NominalStats(int categories) : counts(categories, 0) {}
  NominalStats() = default;
  std::vector<int64_t> counts;
  int64_t n = 0;

  void add(int category);
  void remove(int category);
};

using SuffStats = std::variant<NumericalStats, NominalStats>;

SuffStats empty_stats(const Variable& variable);
void stats_add(SuffStats& stats, const Cell& cell);
void stats_remove(SuffStats& stats, const Cell& cell);
int64_t stats_count(const SuffStats& stats);

// Posterior Normal-Inverse-Gamma parameters given sufficient statistics.
NumericalHypers nig_posterior(const NumericalHypers& prior,
                              const NumericalStats& stats);

// log p(x | stats, hypers), the collapsed (Student-t) predictive.
double nig_predictive_logp(const NumericalHypers& hypers,
                           const NumericalStats& stats, double x);

double nig_predictive_sample(const NumericalHypers& hypers,
                             const NumericalStats& stats, RandomStream& rng);

// log marginal likelihood of all points summarized by `stats`.
double nig_marginal_logp(const NumericalHypers& hypers,
                         const NumericalStats& stats);

double dirichlet_predictive_logp(const NominalHypers& hypers,
                                 const NominalStats& stats, int category);

int dirichlet_predictive_sample(const NominalHypers& hypers,
                                const NominalStats& stats, RandomStream& rng);

double dirichlet_marginal_logp(const NominalHypers& hypers,
                               const NominalStats& stats);

// Dispatch over the variant pairs. `cell` must be observed and type-matched.
double predictive_logp(const Hypers& hypers, const SuffStats& stats,
                       const Cell& cell);
Cell predictive_sample(const Hypers& hypers, const SuffStats& stats,
                       RandomStream& rng);
double marginal_logp(const Hypers& hypers, const SuffStats& stats);

// log CRP(z | alpha) for a partition with the given live-cluster sizes.
double crp_log_prob(const std::vector<int64_t>& cluster_sizes, double alpha,
                    int64_t n);

// Fixed 30-point hyperparameter grids, derived from the observed column.
struct HyperGrid {
  StatType type = StatType::kNumerical;
  std::vector<double> m;     // data-range quantiles
  std::vector<double> r;     // logspace(1e-2, 1e2)
  std::vector<double> s;     // logspace(1e-2, 1e2) * observed variance
  std::vector<double> nu;    // logspace(1e-1, 1e2)
  std::vector<double> beta;  // logspace(1e-2, 1e2)
};

struct HyperGridSet {
  std::vector<HyperGrid> per_variable;
  std::vector<double> alpha;  // CRP concentration grid, logspace(1e-2, 1e2)
};

HyperGridSet compute_hyper_grids(const Dataset& dataset);

// Grid midpoint, a reasonable deterministic starting value.
Hypers default_hypers(const HyperGrid& grid);

// Draw from the (uniform) prior weights over the grid.
Hypers sample_grid_hypers(const HyperGrid& grid, RandomStream& rng);

}  // namespace crossmi

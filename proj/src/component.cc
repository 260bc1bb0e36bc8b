// Apache License, Version 2.0, refer to LICENSE.txt

#include "crossmi/component.hh"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "crossmi/mathutil.hh"

namespace crossmi {

void NumericalStats::add(double x) {
  ++n;
  sum += x;
  sum_sq += x * x;
}

void NumericalStats::remove(double x) {
  assert(n > 0);
  --n;
  sum -= x;
  sum_sq -= x * x;
  if (n == 0) {
    sum = 0.0;
    sum_sq = 0.0;
  }
}

void NominalStats::add(int category) {
  assert(category >= 0 && static_cast<size_t>(category) < counts.size());
  ++counts[static_cast<size_t>(category)];
  ++n;
}

void NominalStats::remove(int category) {
  assert(category >= 0 && static_cast<size_t>(category) < counts.size());
  assert(counts[static_cast<size_t>(category)] > 0);
  --counts[static_cast<size_t>(category)];
  --n;
}

SuffStats empty_stats(const Variable& variable) {
  if (variable.is_nominal()) return NominalStats(variable.category_count);
  return NumericalStats{};
}

void stats_add(SuffStats& stats, const Cell& cell) {
  if (auto* num = std::get_if<NumericalStats>(&stats)) {
    num->add(cell.real_value());
  } else {
    std::get<NominalStats>(stats).add(cell.category_value());
  }
}

void stats_remove(SuffStats& stats, const Cell& cell) {
  if (auto* num = std::get_if<NumericalStats>(&stats)) {
    num->remove(cell.real_value());
  } else {
    std::get<NominalStats>(stats).remove(cell.category_value());
  }
}

int64_t stats_count(const SuffStats& stats) {
  if (const auto* num = std::get_if<NumericalStats>(&stats)) return num->n;
  return std::get<NominalStats>(stats).n;
}

NumericalHypers nig_posterior(const NumericalHypers& prior,
                              const NumericalStats& stats) {
  const double n = static_cast<double>(stats.n);
  NumericalHypers post;
  post.r = prior.r + n;
  post.nu = prior.nu + n;
  post.m = (prior.r * prior.m + stats.sum) / post.r;
  post.s = prior.s + stats.sum_sq + prior.r * prior.m * prior.m -
           post.r * post.m * post.m;
  // Cancellation guard; s must stay positive.
  if (post.s <= 0.0) post.s = 1e-12;
  return post;
}

namespace {

// log normalizer of the NIG prior up to terms that cancel in ratios:
//   Z(r, s, nu) = Gamma(nu/2) (s/2)^(-nu/2) r^(-1/2)
double nig_log_z(const NumericalHypers& h) {
  return std::lgamma(0.5 * h.nu) - 0.5 * h.nu * std::log(0.5 * h.s) -
         0.5 * std::log(h.r);
}

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)

}  // namespace

double nig_marginal_logp(const NumericalHypers& hypers,
                         const NumericalStats& stats) {
  if (stats.n == 0) return 0.0;
  const NumericalHypers post = nig_posterior(hypers, stats);
  return -static_cast<double>(stats.n) * kHalfLog2Pi + nig_log_z(post) -
         nig_log_z(hypers);
}

double nig_predictive_logp(const NumericalHypers& hypers,
                           const NumericalStats& stats, double x) {
  const NumericalHypers post = nig_posterior(hypers, stats);
  NumericalStats one;
  one.add(x);
  const NumericalHypers post1 = nig_posterior(post, one);
  return -kHalfLog2Pi + nig_log_z(post1) - nig_log_z(post);
}

double nig_predictive_sample(const NumericalHypers& hypers,
                             const NumericalStats& stats, RandomStream& rng) {
  const NumericalHypers post = nig_posterior(hypers, stats);
  const double scale =
      std::sqrt(post.s * (post.r + 1.0) / (post.nu * post.r));
  return post.m + scale * rng.student_t(post.nu);
}

double dirichlet_predictive_logp(const NominalHypers& hypers,
                                 const NominalStats& stats, int category) {
  assert(category >= 0 && static_cast<size_t>(category) < stats.counts.size());
  const double k = static_cast<double>(stats.counts.size());
  const double c = static_cast<double>(stats.counts[static_cast<size_t>(category)]);
  return std::log(c + hypers.beta) -
         std::log(static_cast<double>(stats.n) + k * hypers.beta);
}

int dirichlet_predictive_sample(const NominalHypers& hypers,
                                const NominalStats& stats, RandomStream& rng) {
  std::vector<double> weights(stats.counts.size());
  for (size_t j = 0; j < weights.size(); ++j) {
    weights[j] = static_cast<double>(stats.counts[j]) + hypers.beta;
  }
  return static_cast<int>(rng.categorical(weights));
}

double dirichlet_marginal_logp(const NominalHypers& hypers,
                               const NominalStats& stats) {
  if (stats.n == 0) return 0.0;
  const double k = static_cast<double>(stats.counts.size());
  double logp = std::lgamma(k * hypers.beta) -
                std::lgamma(k * hypers.beta + static_cast<double>(stats.n));
  for (int64_t c : stats.counts) {
    logp += std::lgamma(hypers.beta + static_cast<double>(c)) -
            std::lgamma(hypers.beta);
  }
  return logp;
}

double predictive_logp(const Hypers& hypers, const SuffStats& stats,
                       const Cell& cell) {
  if (const auto* num = std::get_if<NumericalStats>(&stats)) {
    return nig_predictive_logp(std::get<NumericalHypers>(hypers), *num,
                               cell.real_value());
  }
  return dirichlet_predictive_logp(std::get<NominalHypers>(hypers),
                                   std::get<NominalStats>(stats),
                                   cell.category_value());
}

Cell predictive_sample(const Hypers& hypers, const SuffStats& stats,
                       RandomStream& rng) {
  if (const auto* num = std::get_if<NumericalStats>(&stats)) {
    return Cell::real(
        nig_predictive_sample(std::get<NumericalHypers>(hypers), *num, rng));
  }
  return Cell::category(dirichlet_predictive_sample(
      std::get<NominalHypers>(hypers), std::get<NominalStats>(stats), rng));
}

double marginal_logp(const Hypers& hypers, const SuffStats& stats) {
  if (const auto* num = std::get_if<NumericalStats>(&stats)) {
    return nig_marginal_logp(std::get<NumericalHypers>(hypers), *num);
  }
  return dirichlet_marginal_logp(std::get<NominalHypers>(hypers),
                                 std::get<NominalStats>(stats));
}

double crp_log_prob(const std::vector<int64_t>& cluster_sizes, double alpha,
                    int64_t n) {
  double logp = static_cast<double>(cluster_sizes.size()) * std::log(alpha) +
                std::lgamma(alpha) - std::lgamma(alpha + static_cast<double>(n));
  for (int64_t size : cluster_sizes) {
    logp += std::lgamma(static_cast<double>(size));
  }
  return logp;
}

namespace {

constexpr size_t kGridPoints = 30;

}  // namespace

HyperGridSet compute_hyper_grids(const Dataset& dataset) {
  HyperGridSet grids;
  grids.alpha = logspace(1e-2, 1e2, kGridPoints);
  grids.per_variable.resize(dataset.variable_count());
  for (size_t d = 0; d < dataset.variable_count(); ++d) {
    const Variable& var = dataset.schema().variable(static_cast<int>(d));
    HyperGrid& grid = grids.per_variable[d];
    grid.type = var.type;
    if (var.is_nominal()) {
      grid.beta = logspace(1e-2, 1e2, kGridPoints);
      continue;
    }
    std::vector<double> observed;
    for (size_t i = 0; i < dataset.row_count(); ++i) {
      const Cell& c = dataset.cell(i, static_cast<int>(d));
      if (!c.is_missing()) observed.push_back(c.real_value());
    }
    double mean = 0.0, variance = 0.0;
    if (!observed.empty()) {
      for (double x : observed) mean += x;
      mean /= static_cast<double>(observed.size());
      for (double x : observed) variance += (x - mean) * (x - mean);
      variance /= static_cast<double>(observed.size());
    }
    variance = std::max(variance, 1e-6);
    std::sort(observed.begin(), observed.end());
    grid.m.resize(kGridPoints);
    for (size_t i = 0; i < kGridPoints; ++i) {
      grid.m[i] = observed.empty()
                      ? 0.0
                      : quantile_sorted(observed, static_cast<double>(i) /
                                                      (kGridPoints - 1));
    }
    grid.r = logspace(1e-2, 1e2, kGridPoints);
    grid.s = logspace(1e-2, 1e2, kGridPoints);
    for (double& s : grid.s) s = std::max(s * variance, 1e-6);
    grid.nu = logspace(1e-1, 1e2, kGridPoints);
  }
  return grids;
}

Hypers default_hypers(const HyperGrid& grid) {
  if (grid.type == StatType::kNominal) {
    return NominalHypers{grid.beta[grid.beta.size() / 2]};
  }
  NumericalHypers h;
  h.m = grid.m[grid.m.size() / 2];
  h.r = grid.r[grid.r.size() / 2];
  h.s = grid.s[grid.s.size() / 2];
  h.nu = grid.nu[grid.nu.size() / 2];
  return h;
}

Hypers sample_grid_hypers(const HyperGrid& grid, RandomStream& rng) {
  if (grid.type == StatType::kNominal) {
    return NominalHypers{grid.beta[rng.uniform_index(grid.beta.size())]};
  }
  NumericalHypers h;
  h.m = grid.m[rng.uniform_index(grid.m.size())];
  h.r = grid.r[rng.uniform_index(grid.r.size())];
  h.s = grid.s[rng.uniform_index(grid.s.size())];
  h.nu = grid.nu[rng.uniform_index(grid.nu.size())];
  return h;
}

}  // namespace crossmi

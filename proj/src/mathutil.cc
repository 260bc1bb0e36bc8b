// Apache License, Version 2.0, refer to LICENSE.txt

#include "crossmi/mathutil.hh"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace crossmi {

double logsumexp(const std::vector<double>& log_values) {
  if (log_values.empty()) return -std::numeric_limits<double>::infinity();
  double max_lv = log_values[0];
  for (double lv : log_values) max_lv = std::max(max_lv, lv);
  if (std::isinf(max_lv)) return max_lv;
  double total = 0.0;
  for (double lv : log_values) total += std::exp(lv - max_lv);
  return max_lv + std::log(total);
}

std::vector<double> logspace(double lo, double hi, size_t n) {
  assert(lo > 0 && hi > lo && n >= 2);
  std::vector<double> out(n);
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  for (size_t i = 0; i < n; ++i) {
    out[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                                static_cast<double>(n - 1));
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, size_t n) {
  assert(n >= 2);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) /
                      static_cast<double>(n - 1);
  }
  return out;
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  assert(!sorted.empty());
  assert(p >= 0.0 && p <= 1.0);
  if (sorted.size() == 1) return sorted[0];
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Continued fraction for the incomplete beta function (Lentz's algorithm).
double incbeta_cf(double a, double b, double x) {
  const double tiny = 1e-30;
  const double eps = 1e-15;
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(ln_front) * incbeta_cf(a, b, x) / a;
  }
  return 1.0 - std::exp(ln_front) * incbeta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!std::isfinite(t)) return 0.0;
  const double x = dof / (dof + t * t);
  return incomplete_beta(0.5 * dof, 0.5, x);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("ks_two_sample: empty sample");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  size_t ia = 0, ib = 0;
  double d = 0.0;
  while (ia < a.size() && ib < b.size()) {
    const double x = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    d = std::max(d, std::fabs(static_cast<double>(ia) / na -
                              static_cast<double>(ib) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  // Kolmogorov survival series; falls back to 1 when it fails to converge
  // (tiny lambda).
  double p = 1.0;
  double sum = 0.0;
  double sign = 1.0;
  double previous = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = 2.0 * std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term <= 1e-3 * previous || term <= 1e-8 * sum) {
      p = sum;
      break;
    }
    sign = -sign;
    previous = term;
  }
  p = std::clamp(p, 0.0, 1.0);
  return {d, p};
}

double adjusted_rand_index(const std::vector<long>& a,
                           const std::vector<long>& b) {
  assert(a.size() == b.size());
  const auto choose2 = [](double n) { return n * (n - 1.0) / 2.0; };
  std::map<std::pair<long, long>, long> joint;
  std::map<long, long> ca, cb;
  for (size_t i = 0; i < a.size(); ++i) {
    ++joint[{a[i], b[i]}];
    ++ca[a[i]];
    ++cb[b[i]];
  }
  double sum_joint = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [k, n] : joint) sum_joint += choose2(static_cast<double>(n));
  for (const auto& [k, n] : ca) sum_a += choose2(static_cast<double>(n));
  for (const auto& [k, n] : cb) sum_b += choose2(static_cast<double>(n));
  const double total = choose2(static_cast<double>(a.size()));
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (sum_joint - expected) / (max_index - expected);
}

bool invert_matrix(std::vector<std::vector<double>>& m) {
  const size_t n = m.size();
  std::vector<std::vector<double>> aug(n, std::vector<double>(2 * n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    assert(m[i].size() == n);
    for (size_t j = 0; j < n; ++j) aug[i][j] = m[i][j];
    aug[i][n + i] = 1.0;
  }
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < n; ++r) {
      if (std::fabs(aug[r][col]) > std::fabs(aug[pivot][col])) pivot = r;
    }
    if (std::fabs(aug[pivot][col]) < 1e-12) return false;
    std::swap(aug[col], aug[pivot]);
    const double diag = aug[col][col];
    for (size_t j = 0; j < 2 * n; ++j) aug[col][j] /= diag;
    for (size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = aug[r][col];
      if (f == 0.0) continue;
      for (size_t j = 0; j < 2 * n; ++j) aug[r][j] -= f * aug[col][j];
    }
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) m[i][j] = aug[i][n + j];
  }
  return true;
}

std::vector<std::vector<double>> cholesky(
    const std::vector<std::vector<double>>& m) {
  const size_t n = m.size();
  std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j <= i; ++j) {
      double s = m[i][j];
      for (size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (i == j) {
        if (s <= 0.0) throw std::runtime_error("cholesky: not positive definite");
        l[i][j] = std::sqrt(s);
      } else {
        l[i][j] = s / l[j][j];
      }
    }
  }
  return l;
}

double median(std::vector<double> values) {
  assert(!values.empty());
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace crossmi

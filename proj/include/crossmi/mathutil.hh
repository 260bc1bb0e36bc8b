// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <vector>

namespace crossmi {

// Max-shifted log(sum(exp(x))).
double logsumexp(const std::vector<double>& log_values);

// n points, log-uniform between lo and hi inclusive.
std::vector<double> logspace(double lo, double hi, size_t n);

// n points, linear between lo and hi inclusive.
std::vector<double> linspace(double lo, double hi, size_t n);

// Empirical quantile of a sorted sample, linear interpolation.
double quantile_sorted(const std::vector<double>& sorted, double p);

double normal_cdf(double x);

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Two-sided p-value of Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Adjusted Rand index between two labelings of the same items.
double adjusted_rand_index(const std::vector<long>& a,
                           const std::vector<long>& b);

// In-place Gauss-Jordan inverse with partial pivoting; returns false if the
// matrix is numerically singular.
bool invert_matrix(std::vector<std::vector<double>>& m);

// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
std::vector<std::vector<double>> cholesky(
    const std::vector<std::vector<double>>& m);

double median(std::vector<double> values);

}  // namespace crossmi

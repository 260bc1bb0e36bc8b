// Apache License, Version 2.0, refer to LICENSE.txt

#include "crossmi/baselines.hh"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <ostream>

#include "crossmi/mathutil.hh"

namespace crossmi {

namespace {

long choose2(long d) { return d * (d - 1) / 2; }

}  // namespace

PairStat pearson_r2(const Dataset& dataset, int i, int j, long test_count,
                    double alpha) {
  const Schema& schema = dataset.schema();
  if (schema.variable(i).is_nominal() || schema.variable(j).is_nominal()) {
    throw NotNumericalError("r^2 needs numerical variables");
  }
  PairStat stat;
  stat.i = i;
  stat.j = j;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  long n = 0;
  for (const auto& row : dataset.rows()) {
    const Cell& a = row[static_cast<size_t>(i)];
    const Cell& b = row[static_cast<size_t>(j)];
    if (a.is_missing() || b.is_missing()) continue;
    const double x = a.real_value();
    const double y = b.real_value();
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
    ++n;
  }
  stat.complete_rows = n;
  if (n < 3) {
    stat.degenerate = true;  // not rejected at tiny sample sizes
    return stat;
  }
  const double nd = static_cast<double>(n);
  const double vx = sxx - sx * sx / nd;
  const double vy = syy - sy * sy / nd;
  const double cxy = sxy - sx * sy / nd;
  if (vx <= 0.0 || vy <= 0.0) {
    stat.degenerate = true;  // constant column
    return stat;
  }
  const double r = std::clamp(cxy / std::sqrt(vx * vy), -1.0, 1.0);
  stat.statistic = r * r;
  if (stat.statistic >= 1.0) {
    stat.p_value = 0.0;
  } else {
    const double t = std::fabs(r) * std::sqrt((nd - 2.0) / (1.0 - r * r));
    stat.p_value = student_t_two_sided_p(t, nd - 2.0);
  }
  stat.significant = stat.p_value < alpha / static_cast<double>(test_count);
  return stat;
}

BaselineReport r2_report(const Dataset& dataset, double alpha) {
  const Schema& schema = dataset.schema();
  BaselineReport report;
  report.alpha = alpha;
  report.test_count = choose2(static_cast<long>(schema.size()));
  report.corrected_alpha = alpha / static_cast<double>(report.test_count);
  for (int i = 0; i < static_cast<int>(schema.size()); ++i) {
    if (schema.variable(i).is_nominal()) continue;
    for (int j = i + 1; j < static_cast<int>(schema.size()); ++j) {
      if (schema.variable(j).is_nominal()) continue;
      report.pairs.push_back(
          pearson_r2(dataset, i, j, report.test_count, alpha));
    }
  }
  return report;
}

PartialCorrelationResult partial_correlation(const Dataset& dataset,
                                             double alpha) {
  const Schema& schema = dataset.schema();
  const int d = static_cast<int>(schema.size());
  for (int v = 0; v < d; ++v) {
    if (schema.variable(v).is_nominal()) {
      throw NotNumericalError("partial correlation needs numerical variables");
    }
  }
  PartialCorrelationResult result;
  result.report.alpha = alpha;
  result.report.test_count = choose2(static_cast<long>(d));
  result.report.corrected_alpha =
      alpha / static_cast<double>(result.report.test_count);
  result.matrix.assign(static_cast<size_t>(d),
                       std::vector<double>(static_cast<size_t>(d), 0.0));
  for (int v = 0; v < d; ++v) result.matrix[static_cast<size_t>(v)][static_cast<size_t>(v)] = 1.0;

  std::vector<std::vector<double>> complete;
  for (const auto& row : dataset.rows()) {
    std::vector<double> values;
    values.reserve(static_cast<size_t>(d));
    bool ok = true;
    for (const Cell& c : row) {
      if (c.is_missing()) {
        ok = false;
        break;
      }
      values.push_back(c.real_value());
    }
    if (ok) complete.push_back(std::move(values));
  }
  result.complete_rows = static_cast<long>(complete.size());
  const long n = result.complete_rows;
  const long controlled = d - 2;
  // Need enough rows to invert and to have positive Fisher dof.
  if (n < d + 2 || n - controlled - 3 <= 0) {
    result.degenerate = true;
    return result;
  }

  std::vector<double> mean(static_cast<size_t>(d), 0.0);
  for (const auto& row : complete) {
    for (int v = 0; v < d; ++v) mean[static_cast<size_t>(v)] += row[static_cast<size_t>(v)];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  std::vector<std::vector<double>> corr(
      static_cast<size_t>(d), std::vector<double>(static_cast<size_t>(d), 0.0));
  std::vector<double> sd(static_cast<size_t>(d), 0.0);
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      double c = 0.0;
      for (const auto& row : complete) {
        c += (row[static_cast<size_t>(a)] - mean[static_cast<size_t>(a)]) *
             (row[static_cast<size_t>(b)] - mean[static_cast<size_t>(b)]);
      }
      corr[static_cast<size_t>(a)][static_cast<size_t>(b)] = c;
      corr[static_cast<size_t>(b)][static_cast<size_t>(a)] = c;
    }
  }
  for (int a = 0; a < d; ++a) {
    sd[static_cast<size_t>(a)] = std::sqrt(corr[static_cast<size_t>(a)][static_cast<size_t>(a)]);
    if (sd[static_cast<size_t>(a)] <= 0.0) {
      result.degenerate = true;
      return result;
    }
  }
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      corr[static_cast<size_t>(a)][static_cast<size_t>(b)] /=
          sd[static_cast<size_t>(a)] * sd[static_cast<size_t>(b)];
    }
  }
  std::vector<std::vector<double>> omega = corr;
  if (!invert_matrix(omega)) {
    result.degenerate = true;
    return result;
  }
  const double dof = std::sqrt(static_cast<double>(n - controlled - 3));
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      const double den = std::sqrt(omega[static_cast<size_t>(a)][static_cast<size_t>(a)] *
                                   omega[static_cast<size_t>(b)][static_cast<size_t>(b)]);
      const double r = std::clamp(
          -omega[static_cast<size_t>(a)][static_cast<size_t>(b)] / den, -1.0, 1.0);
      result.matrix[static_cast<size_t>(a)][static_cast<size_t>(b)] = r;
      result.matrix[static_cast<size_t>(b)][static_cast<size_t>(a)] = r;
      PairStat stat;
      stat.i = a;
      stat.j = b;
      stat.statistic = r;
      stat.complete_rows = n;
      if (std::fabs(r) >= 1.0) {
        stat.p_value = 0.0;
      } else {
        const double z = std::fabs(std::atanh(r)) * dof;
        stat.p_value = 2.0 * (1.0 - normal_cdf(z));
      }
      stat.significant = stat.p_value < result.report.corrected_alpha;
      result.report.pairs.push_back(stat);
    }
  }
  return result;
}

void write_baseline_csv(std::ostream& out, const Schema& schema,
                        const BaselineReport& report) {
  out << "variable_a,variable_b,statistic,p_value,complete_rows,degenerate,"
         "significant\n";
  char buf[64];
  for (const PairStat& p : report.pairs) {
    out << schema.variable(p.i).name << ',' << schema.variable(p.j).name << ',';
    std::snprintf(buf, sizeof(buf), "%.10g", p.statistic);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.10g", p.p_value);
    out << buf << ',' << p.complete_rows << ',' << (p.degenerate ? 1 : 0)
        << ',' << (p.significant ? 1 : 0) << '\n';
  }
}

namespace {

std::shared_ptr<const Dataset> exam_dataset(
    const std::vector<std::array<double, 5>>& rows) {
  const char* names[5] = {"mech", "vectors", "algebra", "analysis", "stats"};
  std::vector<Variable> vars(5);
  for (size_t i = 0; i < 5; ++i) {
    vars[i].name = names[i];
    vars[i].type = StatType::kNumerical;
  }
  std::vector<std::vector<Cell>> cells;
  cells.reserve(rows.size());
  for (const auto& r : rows) {
    std::vector<Cell> row;
    row.reserve(5);
    for (double x : r) row.push_back(Cell::real(x));
    cells.push_back(std::move(row));
  }
  return std::make_shared<Dataset>(Schema(std::move(vars)), std::move(cells));
}

}  // namespace

std::shared_ptr<const Dataset> gen_hub_dataset(long n, RandomStream& rng) {
  if (n < 1) throw Error("generator needs n >= 1");
  std::vector<std::array<double, 5>> rows(static_cast<size_t>(n));
  for (auto& row : rows) {
    const bool high = rng.uniform() < 0.4;
    const double hub = high ? rng.normal(72.0, 6.0) : rng.normal(42.0, 6.0);
    // Cross-hub coupling flips sign with the regime, so the population
    // partial correlation of the cross pairs washes out.
    const double rho = high ? 0.9 : -0.5;
    const double u_left = rng.normal();
    const double u_right =
        rho * u_left + std::sqrt(1.0 - rho * rho) * rng.normal();
    const double base = high ? 62.0 : 48.0;
    row[0] = base - 2.0 + 10.0 * u_left + 3.0 * rng.normal();   // mech
    row[1] = base + 9.0 * u_left + 3.0 * rng.normal();          // vectors
    row[2] = hub;                                               // algebra
    row[3] = base + 1.0 + 9.0 * u_right + 3.0 * rng.normal();   // analysis
    row[4] = base - 1.0 + 10.0 * u_right + 3.0 * rng.normal();  // stats
  }
  return exam_dataset(rows);
}

std::shared_ptr<const Dataset> gen_hub_free_dataset(long n, RandomStream& rng) {
  if (n < 1) throw Error("generator needs n >= 1");
  std::vector<std::array<double, 5>> rows(static_cast<size_t>(n));
  for (auto& row : rows) {
    for (double& x : row) x = rng.normal(55.0, 12.0);
  }
  return exam_dataset(rows);
}

ContextSpecificReport context_specific_demo(const Ensemble& ensemble, int i,
                                            int j, int hub, double hub_low,
                                            double hub_high, long t,
                                            long t_outer,
                                            const RandomStream& rng,
                                            int jobs) {
  ContextSpecificReport report;
  report.hub_low = hub_low;
  report.hub_high = hub_high;

  CmiQuery query;
  query.a = VarSet::of({i});
  query.b = VarSet::of({j});
  query.t = t;
  query.t_outer = t_outer;

  query.condition.fixed = {{hub, Cell::real(hub_low)}};
  report.posterior_low = cmi_posterior(ensemble, query, rng.child(0), jobs);
  query.condition.fixed = {{hub, Cell::real(hub_high)}};
  report.posterior_high = cmi_posterior(ensemble, query, rng.child(1), jobs);
  query.condition.fixed = {};
  query.condition.marginalized = VarSet::of({hub});
  report.posterior_marginalized =
      cmi_posterior(ensemble, query, rng.child(2), jobs);

  const auto values = [](const CmiPosterior& p) {
    std::vector<double> out;
    out.reserve(p.estimates.size());
    for (const CmiSample& s : p.estimates) out.push_back(s.estimate);
    return out;
  };
  const std::vector<double> low = values(report.posterior_low);
  const std::vector<double> high = values(report.posterior_high);
  report.low_vs_high = ks_two_sample(low, high);
  report.median_low = median(low);
  report.median_high = median(high);
  report.median_marginalized = median(values(report.posterior_marginalized));
  return report;
}

}  // namespace crossmi

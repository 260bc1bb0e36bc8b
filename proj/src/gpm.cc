// Apache License, Version 2.0, refer to LICENSE.txt

#include "crossmi/gpm.hh"

#include <cmath>

namespace crossmi {

void check_cmi_query(const Schema& schema, const VarSet& a, const VarSet& b,
                     const Values& condition, long t) {
  if (a.empty() || b.empty()) {
    throw Error("cmi query sets must be non-empty");
  }
  if (t < 1) throw AccuracyError("accuracy must be >= 1");
  if (!a.disjoint(b)) {
    throw OverlappingVarSetsError("a and b overlap");
  }
  const VarSet cond_keys = keys_of(condition);
  if (!a.disjoint(cond_keys) || !b.disjoint(cond_keys)) {
    throw OverlappingVarSetsError("query sets overlap the condition");
  }
  for (int v : a) schema.variable(v);
  for (int v : b) schema.variable(v);
  for (const auto& [v, cell] : condition) schema.check_cell(v, cell);
}

McEstimate gpm_cmi_estimate(const Gpm& gpm, const VarSet& a, const VarSet& b,
                            const Values& condition, long t,
                            RandomStream& rng) {
  check_cmi_query(gpm.schema(), a, b, condition, t);
  const VarSet joint = a.set_union(b);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (long i = 0; i < t; ++i) {
    RandomStream sample_rng = rng.child(static_cast<uint64_t>(i));
    const Values draw = gpm.simulate(joint, condition, sample_rng);
    Values of_a, of_b;
    for (int v : a) of_a.emplace(v, draw.at(v));
    for (int v : b) of_b.emplace(v, draw.at(v));
    const double m_ab = gpm.logpdf(draw, condition);
    const double m_a = gpm.logpdf(of_a, condition);
    const double m_b = gpm.logpdf(of_b, condition);
    // Parenthesized so a factorizing model cancels exactly.
    const double summand = m_ab - (m_a + m_b);
    sum += summand;
    sum_sq += summand * summand;
  }
  McEstimate est;
  est.sample_count = t;
  est.value = sum / static_cast<double>(t);
  if (t > 1) {
    const double var =
        (sum_sq - sum * sum / static_cast<double>(t)) /
        static_cast<double>(t - 1);
    est.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(t));
  }
  return est;
}

double gpm_cmi(const Gpm& gpm, const VarSet& a, const VarSet& b,
               const Values& condition, long t, RandomStream& rng) {
  return gpm_cmi_estimate(gpm, a, b, condition, t, rng).value;
}

}  // namespace crossmi

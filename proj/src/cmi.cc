// Apache License, Version 2.0, refer to LICENSE.txt

#include "crossmi/cmi.hh"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "crossmi/mathutil.hh"
#include "json.hpp"

namespace crossmi {

void Condition::validate(const Schema& schema) const {
  for (const auto& [v, cell] : fixed) {
    schema.check_cell(v, cell);
    if (cell.is_missing()) {
      throw TypeMismatchError("condition value must be observed");
    }
  }
  for (int v : marginalized) schema.variable(v);
  if (!keys_of(fixed).disjoint(marginalized)) {
    throw OverlappingVarSetsError(
        "fixed and marginalized condition variables overlap");
  }
}

void CmiQuery::validate(const Schema& schema) const {
  condition.validate(schema);
  check_cmi_query(schema, a, b, condition.fixed, t);
  if (t_outer < 1) throw AccuracyError("t_outer must be >= 1");
  if (!a.disjoint(condition.marginalized) ||
      !b.disjoint(condition.marginalized)) {
    throw OverlappingVarSetsError("query sets overlap marginalized variables");
  }
}

namespace {

// Blocks of `member` containing variables from both a and b.
bool has_active_block(const CrossCatState& member, const VarSet& a,
                      const VarSet& b) {
  for (int va : a) {
    const int64_t block = member.block_of(va);
    for (int vb : b) {
      if (member.block_of(vb) == block) return true;
    }
  }
  return false;
}

VarSet marginalized_in_active_blocks(const CrossCatState& member,
                                     const CmiQuery& query) {
  std::vector<int> keep;
  for (int m : query.condition.marginalized) {
    const int64_t block = member.block_of(m);
    bool a_here = false, b_here = false;
    for (int va : query.a) a_here = a_here || member.block_of(va) == block;
    for (int vb : query.b) b_here = b_here || member.block_of(vb) == block;
    if (a_here && b_here) keep.push_back(m);
  }
  return VarSet(std::move(keep));
}

CmiSample member_estimate(const CrossCatState& member, size_t index,
                          const CmiQuery& query, RandomStream member_rng) {
  CmiSample sample;
  sample.member = index;
  if (!has_active_block(member, query.a, query.b)) {
    return sample;  // structurally independent: exactly 0, no model calls
  }
  if (query.condition.marginalized.empty()) {
    const CrosscatCmi est =
        member.cmi(query.a, query.b, query.condition.fixed, query.t, member_rng);
    sample.estimate = est.value;
    sample.std_error = est.std_error;
    return sample;
  }
  // Marginalized condition: average CMI over draws of the marginalized
  // variables, each simulated conditionally on the fixed values. Only
  // marginalized variables sharing an active block with the query can move
  // the estimate; the rest are skipped.
  const VarSet effective = marginalized_in_active_blocks(member, query);
  std::vector<double> values(static_cast<size_t>(query.t_outer));
  for (long j = 0; j < query.t_outer; ++j) {
    RandomStream outer = member_rng.child(static_cast<uint64_t>(j));
    RandomStream sim_rng = outer.child(0);
    RandomStream cmi_rng = outer.child(1);
    Values condition = query.condition.fixed;
    if (!effective.empty()) {
      Values drawn = member.simulate(effective, query.condition.fixed, sim_rng);
      for (auto& [v, cell] : drawn) condition.emplace(v, cell);
    }
    values[static_cast<size_t>(j)] =
        member.cmi(query.a, query.b, condition, query.t, cmi_rng).value;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  sample.estimate = sum / static_cast<double>(query.t_outer);
  if (query.t_outer > 1) {
    double ss = 0.0;
    for (double v : values) {
      ss += (v - sample.estimate) * (v - sample.estimate);
    }
    sample.std_error = std::sqrt(ss / static_cast<double>(query.t_outer - 1) /
                                 static_cast<double>(query.t_outer));
  }
  return sample;
}

}  // namespace

CmiPosterior cmi_posterior(const Ensemble& ensemble, const CmiQuery& query,
                           const RandomStream& rng, int jobs) {
  query.validate(ensemble.schema());
  CmiPosterior posterior;
  posterior.estimates.resize(ensemble.size());
  const RandomStream& root = rng;
  parallel_for(static_cast<long>(ensemble.size()), jobs, [&](long h) {
    posterior.estimates[static_cast<size_t>(h)] =
        member_estimate(ensemble.member(static_cast<size_t>(h)),
                        static_cast<size_t>(h), query,
                        root.child(static_cast<uint64_t>(h)));
  });
  return posterior;
}

std::string Threshold::to_string() const {
  std::ostringstream out;
  out << (op == Op::kLess ? "< " : "> ") << value;
  return out.str();
}

double prob_cmi_in(const CmiPosterior& posterior, const Threshold& threshold) {
  if (posterior.estimates.empty()) throw Error("posterior is empty");
  long hits = 0;
  for (const CmiSample& s : posterior.estimates) {
    if (threshold.test(s.estimate)) ++hits;
  }
  return static_cast<double>(hits) /
         static_cast<double>(posterior.estimates.size());
}

VerdictReport independence_verdict(const Ensemble& ensemble, CmiQuery query,
                                   IndependenceKind kind, double eps,
                                   double confidence, const RandomStream& rng,
                                   int jobs) {
  const bool has_fixed = !query.condition.fixed.empty();
  const bool has_marginal = !query.condition.marginalized.empty();
  switch (kind) {
    case IndependenceKind::kMarginal:
      if (has_fixed || has_marginal) {
        throw ConditionShapeError("marginal query takes an empty condition");
      }
      break;
    case IndependenceKind::kContextSpecific:
      if (!has_fixed || has_marginal) {
        throw ConditionShapeError(
            "context-specific query takes fixed values only");
      }
      break;
    case IndependenceKind::kConditional:
      if (has_fixed || !has_marginal) {
        throw ConditionShapeError(
            "conditional query takes marginalized variables only");
      }
      break;
  }
  VerdictReport report;
  report.eps = eps;
  report.confidence = confidence;
  report.posterior = cmi_posterior(ensemble, query, rng, jobs);
  report.prob_below_eps =
      prob_cmi_in(report.posterior, {Threshold::Op::kLess, eps});
  if (report.prob_below_eps >= confidence) {
    report.verdict = Verdict::kProbablyIndependent;
  } else if (report.prob_below_eps <= confidence - 0.2) {
    report.verdict = Verdict::kProbablyDependent;
  } else {
    report.verdict = Verdict::kUndecided;
  }
  return report;
}

void write_posterior_csv(std::ostream& out, const CmiPosterior& posterior) {
  char buf[64];
  out << "member_id,cmi_nats\n";
  for (const CmiSample& s : posterior.estimates) {
    std::snprintf(buf, sizeof(buf), "%.17g", s.estimate);
    out << s.member << ',' << buf << '\n';
  }
}

std::string posterior_summary_json(const CmiPosterior& posterior,
                                   const std::vector<Threshold>& thresholds) {
  std::vector<double> values;
  values.reserve(posterior.estimates.size());
  for (const CmiSample& s : posterior.estimates) values.push_back(s.estimate);
  nlohmann::json summary{
      {"members", values.size()},
      {"min", *std::min_element(values.begin(), values.end())},
      {"median", median(values)},
      {"max", *std::max_element(values.begin(), values.end())}};
  nlohmann::json probs = nlohmann::json::object();
  for (const Threshold& t : thresholds) {
    probs[t.to_string()] = prob_cmi_in(posterior, t);
  }
  summary["probabilities"] = std::move(probs);
  return summary.dump(2);
}

}  // namespace crossmi

// Apache License, Version 2.0, refer to LICENSE.txt

#include "crossmi/cmi.hh"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "test_oracles.hh"

using namespace crossmi;
using namespace crossmi::testing;

namespace {

// Three nominal columns; member 0 keeps them all in one block, member 1
// either splits {x1, x2} from {x3} or splits everything.
struct SmallEnsemble {
  std::shared_ptr<const Dataset> data;
  std::shared_ptr<const HyperGridSet> grids;
  std::unique_ptr<Ensemble> ensemble;
};

std::shared_ptr<const Dataset> three_bits_dataset() {
  std::vector<Variable> vars(3);
  for (int v = 0; v < 3; ++v) {
    vars[static_cast<size_t>(v)].name = "x" + std::to_string(v + 1);
    vars[static_cast<size_t>(v)].type = StatType::kNominal;
    vars[static_cast<size_t>(v)].category_count = 2;
  }
  std::vector<std::vector<Cell>> rows;
  const int raw[][3] = {{0, 0, 0}, {1, 1, 0}, {0, 1, 1}, {1, 0, 1},
                        {0, 0, 1}, {1, 1, 1}, {1, 1, 0}, {0, 0, 0}};
  for (const auto& r : raw) {
    rows.push_back(
        {Cell::category(r[0]), Cell::category(r[1]), Cell::category(r[2])});
  }
  return std::make_shared<Dataset>(Schema(vars), std::move(rows));
}

SmallEnsemble make_small_ensemble(bool split_second_member) {
  SmallEnsemble out;
  out.data = three_bits_dataset();
  out.grids =
      std::make_shared<const HyperGridSet>(compute_hyper_grids(*out.data));
  const std::vector<int64_t> z1{0, 0, 1, 1, 0, 1, 0, 1};
  const std::vector<int64_t> z2{0, 1, 0, 1, 1, 0, 1, 0};
  std::vector<CrossCatState> members;
  {
    std::map<int64_t, DpmmState> blocks;
    blocks.emplace(0, DpmmState(out.data, {0, 1, 2}, 1.0, z1,
                                std::vector<Hypers>{NominalHypers{0.7},
                                                    NominalHypers{1.0},
                                                    NominalHypers{1.3}},
                                out.grids));
    members.emplace_back(out.data, 1.0, std::vector<int64_t>{0, 0, 0},
                         std::move(blocks), out.grids);
  }
  {
    std::map<int64_t, DpmmState> blocks;
    if (split_second_member) {
      blocks.emplace(0, DpmmState(out.data, {0, 1}, 0.5, z2,
                                  std::vector<Hypers>{NominalHypers{1.0},
                                                      NominalHypers{0.5}},
                                  out.grids));
      blocks.emplace(1, DpmmState(out.data, {2}, 2.0, z1,
                                  std::vector<Hypers>{NominalHypers{2.0}},
                                  out.grids));
      members.emplace_back(out.data, 1.0, std::vector<int64_t>{0, 0, 1},
                           std::move(blocks), out.grids);
    } else {
      blocks.emplace(0, DpmmState(out.data, {0}, 1.0, z2,
                                  std::vector<Hypers>{NominalHypers{1.0}},
                                  out.grids));
      blocks.emplace(1, DpmmState(out.data, {1}, 1.0, z2,
                                  std::vector<Hypers>{NominalHypers{0.5}},
                                  out.grids));
      blocks.emplace(2, DpmmState(out.data, {2}, 1.0, z1,
                                  std::vector<Hypers>{NominalHypers{2.0}},
                                  out.grids));
      members.emplace_back(out.data, 1.0, std::vector<int64_t>{0, 1, 2},
                           std::move(blocks), out.grids);
    }
  }
  out.ensemble = std::make_unique<Ensemble>(
      out.data, std::move(members),
      EnsembleProvenance{0, 0, out.data->fingerprint()});
  return out;
}

}  // namespace

TEST_CASE("single-member posterior equals crosscat cmi under a shared seed") {
  const SmallEnsemble fixture = make_small_ensemble(true);
  std::vector<CrossCatState> one{fixture.ensemble->member(0)};
  const Ensemble single(fixture.data, std::move(one),
                        {0, 0, fixture.data->fingerprint()});
  CmiQuery query;
  query.a = VarSet::of({0});
  query.b = VarSet::of({1});
  query.t = 300;
  const CmiPosterior posterior = cmi_posterior(single, query, RandomStream(5));
  REQUIRE(posterior.estimates.size() == 1);
  RandomStream member_rng = RandomStream(5).child(0);
  const CrosscatCmi direct =
      single.member(0).cmi(query.a, query.b, {}, 300, member_rng);
  CHECK(posterior.estimates[0].estimate == direct.value);
}

TEST_CASE("structural independence gives exact zeros across the posterior") {
  const SmallEnsemble fixture = make_small_ensemble(false);
  std::vector<CrossCatState> split_members;
  split_members.push_back(fixture.ensemble->member(1));
  split_members.push_back(fixture.ensemble->member(1));
  const Ensemble all_split(fixture.data, std::move(split_members),
                           {0, 0, fixture.data->fingerprint()});
  CmiQuery query;
  query.a = VarSet::of({0});
  query.b = VarSet::of({2});
  query.t = 50;
  for (const CrossCatState& member : all_split.members()) {
    member.reset_counters();
  }
  const CmiPosterior posterior =
      cmi_posterior(all_split, query, RandomStream(1));
  for (const CmiSample& s : posterior.estimates) {
    CHECK(s.estimate == 0.0);
    CHECK(s.std_error == 0.0);
  }
  for (const CrossCatState& member : all_split.members()) {
    CHECK(member.counters().simulate_calls == 0);
    CHECK(member.counters().logpdf_calls == 0);
  }
}

TEST_CASE("pruning precedes outer sampling for marginalized conditions") {
  const SmallEnsemble fixture = make_small_ensemble(false);
  std::vector<CrossCatState> split_members;
  split_members.push_back(fixture.ensemble->member(1));
  const Ensemble all_split(fixture.data, std::move(split_members),
                           {0, 0, fixture.data->fingerprint()});
  CmiQuery query;
  query.a = VarSet::of({0});
  query.b = VarSet::of({1});
  query.condition.marginalized = VarSet::of({2});
  query.t = 50;
  query.t_outer = 40;
  all_split.member(0).reset_counters();
  const CmiPosterior posterior =
      cmi_posterior(all_split, query, RandomStream(2));
  CHECK(posterior.estimates[0].estimate == 0.0);
  CHECK(all_split.member(0).counters().simulate_calls == 0);
  CHECK(all_split.member(0).counters().logpdf_calls == 0);
}

TEST_CASE("marginalized conditions average the context cmi (enumeration oracle)") {
  // Average over x3 of CMI(x1 : x2 | x3 = c), weighted by p(x3 = c), per
  // member; engine estimates must sit within 3 standard errors.
  const SmallEnsemble fixture = make_small_ensemble(true);
  const Ensemble& ensemble = *fixture.ensemble;
  CmiQuery query;
  query.a = VarSet::of({0});
  query.b = VarSet::of({1});
  query.condition.marginalized = VarSet::of({2});
  query.t = 100;
  query.t_outer = 10000;
  const CmiPosterior posterior =
      cmi_posterior(ensemble, query, RandomStream(33), 2);
  for (size_t h = 0; h < ensemble.size(); ++h) {
    const CrossCatState& member = ensemble.member(h);
    double oracle = 0.0;
    for (int c = 0; c < 2; ++c) {
      const Values context{{2, Cell::category(c)}};
      const double weight = std::exp(member.logpdf(context, {}));
      oracle += weight * enumerated_cmi(member, query.a, query.b, context);
    }
    const CmiSample& s = posterior.estimates[h];
    const double tolerance = 3 * std::max(s.std_error, 1e-6);
    CHECK(std::fabs(s.estimate - oracle) < tolerance);
  }
}

TEST_CASE("posterior is symmetric in the query sets under a shared seed") {
  const SmallEnsemble fixture = make_small_ensemble(true);
  CmiQuery ab, ba;
  ab.a = VarSet::of({0});
  ab.b = VarSet::of({1});
  ab.t = 200;
  ba.a = ab.b;
  ba.b = ab.a;
  ba.t = 200;
  const CmiPosterior pab =
      cmi_posterior(*fixture.ensemble, ab, RandomStream(9));
  const CmiPosterior pba =
      cmi_posterior(*fixture.ensemble, ba, RandomStream(9));
  for (size_t h = 0; h < pab.estimates.size(); ++h) {
    CHECK(pab.estimates[h].estimate == pba.estimates[h].estimate);
  }
}

TEST_CASE("prob_cmi_in counts members against the threshold") {
  CmiPosterior posterior;
  for (double v : {0.0, 0.05, 0.2, 0.3}) {
    posterior.estimates.push_back({posterior.estimates.size(), v, 0.0});
  }
  CHECK(prob_cmi_in(posterior, {Threshold::Op::kLess, 0.1}) ==
        doctest::Approx(0.5));
  CHECK(prob_cmi_in(posterior, {Threshold::Op::kGreater, 0.1}) ==
        doctest::Approx(0.5));
  CmiPosterior zeros;
  for (int i = 0; i < 4; ++i) {
    zeros.estimates.push_back({static_cast<size_t>(i), 0.0, 0.0});
  }
  CHECK(prob_cmi_in(zeros, {Threshold::Op::kLess, 0.1}) == 1.0);
  // Monotone in the threshold.
  for (double t1 : {0.0, 0.05, 0.1, 0.25}) {
    for (double t2 : {0.0, 0.05, 0.1, 0.25}) {
      if (t1 <= t2) {
        CHECK(prob_cmi_in(posterior, {Threshold::Op::kLess, t1}) <=
              prob_cmi_in(posterior, {Threshold::Op::kLess, t2}));
      }
    }
  }
  CHECK_THROWS_AS(prob_cmi_in(CmiPosterior{}, {Threshold::Op::kLess, 1.0}),
                  Error);
}

TEST_CASE("independence verdicts enforce the condition shape") {
  const SmallEnsemble fixture = make_small_ensemble(true);
  const Ensemble& ensemble = *fixture.ensemble;
  CmiQuery query;
  query.a = VarSet::of({0});
  query.b = VarSet::of({1});
  query.t = 50;
  query.t_outer = 10;
  RandomStream rng(3);
  CHECK_NOTHROW(independence_verdict(ensemble, query,
                                     IndependenceKind::kMarginal, 0.05, 0.9,
                                     rng));
  CHECK_THROWS_AS(
      independence_verdict(ensemble, query, IndependenceKind::kContextSpecific,
                           0.05, 0.9, rng),
      ConditionShapeError);
  query.condition.fixed = {{2, Cell::category(0)}};
  CHECK_NOTHROW(independence_verdict(ensemble, query,
                                     IndependenceKind::kContextSpecific, 0.05,
                                     0.9, rng));
  CHECK_THROWS_AS(
      independence_verdict(ensemble, query, IndependenceKind::kConditional,
                           0.05, 0.9, rng),
      ConditionShapeError);
  query.condition.fixed = {};
  query.condition.marginalized = VarSet::of({2});
  CHECK_NOTHROW(independence_verdict(ensemble, query,
                                     IndependenceKind::kConditional, 0.05, 0.9,
                                     rng));
}

TEST_CASE("eps = 0 never yields probably-independent") {
  // Monte Carlo estimates are almost surely nonzero, and structural zeros
  // are exactly 0.0, which fails the strict '< 0' test.
  const SmallEnsemble fixture = make_small_ensemble(false);
  std::vector<CrossCatState> members;
  members.push_back(fixture.ensemble->member(1));
  members.push_back(fixture.ensemble->member(1));
  const Ensemble all_split(fixture.data, std::move(members),
                           {0, 0, fixture.data->fingerprint()});
  CmiQuery query;
  query.a = VarSet::of({0});
  query.b = VarSet::of({2});
  query.t = 50;
  RandomStream rng(4);
  const VerdictReport report = independence_verdict(
      all_split, query, IndependenceKind::kMarginal, 0.0, 0.9, rng);
  CHECK(report.prob_below_eps == 0.0);
  CHECK(report.verdict == Verdict::kProbablyDependent);
}

TEST_CASE("verdict bands are three-valued") {
  // Three structurally split members (exact zeros) plus one member whose
  // block couples two identical columns, giving a solidly positive CMI.
  std::vector<Variable> vars(2);
  for (int v = 0; v < 2; ++v) {
    vars[static_cast<size_t>(v)].name = "x" + std::to_string(v + 1);
    vars[static_cast<size_t>(v)].type = StatType::kNominal;
    vars[static_cast<size_t>(v)].category_count = 2;
  }
  std::vector<std::vector<Cell>> rows;
  std::vector<int64_t> by_value;
  for (int i = 0; i < 8; ++i) {
    const int bit = i < 4 ? 0 : 1;
    rows.push_back({Cell::category(bit), Cell::category(bit)});
    by_value.push_back(bit);
  }
  auto data = std::make_shared<Dataset>(Schema(vars), std::move(rows));
  auto grids = std::make_shared<const HyperGridSet>(compute_hyper_grids(*data));
  const std::vector<Hypers> hypers{NominalHypers{1.0}, NominalHypers{1.0}};
  std::vector<CrossCatState> members;
  for (int i = 0; i < 3; ++i) {
    std::map<int64_t, DpmmState> blocks;
    blocks.emplace(0, DpmmState(data, {0}, 1.0, by_value,
                                std::vector<Hypers>{NominalHypers{1.0}}, grids));
    blocks.emplace(1, DpmmState(data, {1}, 1.0, by_value,
                                std::vector<Hypers>{NominalHypers{1.0}}, grids));
    members.emplace_back(data, 1.0, std::vector<int64_t>{0, 1},
                         std::move(blocks), grids);
  }
  {
    std::map<int64_t, DpmmState> blocks;
    blocks.emplace(0, DpmmState(data, {0, 1}, 1e-9, by_value, hypers, grids));
    members.emplace_back(data, 1.0, std::vector<int64_t>{0, 0},
                         std::move(blocks), grids);
  }
  const Ensemble ensemble(data, std::move(members),
                          {0, 0, data->fingerprint()});
  CmiQuery query;
  query.a = VarSet::of({0});
  query.b = VarSet::of({1});
  query.t = 400;
  RandomStream rng(6);
  const VerdictReport generous = independence_verdict(
      ensemble, query, IndependenceKind::kMarginal, 10.0, 0.9, rng);
  CHECK(generous.prob_below_eps == 1.0);
  CHECK(generous.verdict == Verdict::kProbablyIndependent);

  // Exact zeros are not below an eps of zero.
  const VerdictReport tight = independence_verdict(
      ensemble, query, IndependenceKind::kMarginal, 0.0, 0.9, rng);
  CHECK(tight.prob_below_eps == 0.0);
  CHECK(tight.verdict == Verdict::kProbablyDependent);

  // 0.75 of members below eps against confidence 0.9: inside the 0.2-wide
  // undecided band. The coupled member sits near 0.1 nats, far above eps.
  const VerdictReport middle = independence_verdict(
      ensemble, query, IndependenceKind::kMarginal, 1e-6, 0.9, rng);
  CHECK(middle.prob_below_eps == doctest::Approx(0.75));
  CHECK(middle.verdict == Verdict::kUndecided);
}

TEST_CASE("posterior exports") {
  CmiPosterior posterior;
  posterior.estimates.push_back({0, 0.25, 0.01});
  posterior.estimates.push_back({1, 0.0, 0.0});
  std::ostringstream csv;
  write_posterior_csv(csv, posterior);
  CHECK(csv.str() == "member_id,cmi_nats\n0,0.25\n1,0\n");
  const std::string summary = posterior_summary_json(
      posterior, {{Threshold::Op::kLess, 0.1}, {Threshold::Op::kGreater, 0.2}});
  CHECK(summary.find("\"min\": 0.0") != std::string::npos);
  CHECK(summary.find("\"max\": 0.25") != std::string::npos);
  CHECK(summary.find("\"< 0.1\": 0.5") != std::string::npos);
  CHECK(summary.find("\"> 0.2\": 0.5") != std::string::npos);
}

TEST_CASE("query validation catches overlaps and bad accuracies") {
  const SmallEnsemble fixture = make_small_ensemble(true);
  CmiQuery query;
  query.a = VarSet::of({0});
  query.b = VarSet::of({1});
  query.condition.marginalized = VarSet::of({1});
  CHECK_THROWS_AS(cmi_posterior(*fixture.ensemble, query, RandomStream(0)),
                  OverlappingVarSetsError);
  query.condition.marginalized = VarSet();
  query.t_outer = 0;
  CHECK_THROWS_AS(cmi_posterior(*fixture.ensemble, query, RandomStream(0)),
                  AccuracyError);
  query.t_outer = 1;
  query.condition.fixed = {{0, Cell::category(0)}};
  CHECK_THROWS_AS(cmi_posterior(*fixture.ensemble, query, RandomStream(0)),
                  OverlappingVarSetsError);
}

// Apache License, Version 2.0, refer to LICENSE.txt

#include "crossmi/gpm.hh"

#include <cmath>

#include "crossmi/bayesnet.hh"
#include "doctest.h"
#include "test_gpms.hh"

using namespace crossmi;
using namespace crossmi::testing;

namespace {

// The 2x2 joint [[0.4, 0.1], [0.1, 0.4]] as a two-node network:
// p(x1) uniform, p(x2 = x1) = 0.8.
DiscreteBayesNet coupled_bits() {
  std::vector<BayesNetVariable> vars(2);
  vars[0] = {"x1", 2, {}, {{0.5, 0.5}}};
  vars[1] = {"x2", 2, {0}, {{0.8, 0.2}, {0.2, 0.8}}};
  return DiscreteBayesNet(std::move(vars));
}

}  // namespace

TEST_CASE("gpm_cmi is identically zero on a factorizing model") {
  // Two independent parts glued as a product: the summand of the estimator
  // cancels term by term, so the estimate is exactly 0 for every T. Each
  // part is the single-variable slice of a bivariate gaussian (standard
  // normal), owned over variables {0} and {1} respectively.
  auto gauss = std::make_shared<BivariateGaussianGpm>(0.9);
  Variable va, vb;
  va.name = "a";
  vb.name = "b";
  ProductGpm product(Schema({va, vb}), {gauss, gauss},
                     {VarSet::of({0}), VarSet::of({1})});
  for (long t : {1L, 7L, 100L}) {
    RandomStream rng(5);
    CHECK(gpm_cmi(product, VarSet::of({0}), VarSet::of({1}), {}, t, rng) ==
          0.0);
  }
}

TEST_CASE("gpm_cmi recovers the closed-form gaussian mutual information") {
  const double rho = 0.5;
  const BivariateGaussianGpm gpm(rho);
  const double exact = -0.5 * std::log(1 - rho * rho);  // 0.14384...
  RandomStream rng(101);
  const McEstimate est =
      gpm_cmi_estimate(gpm, VarSet::of({0}), VarSet::of({1}), {}, 100000, rng);
  CHECK(std::fabs(est.value - exact) < 0.01);
  CHECK(est.std_error < 0.01);
}

TEST_CASE("gpm_cmi matches exhaustive summation on a 2x2 joint") {
  const DiscreteBayesNet net = coupled_bits();
  const BayesNetGpm gpm(net);
  const double exact = exact_cmi(net, VarSet::of({0}), VarSet::of({1}), {});
  // Direct summation over the four outcomes of [[0.4, 0.1], [0.1, 0.4]].
  const double handmade =
      2 * 0.4 * std::log(0.4 / 0.25) + 2 * 0.1 * std::log(0.1 / 0.25);
  CHECK(exact == doctest::Approx(handmade).epsilon(1e-12));
  CHECK(exact == doctest::Approx(0.19274).epsilon(1e-4));
  RandomStream rng(7);
  const double est =
      gpm_cmi(gpm, VarSet::of({0}), VarSet::of({1}), {}, 100000, rng);
  CHECK(std::fabs(est - exact) < 0.01);
}

TEST_CASE("gpm_cmi rejects malformed queries") {
  const BivariateGaussianGpm gpm(0.3);
  RandomStream rng(1);
  CHECK_THROWS_AS(gpm_cmi(gpm, VarSet::of({0}), VarSet::of({0}), {}, 10, rng),
                  OverlappingVarSetsError);
  CHECK_THROWS_AS(gpm_cmi(gpm, VarSet::of({0}), VarSet::of({1}), {}, 0, rng),
                  AccuracyError);
  CHECK_THROWS_AS(gpm_cmi(gpm, VarSet(), VarSet::of({1}), {}, 10, rng), Error);
  Values overlap{{1, Cell::real(0.0)}};
  CHECK_THROWS_AS(
      gpm_cmi(gpm, VarSet::of({0}), VarSet::of({1}), overlap, 10, rng),
      OverlappingVarSetsError);
}

TEST_CASE("gpm_cmi is deterministic and symmetric under a shared seed") {
  const BivariateGaussianGpm gpm(0.6);
  RandomStream r1(55), r2(55), r3(55);
  const double ab = gpm_cmi(gpm, VarSet::of({0}), VarSet::of({1}), {}, 500, r1);
  const double ab2 = gpm_cmi(gpm, VarSet::of({0}), VarSet::of({1}), {}, 500, r2);
  const double ba = gpm_cmi(gpm, VarSet::of({1}), VarSet::of({0}), {}, 500, r3);
  CHECK(ab == ab2);  // bit-identical rerun
  CHECK(ab == ba);   // the summand is symmetric; A union B draws jointly
}

TEST_CASE("conditional simulation tracks the conjugate mean") {
  // Conditioning shifts the gaussian mean to rho * value; the sample mean
  // over many draws must sit within 3 standard errors of it.
  const double rho = 0.7;
  const BivariateGaussianGpm gpm(rho);
  RandomStream rng(23);
  Values condition{{1, Cell::real(2.0)}};
  const long draws = 100000;
  double sum = 0.0;
  for (long i = 0; i < draws; ++i) {
    sum += gpm.simulate(VarSet::of({0}), condition, rng).at(0).real_value();
  }
  const double mean = sum / draws;
  const double se = std::sqrt((1 - rho * rho) / draws);
  CHECK(std::fabs(mean - rho * 2.0) < 3 * se);
}

TEST_CASE("simulate and logpdf agree on a discrete model") {
  // Empirical frequencies track exp(logpdf) within 4-sigma multinomial
  // bounds, conditioned and unconditioned.
  const BayesNetGpm gpm(coupled_bits());
  RandomStream rng(13);
  const long draws = 10000;
  for (const Values& condition : {Values{}, Values{{1, Cell::category(0)}}}) {
    std::vector<long> counts(2, 0);
    for (long i = 0; i < draws; ++i) {
      const Values draw = gpm.simulate(VarSet::of({0}), condition, rng);
      ++counts[static_cast<size_t>(draw.at(0).category_value())];
    }
    for (int c = 0; c < 2; ++c) {
      Values target{{0, Cell::category(c)}};
      const double p = std::exp(gpm.logpdf(target, condition));
      const double se = std::sqrt(p * (1 - p) / draws);
      CHECK(std::fabs(static_cast<double>(counts[static_cast<size_t>(c)]) /
                          draws -
                      p) < 4 * se);
    }
  }
}

TEST_CASE("logpdf over a full nominal outcome space normalizes") {
  const BayesNetGpm gpm(coupled_bits());
  double total = 0.0;
  for (int c0 = 0; c0 < 2; ++c0) {
    for (int c1 = 0; c1 < 2; ++c1) {
      Values target{{0, Cell::category(c0)}, {1, Cell::category(c1)}};
      total += std::exp(gpm.logpdf(target, {}));
    }
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("simulate with an empty query returns an empty record") {
  const BivariateGaussianGpm gpm(0.2);
  RandomStream rng(3);
  CHECK(gpm.simulate(VarSet(), {}, rng).empty());
}

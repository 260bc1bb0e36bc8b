// Apache License, Version 2.0, refer to LICENSE.txt

#include "crossmi/dpmm.hh"

#include <cmath>
#include <numeric>

#include "crossmi/mathutil.hh"
#include "doctest.h"

using namespace crossmi;

namespace {

std::shared_ptr<const Dataset> nominal_dataset(
    int categories, const std::vector<int>& cells) {
  Variable v;
  v.name = "x";
  v.type = StatType::kNominal;
  v.category_count = categories;
  std::vector<std::vector<Cell>> rows;
  for (int c : cells) {
    rows.push_back({c < 0 ? Cell::missing() : Cell::category(c)});
  }
  return std::make_shared<Dataset>(Schema({v}), std::move(rows));
}

std::shared_ptr<const Dataset> numerical_dataset(
    const std::vector<double>& values) {
  Variable v;
  v.name = "x";
  std::vector<std::vector<Cell>> rows;
  for (double x : values) rows.push_back({Cell::real(x)});
  return std::make_shared<Dataset>(Schema({v}), std::move(rows));
}

std::shared_ptr<const HyperGridSet> grids_for(const Dataset& data) {
  return std::make_shared<const HyperGridSet>(compute_hyper_grids(data));
}

constexpr double kTinyAlpha = 1e-12;

}  // namespace

TEST_CASE("cluster posterior without conditions is the CRP weight vector") {
  // Clusters sized (3, 1) with alpha = 1: weights (0.6, 0.2, 0.2).
  const auto data = nominal_dataset(2, {0, 0, 0, 1});
  DpmmState state(data, {0}, 1.0, {5, 5, 5, 9}, {NominalHypers{1.0}},
                  grids_for(*data));
  const auto cp = state.cluster_posterior({});
  REQUIRE(cp.probs.size() == 3);
  CHECK(cp.ids[0] == 5);
  CHECK(cp.ids[1] == 9);
  CHECK(cp.ids[2] == DpmmState::kFreshCluster);
  CHECK(cp.probs[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(cp.probs[1] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(cp.probs[2] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(std::accumulate(cp.probs.begin(), cp.probs.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cluster posterior with no data is all fresh") {
  Variable v;
  v.name = "x";
  auto data = std::make_shared<Dataset>(Schema({v}),
                                        std::vector<std::vector<Cell>>{});
  DpmmState state(data, {0}, 2.5, {}, {NumericalHypers{}}, grids_for(*data));
  const auto cp = state.cluster_posterior({});
  REQUIRE(cp.probs.size() == 1);
  CHECK(cp.ids[0] == DpmmState::kFreshCluster);
  CHECK(cp.probs[0] == 1.0);
}

TEST_CASE("cluster posterior weights by the dirichlet-categorical predictive") {
  // Cluster A counts (4, 0), cluster B counts (0, 4), beta = 1, alpha -> 0+,
  // condition x = 0: weights proportional to (4 * 5/6, 4 * 1/6).
  const auto data = nominal_dataset(2, {0, 0, 0, 0, 1, 1, 1, 1});
  DpmmState state(data, {0}, kTinyAlpha, {0, 0, 0, 0, 1, 1, 1, 1},
                  {NominalHypers{1.0}}, grids_for(*data));
  const auto cp = state.cluster_posterior({{0, Cell::category(0)}});
  REQUIRE(cp.probs.size() == 3);
  CHECK(cp.probs[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-9));
  CHECK(cp.probs[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
}

TEST_CASE("simulate frequencies follow the cluster predictive") {
  // One live cluster, Nominal(3) with counts (2, 0, 0), beta = 1:
  // outcome frequencies (3/5, 1/5, 1/5) within 4 sigma over 1e5 draws.
  const auto data = nominal_dataset(3, {0, 0});
  DpmmState state(data, {0}, kTinyAlpha, {0, 0}, {NominalHypers{1.0}},
                  grids_for(*data));
  RandomStream rng(19);
  const long draws = 100000;
  std::vector<long> counts(3, 0);
  for (long i = 0; i < draws; ++i) {
    const Values out = state.simulate(VarSet::of({0}), {}, rng);
    ++counts[static_cast<size_t>(out.at(0).category_value())];
  }
  const double expected[3] = {0.6, 0.2, 0.2};
  for (int c = 0; c < 3; ++c) {
    const double se = std::sqrt(expected[c] * (1 - expected[c]) / draws);
    CHECK(std::fabs(static_cast<double>(counts[static_cast<size_t>(c)]) / draws -
                    expected[c]) < 4 * se);
  }
}

TEST_CASE("conditioning on a far-out value still succeeds") {
  // Densities under the collapsed predictives are never exactly zero.
  const auto data = numerical_dataset({0.0, 0.1, -0.1});
  DpmmState state(data, {0}, 1.0, {0, 0, 0}, {NumericalHypers{0, 1, 1, 1}},
                  grids_for(*data));
  RandomStream rng(2);
  const Values condition{{0, Cell::real(1e6)}};
  CHECK_NOTHROW(state.cluster_posterior(condition));
  const double lp = state.logpdf({{0, Cell::real(1e6)}}, {});
  CHECK(std::isfinite(lp));
}

TEST_CASE("marginal simulation mean matches the mixture mean") {
  // Two clusters with distinct posterior means; the marginal simulate mean
  // must match sum_k w_k mean_k within 3 standard errors.
  Variable vx, vy;
  vx.name = "x";
  vy.name = "y";
  std::vector<std::vector<Cell>> rows;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({Cell::real(i < 5 ? -10.0 : 10.0), Cell::real(0.0)});
  }
  auto data = std::make_shared<Dataset>(Schema({vx, vy}), std::move(rows));
  DpmmState state(data, {0, 1}, kTinyAlpha, {0, 0, 0, 0, 0, 1, 1, 1, 1, 1},
                  {NumericalHypers{0, 1, 1, 5}, NumericalHypers{0, 1, 1, 5}},
                  grids_for(*data));

  const auto cp = state.cluster_posterior({});
  double mixture_mean = 0.0;
  double mixture_second = 0.0;
  size_t k = 0;
  for (const auto& [id, cluster] : state.clusters()) {
    const auto post = nig_posterior(
        NumericalHypers{0, 1, 1, 5},
        std::get<NumericalStats>(cluster.stats[0]));
    mixture_mean += cp.probs[k] * post.m;
    const double scale2 = post.s * (post.r + 1) / (post.nu * post.r);
    const double var = scale2 * post.nu / (post.nu - 2);
    mixture_second += cp.probs[k] * (var + post.m * post.m);
    ++k;
  }
  // Fresh-cluster weight is ~1e-13 of the mass; its contribution is
  // negligible next to the Monte Carlo error.
  RandomStream rng(31);
  const long draws = 100000;
  double sum = 0.0;
  for (long i = 0; i < draws; ++i) {
    sum += state.simulate(VarSet::of({0}), {}, rng).at(0).real_value();
  }
  const double mean = sum / draws;
  const double se =
      std::sqrt((mixture_second - mixture_mean * mixture_mean) / draws);
  CHECK(std::fabs(mean - mixture_mean) < 3 * se);
}

TEST_CASE("logpdf reduces to the single-cluster predictive when K = 1") {
  const auto data = numerical_dataset({1.0, 2.0, 3.0});
  const NumericalHypers hypers{0, 1, 1, 1};
  DpmmState state(data, {0}, kTinyAlpha, {4, 4, 4}, {hypers},
                  grids_for(*data));
  NumericalStats stats;
  for (double x : {1.0, 2.0, 3.0}) stats.add(x);
  const double target = 1.7;
  CHECK(state.logpdf({{0, Cell::real(target)}}, {}) ==
        doctest::Approx(nig_predictive_logp(hypers, stats, target))
            .epsilon(1e-9));
}

TEST_CASE("logpdf obeys the chain rule over the cluster variable") {
  Variable vx, vy;
  vx.name = "x";
  vy.name = "y";
  std::vector<std::vector<Cell>> rows;
  const double xs[] = {0.1, 0.4, 5.2, 6.0, -3.0, 2.2};
  const double ys[] = {1.0, 0.8, -2.0, -2.5, 0.3, 0.0};
  for (int i = 0; i < 6; ++i) {
    rows.push_back({Cell::real(xs[i]), Cell::real(ys[i])});
  }
  auto data = std::make_shared<Dataset>(Schema({vx, vy}), std::move(rows));
  DpmmState state(data, {0, 1}, 0.7, {0, 0, 1, 1, 2, 2},
                  {NumericalHypers{0, 1, 2, 3}, NumericalHypers{1, 2, 1, 4}},
                  grids_for(*data));
  const Values xa{{0, Cell::real(0.33)}};
  const Values xb{{1, Cell::real(-1.4)}};
  Values both = xa;
  both.insert(xb.begin(), xb.end());
  const double joint = state.logpdf(both, {});
  const double chained = state.logpdf(xa, {}) + state.logpdf(xb, xa);
  CHECK(joint == doctest::Approx(chained).epsilon(1e-9));
}

TEST_CASE("logpdf matches a hand-summed two-cluster nominal mixture") {
  // Equal-weight clusters with counts (3,0) and (0,3), beta = 1, alpha -> 0:
  // p(x=0) = 0.5 * 4/5 + 0.5 * 1/5 = 0.5.
  const auto data = nominal_dataset(2, {0, 0, 0, 1, 1, 1});
  DpmmState state(data, {0}, kTinyAlpha, {0, 0, 0, 1, 1, 1},
                  {NominalHypers{1.0}}, grids_for(*data));
  const double p0 = std::exp(state.logpdf({{0, Cell::category(0)}}, {}));
  // Fresh-cluster term adds alpha/(6+alpha) * 1/2, which cancels exactly in
  // this symmetric case.
  CHECK(p0 == doctest::Approx(0.5).epsilon(1e-12));
  const double p1 = std::exp(state.logpdf({{0, Cell::category(1)}}, {}));
  CHECK(p0 + p1 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("logpdf is invariant to cluster relabeling") {
  const auto data = numerical_dataset({0.0, 0.5, 8.0, 9.0});
  const std::vector<Hypers> hypers{NumericalHypers{0, 1, 1, 1}};
  DpmmState a(data, {0}, 1.0, {0, 0, 1, 1}, hypers, grids_for(*data));
  DpmmState b(data, {0}, 1.0, {17, 17, 3, 3}, hypers, grids_for(*data));
  const Values target{{0, Cell::real(4.2)}};
  CHECK(a.logpdf(target, {}) ==
        doctest::Approx(b.logpdf(target, {})).epsilon(1e-12));
}

TEST_CASE("missing cells contribute no likelihood factor") {
  // y is missing in half the rows; queries over x are identical to a model
  // without y at all, and y's per-cluster observed counts stay below n_k.
  Variable vx, vy;
  vx.name = "x";
  vy.name = "y";
  vy.type = StatType::kNominal;
  vy.category_count = 2;
  std::vector<std::vector<Cell>> rows_xy, rows_x;
  const double xs[] = {0.0, 1.0, 2.0, 3.0};
  for (int i = 0; i < 4; ++i) {
    rows_xy.push_back(
        {Cell::real(xs[i]), i % 2 ? Cell::category(0) : Cell::missing()});
    rows_x.push_back({Cell::real(xs[i])});
  }
  auto data_xy =
      std::make_shared<Dataset>(Schema({vx, vy}), std::move(rows_xy));
  auto data_x = std::make_shared<Dataset>(Schema({vx}), std::move(rows_x));
  const NumericalHypers hx{0, 1, 1, 1};
  DpmmState with_y(data_xy, {0, 1}, 1.0, {0, 0, 1, 1},
                   {hx, NominalHypers{1.0}}, grids_for(*data_xy));
  DpmmState without_y(data_x, {0}, 1.0, {0, 0, 1, 1}, {hx},
                      grids_for(*data_x));
  const Values target{{0, Cell::real(1.5)}};
  CHECK(with_y.logpdf(target, {}) == without_y.logpdf(target, {}));
  for (const auto& [id, cluster] : with_y.clusters()) {
    CHECK(stats_count(cluster.stats[1]) <= cluster.count);
  }
}

TEST_CASE("a single row always lands in a singleton cluster") {
  const auto data = numerical_dataset({3.3});
  DpmmState state(data, {0}, 1.0, {0}, {NumericalHypers{0, 1, 1, 1}},
                  grids_for(*data));
  RandomStream rng(5);
  for (int sweep = 0; sweep < 5; ++sweep) state.gibbs_sweep_rows(rng);
  CHECK(state.clusters().size() == 1);
  CHECK(state.clusters().begin()->second.count == 1);
  // Ids are never reused, so five sweeps consumed five fresh ids.
  CHECK(state.assignments()[0] == 5);
}

TEST_CASE("incremental statistics equal a from-scratch rebuild after sweeps") {
  RandomStream data_rng(77);
  std::vector<double> xs;
  std::vector<int> ks;
  for (int i = 0; i < 40; ++i) {
    xs.push_back(data_rng.normal(i % 2 ? 5 : -5, 1.0));
    ks.push_back(i % 3 == 0 ? -1 : i % 2);  // a third of the cells missing
  }
  Variable vx, vk;
  vx.name = "x";
  vk.name = "k";
  vk.type = StatType::kNominal;
  vk.category_count = 2;
  std::vector<std::vector<Cell>> rows;
  for (size_t i = 0; i < xs.size(); ++i) {
    rows.push_back({Cell::real(xs[i]),
                    ks[i] < 0 ? Cell::missing() : Cell::category(ks[i])});
  }
  auto data = std::make_shared<Dataset>(Schema({vx, vk}), std::move(rows));
  auto grids = grids_for(*data);
  RandomStream rng(123);
  DpmmState state = DpmmState::from_prior(data, {0, 1}, grids, rng);
  for (int sweep = 0; sweep < 20; ++sweep) {
    state.gibbs_sweep_rows(rng);
    state.infer_hypers(rng);
  }
  const auto rebuilt = state.rebuild_clusters();
  REQUIRE(rebuilt.size() == state.clusters().size());
  int64_t total = 0;
  for (const auto& [id, cluster] : state.clusters()) {
    const Cluster& fresh = rebuilt.at(id);
    CHECK(fresh.count == cluster.count);
    total += cluster.count;
    const auto& inc_x = std::get<NumericalStats>(cluster.stats[0]);
    const auto& new_x = std::get<NumericalStats>(fresh.stats[0]);
    CHECK(inc_x.n == new_x.n);
    CHECK(inc_x.sum ==
          doctest::Approx(new_x.sum).epsilon(1e-8));
    CHECK(inc_x.sum_sq == doctest::Approx(new_x.sum_sq).epsilon(1e-8));
    CHECK(std::get<NominalStats>(cluster.stats[1]).counts ==
          std::get<NominalStats>(fresh.stats[1]).counts);
  }
  CHECK(total == 40);
}

TEST_CASE("two separated blobs are recovered exactly") {
  // +-100, sigma = 1, 50 rows each; 50 sweeps of rows followed by
  // hyperinference; adjusted Rand index 1.0 on at least 4 of 5 seeds.
  int recovered = 0;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    RandomStream rng(900 + seed);
    std::vector<double> xs;
    std::vector<long> truth;
    for (int i = 0; i < 50; ++i) {
      xs.push_back(rng.normal(-100, 1));
      truth.push_back(0);
    }
    for (int i = 0; i < 50; ++i) {
      xs.push_back(rng.normal(100, 1));
      truth.push_back(1);
    }
    auto data = numerical_dataset(xs);
    auto grids = grids_for(*data);
    DpmmState state = DpmmState::from_prior(data, {0}, grids, rng);
    for (int sweep = 0; sweep < 50; ++sweep) {
      state.gibbs_sweep_rows(rng);
      state.infer_hypers(rng);
    }
    const std::vector<long> assignment(state.assignments().begin(),
                                       state.assignments().end());
    if (adjusted_rand_index(assignment, truth) == 1.0) ++recovered;
  }
  CHECK(recovered >= 4);
}

TEST_CASE("alpha inference shifts mass toward small values when K = 1") {
  // All data in one cluster with large N: the CRP marginal likelihood
  // favors small alpha relative to the prior grid mean.
  std::vector<double> xs(200, 0.0);
  for (size_t i = 0; i < xs.size(); ++i) xs[i] = 0.01 * static_cast<double>(i);
  const auto data = numerical_dataset(xs);
  auto grids = grids_for(*data);
  std::vector<int64_t> one_cluster(xs.size(), 0);
  RandomStream rng(8);
  double prior_mean = 0.0, posterior_mean = 0.0;
  const int reps = 400;
  for (int rep = 0; rep < reps; ++rep) {
    // Prior draw: griddy weights with no clusters.
    Variable v;
    v.name = "x";
    auto empty = std::make_shared<Dataset>(Schema({v}),
                                           std::vector<std::vector<Cell>>{});
    DpmmState prior_state(empty, {0}, 1.0, {}, {NumericalHypers{}},
                          grids_for(*empty));
    prior_state.infer_hypers(rng);
    prior_mean += prior_state.alpha();

    DpmmState state(data, {0}, 1.0, one_cluster, {NumericalHypers{0, 1, 1, 1}},
                    grids);
    state.infer_hypers(rng);
    posterior_mean += state.alpha();
  }
  prior_mean /= reps;
  posterior_mean /= reps;
  CHECK(posterior_mean < 0.5 * prior_mean);
}

TEST_CASE("hyper inference is deterministic under a fixed seed") {
  const auto data = numerical_dataset({1, 2, 3, 4, 5, 6});
  auto grids = grids_for(*data);
  DpmmState a(data, {0}, 1.0, {0, 0, 0, 1, 1, 1},
              {NumericalHypers{0, 1, 1, 1}}, grids);
  DpmmState b = a;
  RandomStream r1(44), r2(44);
  a.infer_hypers(r1);
  b.infer_hypers(r2);
  CHECK(a.alpha() == b.alpha());
  CHECK(std::get<NumericalHypers>(a.hypers_for(0)).m ==
        std::get<NumericalHypers>(b.hypers_for(0)).m);
  CHECK(std::get<NumericalHypers>(a.hypers_for(0)).s ==
        std::get<NumericalHypers>(b.hypers_for(0)).s);
}

TEST_CASE("geweke: gibbs row kernel preserves the prior-data joint") {
  // Forward samples of (K, max cluster size) from the prior versus samples
  // from the successive-conditional chain (sweep z | x, then redraw x | z).
  // Pooled over 3 seeds; two-sample KS must not reject.
  const double alpha = 1.0;
  const NumericalHypers hypers{0, 1, 1, 1};
  const int n = 15;
  const int m_samples = 1500;
  std::vector<double> forward_k, forward_max, chain_k, chain_max;

  const auto crp_draw = [&](RandomStream& rng) {
    std::vector<int64_t> z(n);
    std::vector<double> sizes;
    for (int i = 0; i < n; ++i) {
      std::vector<double> w = sizes;
      w.push_back(alpha);
      const size_t k = rng.categorical(w);
      if (k == sizes.size()) sizes.push_back(0);
      sizes[k] += 1;
      z[static_cast<size_t>(i)] = static_cast<int64_t>(k);
    }
    return z;
  };
  const auto stats_of = [&](const std::vector<int64_t>& z) {
    std::map<int64_t, long> sizes;
    for (int64_t id : z) ++sizes[id];
    long max_size = 0;
    for (const auto& [id, s] : sizes) max_size = std::max(max_size, s);
    return std::pair<double, double>(static_cast<double>(sizes.size()),
                                     static_cast<double>(max_size));
  };
  const auto draw_data = [&](const std::vector<int64_t>& z,
                             RandomStream& rng) {
    std::map<int64_t, std::pair<double, double>> params;
    std::vector<double> xs(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      auto it = params.find(z[static_cast<size_t>(i)]);
      if (it == params.end()) {
        const double sigma2 = (0.5 * hypers.s) / rng.gamma(0.5 * hypers.nu);
        const double mu = rng.normal(hypers.m, std::sqrt(sigma2 / hypers.r));
        it = params.emplace(z[static_cast<size_t>(i)],
                            std::make_pair(mu, sigma2)).first;
      }
      xs[static_cast<size_t>(i)] =
          rng.normal(it->second.first, std::sqrt(it->second.second));
    }
    return xs;
  };

  for (uint64_t seed = 0; seed < 3; ++seed) {
    RandomStream rng(3000 + seed);
    for (int s = 0; s < m_samples; ++s) {
      const auto [k, mx] = stats_of(crp_draw(rng));
      forward_k.push_back(k);
      forward_max.push_back(mx);
    }
    // Successive-conditional chain, thinned by 3.
    std::vector<int64_t> z = crp_draw(rng);
    std::vector<double> xs = draw_data(z, rng);
    for (int s = 0; s < m_samples; ++s) {
      for (int thin = 0; thin < 3; ++thin) {
        auto data = numerical_dataset(xs);
        DpmmState state(data, {0}, alpha, z, {hypers}, grids_for(*data));
        state.gibbs_sweep_rows(rng);
        z = state.assignments();
        xs = draw_data(z, rng);
      }
      const auto [k, mx] = stats_of(z);
      chain_k.push_back(k);
      chain_max.push_back(mx);
    }
  }
  CHECK(ks_two_sample(forward_k, chain_k).p_value > 0.01);
  CHECK(ks_two_sample(forward_max, chain_max).p_value > 0.01);
}

TEST_CASE("variable membership operations keep the model consistent") {
  Variable vx, vy;
  vx.name = "x";
  vy.name = "y";
  std::vector<std::vector<Cell>> rows;
  for (int i = 0; i < 8; ++i) {
    rows.push_back({Cell::real(i), Cell::real(-i)});
  }
  auto data = std::make_shared<Dataset>(Schema({vx, vy}), std::move(rows));
  auto grids = grids_for(*data);
  DpmmState state(data, {0}, 1.0, {0, 0, 0, 0, 1, 1, 1, 1},
                  {NumericalHypers{0, 1, 1, 1}}, grids);
  const double col_ml = state.column_logp(1, NumericalHypers{0, 1, 1, 2});
  state.add_variable(1, NumericalHypers{0, 1, 1, 2});
  CHECK(state.variables() == std::vector<int>{0, 1});
  // Adding then removing restores the original shape.
  const Hypers removed = state.remove_variable(1);
  CHECK(std::get<NumericalHypers>(removed).nu == 2);
  CHECK(state.variables() == std::vector<int>{0});
  // column_logp equals the sum of per-cluster marginal likelihoods computed
  // directly.
  NumericalStats c0, c1;
  for (int i = 0; i < 4; ++i) c0.add(-i);
  for (int i = 4; i < 8; ++i) c1.add(-i);
  const NumericalHypers h{0, 1, 1, 2};
  CHECK(col_ml == doctest::Approx(nig_marginal_logp(h, c0) +
                                  nig_marginal_logp(h, c1)).epsilon(1e-12));
}

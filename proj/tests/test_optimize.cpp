#include <doctest.h>

#include <cmath>

#include "cltr/optimize.hpp"
#include "cltr/simulation.hpp"

using namespace cltr;

TEST_CASE("sgd step is w - eta * g") {
  Optimizer opt(OptimizerKind::Sgd, 0.1, 1);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd g = Eigen::VectorXd::Constant(1, 2.0);
  opt.step(w, g);
  CHECK(w[0] == doctest::Approx(-0.2));
  opt.step(w, g);
  CHECK(w[0] == doctest::Approx(-0.4));
  opt.step(w, Eigen::VectorXd::Zero(1));
  CHECK(w[0] == doctest::Approx(-0.4));
  CHECK_THROWS_AS(opt.step(w, Eigen::VectorXd::Constant(1, std::nan(""))),
                  std::invalid_argument);
}

TEST_CASE("adam first step with unit gradient") {
  Optimizer opt(OptimizerKind::Adam, 0.5, 1);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(1);
  opt.step(w, Eigen::VectorXd::Ones(1));
  // m_hat = 1, v_hat = 1 after bias correction
  CHECK(w[0] == doctest::Approx(-0.5 / (1.0 + 1e-8)).epsilon(1e-12));

  Optimizer opt2(OptimizerKind::Adam, 0.5, 1);
  Eigen::VectorXd w2 = Eigen::VectorXd::Zero(1);
  opt2.step(w2, Eigen::VectorXd::Zero(1));
  CHECK(w2[0] == 0.0);
}

TEST_CASE("adagrad accumulates squared gradients") {
  Optimizer opt(OptimizerKind::Adagrad, 1.0, 1);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(1);
  opt.step(w, Eigen::VectorXd::Ones(1));
  const double d1 = 1.0 / (1.0 + 1e-8);
  CHECK(w[0] == doctest::Approx(-d1).epsilon(1e-12));
  opt.step(w, Eigen::VectorXd::Ones(1));
  CHECK(w[0] == doctest::Approx(-d1 - 1.0 / (std::sqrt(2.0) + 1e-8)).epsilon(1e-12));

  Optimizer opt2(OptimizerKind::Adagrad, 1.0, 1);
  Eigen::VectorXd w2 = Eigen::VectorXd::Zero(1);
  opt2.step(w2, Eigen::VectorXd::Zero(1));
  CHECK(w2[0] == 0.0);
}

namespace {

struct Fixture {
  Dataset ds;
  LinearModel policy;
  ClickLog log;

  explicit Fixture(double gamma = 1.0, std::int64_t n_clicks = 2000) {
    ds = generate_synthetic_ltr(20, 15, 5, 7);
    SupervisedConfig sup;
    sup.eta = 0.01;
    sup.iterations = 2000;
    policy = train_logging_policy(ds, 0.1, 3, sup);
    BiasConfig bias;
    bias.gamma = gamma;
    bias.n_clicks = n_clicks;
    log = simulate_clicks(ds, policy, bias, 11);
  }
};

}  // namespace

TEST_CASE("training is deterministic and checkpoints are well formed") {
  Fixture fx;
  TrainConfig cfg;
  cfg.method = Method::CounterSample;
  cfg.eta = 0.01;
  cfg.iterations = 200;
  cfg.eval_every = 50;
  cfg.seed = 5;
  TrainResult a = train(fx.log, fx.ds, cfg);
  TrainResult b = train(fx.log, fx.ds, cfg);
  CHECK(a.averaged_weights == b.averaged_weights);
  REQUIRE(a.checkpoints.size() == 4);
  CHECK(a.checkpoints.back().t == 200);
  for (std::size_t i = 1; i < a.checkpoints.size(); ++i)
    CHECK(a.checkpoints[i].t > a.checkpoints[i - 1].t);
  CHECK_THROWS_AS(
      [&] {
        TrainConfig bad = cfg;
        bad.iterations = 0;
        train(fx.log, fx.ds, bad);
      }(),
      std::invalid_argument);
}

TEST_CASE("single-entry log makes IPS-SGD and CounterSample coincide") {
  Fixture fx;
  ClickLog single;
  single.gamma = fx.log.gamma;
  single.entries.push_back(fx.log.entries.front());
  TrainConfig cfg;
  cfg.eta = 0.005;
  cfg.iterations = 50;
  cfg.eval_every = 50;
  cfg.seed = 1;
  cfg.method = Method::IpsSgd;
  TrainResult ips = train(single, fx.ds, cfg);
  cfg.method = Method::CounterSample;
  TrainResult cs = train(single, fx.ds, cfg);
  CHECK((ips.averaged_weights - cs.averaged_weights).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("averaged iterate equals the mean of stored iterates") {
  Fixture fx;
  TrainConfig cfg;
  cfg.method = Method::IpsSgd;
  cfg.eta = 0.001;
  cfg.iterations = 300;
  cfg.eval_every = 300;
  cfg.seed = 2;
  TrainResult r = train(fx.log, fx.ds, cfg);

  // replay the run, accumulating iterates directly
  Rng rng(cfg.seed);
  Optimizer opt(OptimizerKind::Sgd, cfg.eta, fx.ds.dim);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(fx.ds.dim);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(fx.ds.dim);
  const int n = static_cast<int>(fx.log.entries.size());
  for (int t = 1; t <= cfg.iterations; ++t) {
    const int i = rng.next_index(n);
    const auto& e = fx.log.entries[i];
    Eigen::VectorXd g = grad_f(w, fx.ds.train[e.query], e.doc,
                               RankWeighting::Identity) /
                        e.propensity;
    opt.step(w, g);
    sum += w;
  }
  Eigen::VectorXd direct_mean = sum / static_cast<double>(cfg.iterations);
  CHECK((direct_mean - r.averaged_weights).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("per-step gradient norms respect the theory bounds") {
  Fixture fx(1.5);
  const LogStats stats = log_stats(fx.log);
  for (Method method : {Method::IpsSgd, Method::CounterSample}) {
    const double m_eff = method == Method::IpsSgd ? stats.m : stats.m_bar;
    Rng rng(9);
    AliasTable table = build_alias(ips_distribution(fx.log));
    Eigen::VectorXd w = Eigen::VectorXd::Zero(fx.ds.dim);
    const int n = static_cast<int>(fx.log.entries.size());
    for (int t = 1; t <= 100; ++t) {
      int i;
      double scale;
      if (method == Method::IpsSgd) {
        i = rng.next_index(n);
        scale = 1.0 / fx.log.entries[i].propensity;
      } else {
        i = draw(table, rng);
        scale = stats.m_bar;
      }
      const auto& e = fx.log.entries[i];
      Eigen::VectorXd raw =
          grad_f(w, fx.ds.train[e.query], e.doc, RankWeighting::Identity);
      // empirical per-step max of the unweighted gradient norm stands in for G
      double max_raw = 0.0;
      for (const auto& e2 : fx.log.entries)
        max_raw = std::max(max_raw, grad_f(w, fx.ds.train[e2.query], e2.doc,
                                           RankWeighting::Identity)
                                        .norm());
      CHECK((scale * raw).norm() <= m_eff * max_raw + 1e-9);
      w -= 0.001 * scale * raw;
    }
  }
}

TEST_CASE("divergent runs are flagged and contain finite checkpoints") {
  Fixture fx(1.5);
  TrainConfig cfg;
  cfg.method = Method::IpsSgd;
  cfg.eta = 1e14;  // first step already exceeds the weight-norm guard
  cfg.iterations = 500;
  cfg.eval_every = 10;
  cfg.seed = 1;
  TrainResult r = train(fx.log, fx.ds, cfg, 0.9);
  CHECK(r.diverged);
  CHECK(r.diverged_at >= 1);
  CHECK(r.regret == 0.9);  // worst case
  for (const auto& c : r.checkpoints) {
    CHECK(std::isfinite(c.ndcg_valid));
    CHECK(std::isfinite(c.ndcg_test));
  }
}

TEST_CASE("regret helper") {
  CHECK(regret({{100, 0.8}}, 0.8) == doctest::Approx(0.0));
  CHECK(regret({{100, 0.7}}, 0.8) == doctest::Approx(0.1));
  // dense checkpoints reproduce the exact sum
  std::vector<std::pair<std::int64_t, double>> dense;
  double exact = 0.0;
  for (int t = 1; t <= 10; ++t) {
    const double nd = 0.5 + 0.03 * t;
    dense.emplace_back(t, nd);
    exact += 0.9 - nd;
  }
  exact /= 10.0;
  CHECK(regret(dense, 0.9) == doctest::Approx(exact).epsilon(1e-12));
  CHECK_THROWS_AS(regret({}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(regret({{1, 0.5}}, 1.5), std::invalid_argument);
}

TEST_CASE("train_supervised learns to put the relevant doc first") {
  Query q;
  q.id = "0";
  q.features = (Eigen::MatrixXd(2, 2) << 1.0, 0.0, 0.0, 1.0).finished();
  q.grades = (Eigen::VectorXi(2) << 4, 0).finished();
  SupervisedConfig cfg;
  cfg.eta = 0.1;
  cfg.iterations = 500;
  LinearModel w = train_supervised({q}, cfg, 1);
  CHECK(rank_of(w, q, 0) == 1);

  SUBCASE("degenerate: all docs relevant with equal features") {
    Query deg;
    deg.id = "d";
    deg.features = Eigen::MatrixXd::Ones(3, 2);
    deg.grades = Eigen::VectorXi::Constant(3, 4);
    LinearModel wd = train_supervised({deg}, cfg, 1);
    CHECK(wd.allFinite());
  }
  SUBCASE("no relevant documents anywhere") {
    Query none;
    none.id = "n";
    none.features = Eigen::MatrixXd::Ones(2, 2);
    none.grades = Eigen::VectorXi::Zero(2);
    CHECK_THROWS_AS(train_supervised({none}, cfg, 1), std::invalid_argument);
  }
}

TEST_CASE("gold model beats the logging policy on synthetic test data") {
  Fixture fx;
  SupervisedConfig cfg;
  cfg.eta = 0.01;
  cfg.iterations = 20000;
  LinearModel gold = train_supervised(fx.ds.train, cfg, 1);
  CHECK(ndcg_at_k(gold, fx.ds.test) >= ndcg_at_k(fx.policy, fx.ds.test));
}

TEST_CASE("default eta grid matches the tuning protocol") {
  auto grid = default_eta_grid();
  CHECK(grid.size() == 22);
  CHECK(grid.front() == doctest::Approx(1e-10));
  CHECK(grid[1] == doctest::Approx(3e-10));
  CHECK(grid[grid.size() - 2] == doctest::Approx(1.0));
  CHECK(grid.back() == doctest::Approx(3.0));
}

TEST_CASE("grid search returns the single grid value and reruns match") {
  Fixture fx;
  TrainConfig cfg;
  cfg.method = Method::CounterSample;
  cfg.iterations = 100;
  cfg.eval_every = 25;
  cfg.seed = 4;
  auto result = grid_search_eta(fx.log, fx.ds, cfg, 0.8, {0.01});
  CHECK(result.best_eta == 0.01);
  REQUIRE(result.regrets.size() == 1);
  cfg.eta = 0.01;
  TrainResult rerun = train(fx.log, fx.ds, cfg, 0.8);
  CHECK(rerun.regret == doctest::Approx(result.regrets[0].second).epsilon(1e-12));
  CHECK_THROWS_AS(grid_search_eta(fx.log, fx.ds, cfg, 0.8, {}),
                  std::invalid_argument);
}

TEST_CASE("theory helpers reproduce hand arithmetic") {
  TheoryParams p{1.0, 1.0, 1.0, 1.0, 1.0};
  CHECK(required_iterations(p, Method::IpsSgd) == doctest::Approx(1.0));
  CHECK(theoretical_eta(p, 1.0, Method::IpsSgd) == doctest::Approx(1.0));

  p = {1.0, 1.0, 4.0, 3.0, 1.0};
  CHECK(required_iterations(p, Method::IpsSgd) == doctest::Approx(16.0));
  CHECK(required_iterations(p, Method::CounterSample) == doctest::Approx(9.0));

  p.epsilon = 2.0;
  CHECK(required_iterations(p, Method::IpsSgd) == doctest::Approx(4.0));

  p = {1.0, 1.0, 1.0, 1.0, 1.0};
  CHECK(theoretical_eta(p, 4.0, Method::IpsSgd) ==
        doctest::Approx(0.5 * theoretical_eta(p, 1.0, Method::IpsSgd)));
  CHECK_THROWS_AS(required_iterations(TheoryParams{0, 1, 1, 1, 1}, Method::IpsSgd),
                  std::invalid_argument);
  CHECK_THROWS_AS(required_iterations(p, Method::Biased), std::invalid_argument);
}

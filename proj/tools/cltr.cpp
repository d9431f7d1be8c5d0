// Experiment runner: simulate biased click logs from LTR data and train
// linear rankers with Biased-SGD, IPS-SGD, and CounterSample.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cltr/dataset.hpp"
#include "cltr/optimize.hpp"
#include "cltr/simulation.hpp"
#include "cltr/toy.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitAllDivergent = 3;

std::string fmt_double(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string gamma_tag(double gamma) { return fmt_double(gamma, "%g"); }

struct AppConfig {
  // data
  bool use_synthetic = true;
  int syn_queries = 200;
  int syn_docs = 50;
  int syn_dim = 20;
  std::uint64_t syn_seed = 1;
  std::string svm_train, svm_validation, svm_test;
  int svm_dim = 0;  // 0 -> infer
  bool standardize = false;
  // bias
  std::vector<double> gammas{1.0};
  std::int64_t n_clicks = 1000000;
  double noise_click_prob = 0.1;
  // logging policy / gold
  double policy_fraction = 0.001;
  std::int64_t policy_iterations = 100000;
  std::optional<double> policy_eta;
  std::int64_t gold_iterations = 100000;
  std::optional<double> gold_eta;
  // training sweep
  std::vector<std::string> methods{"CounterSample", "IPS-SGD", "Biased-SGD"};
  std::vector<std::string> optimizers{"SGD"};
  std::vector<int> batch_sizes{1};
  std::int64_t iterations = 50000;
  std::int64_t eval_every = 0;
  std::optional<double> eta;  // unset -> grid search
  // run
  std::vector<std::uint64_t> seeds{1};
  int workers = 1;
  std::string out = "out";
};

json config_to_json(const AppConfig& c) {
  json data;
  if (c.use_synthetic) {
    data["synthetic"] = {{"n_queries", c.syn_queries},
                         {"docs_per_query", c.syn_docs},
                         {"dim", c.syn_dim},
                         {"seed", c.syn_seed}};
  } else {
    data["svmlight"] = {{"train", c.svm_train},
                        {"validation", c.svm_validation},
                        {"test", c.svm_test},
                        {"dim", c.svm_dim}};
  }
  data["standardize"] = c.standardize;
  json j;
  j["data"] = data;
  j["bias"] = {{"gammas", c.gammas},
               {"n_clicks", c.n_clicks},
               {"noise_click_prob", c.noise_click_prob}};
  json policy = {{"fraction", c.policy_fraction},
                 {"iterations", c.policy_iterations}};
  if (c.policy_eta) policy["eta"] = *c.policy_eta;
  j["logging_policy"] = policy;
  json gold = {{"iterations", c.gold_iterations}};
  if (c.gold_eta) gold["eta"] = *c.gold_eta;
  j["gold"] = gold;
  json train = {{"methods", c.methods},
                {"optimizers", c.optimizers},
                {"batch_sizes", c.batch_sizes},
                {"iterations", c.iterations},
                {"eval_every", c.eval_every}};
  if (c.eta)
    train["eta"] = *c.eta;
  else
    train["eta"] = "grid";
  j["train"] = train;
  j["seeds"] = c.seeds;
  j["workers"] = c.workers;
  j["out"] = c.out;
  return j;
}

void load_config_file(const std::string& path, AppConfig& c) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw CLI::ValidationError("--config", e.what());
  }
  if (j.contains("data")) {
    const auto& d = j["data"];
    if (d.contains("synthetic")) {
      c.use_synthetic = true;
      const auto& s = d["synthetic"];
      c.syn_queries = s.value("n_queries", c.syn_queries);
      c.syn_docs = s.value("docs_per_query", c.syn_docs);
      c.syn_dim = s.value("dim", c.syn_dim);
      c.syn_seed = s.value("seed", c.syn_seed);
    } else if (d.contains("svmlight")) {
      c.use_synthetic = false;
      const auto& s = d["svmlight"];
      c.svm_train = s.value("train", std::string());
      c.svm_validation = s.value("validation", std::string());
      c.svm_test = s.value("test", std::string());
      c.svm_dim = s.value("dim", 0);
    }
    c.standardize = d.value("standardize", c.standardize);
  }
  if (j.contains("bias")) {
    const auto& b = j["bias"];
    if (b.contains("gammas")) c.gammas = b["gammas"].get<std::vector<double>>();
    c.n_clicks = b.value("n_clicks", c.n_clicks);
    c.noise_click_prob = b.value("noise_click_prob", c.noise_click_prob);
  }
  if (j.contains("logging_policy")) {
    const auto& p = j["logging_policy"];
    c.policy_fraction = p.value("fraction", c.policy_fraction);
    c.policy_iterations = p.value("iterations", c.policy_iterations);
    if (p.contains("eta") && !p["eta"].is_null())
      c.policy_eta = p["eta"].get<double>();
  }
  if (j.contains("gold")) {
    const auto& g = j["gold"];
    c.gold_iterations = g.value("iterations", c.gold_iterations);
    if (g.contains("eta") && !g["eta"].is_null())
      c.gold_eta = g["eta"].get<double>();
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    if (t.contains("methods"))
      c.methods = t["methods"].get<std::vector<std::string>>();
    if (t.contains("optimizers"))
      c.optimizers = t["optimizers"].get<std::vector<std::string>>();
    if (t.contains("batch_sizes"))
      c.batch_sizes = t["batch_sizes"].get<std::vector<int>>();
    c.iterations = t.value("iterations", c.iterations);
    c.eval_every = t.value("eval_every", c.eval_every);
    if (t.contains("eta") && t["eta"].is_number())
      c.eta = t["eta"].get<double>();
  }
  if (j.contains("seeds"))
    c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("workers")) c.workers = j["workers"].get<int>();
  if (j.contains("out")) c.out = j["out"].get<std::string>();
}

cltr::Dataset load_dataset(const AppConfig& c) {
  cltr::Dataset ds;
  if (c.use_synthetic) {
    ds = cltr::generate_synthetic_ltr(c.syn_queries, c.syn_docs, c.syn_dim,
                                      c.syn_seed);
  } else {
    std::optional<int> dim_override;
    if (c.svm_dim > 0) dim_override = c.svm_dim;
    // dim is shared across splits; infer from the train file when not given
    auto load = [&](const std::string& path, int* dim_out) {
      std::ifstream in(path);
      if (!in) throw std::runtime_error("cannot open dataset file " + path);
      return cltr::parse_svmlight(in, dim_override, dim_out);
    };
    ds.train = load(c.svm_train, &ds.dim);
    if (dim_override == std::nullopt) dim_override = ds.dim;
    if (!c.svm_validation.empty()) ds.validation = load(c.svm_validation, nullptr);
    if (!c.svm_test.empty()) ds.test = load(c.svm_test, nullptr);
  }
  return ds;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void echo_config(const AppConfig& c) {
  fs::create_directories(c.out);
  write_file(fs::path(c.out) / "config.json", config_to_json(c).dump(2) + "\n");
}

cltr::LinearModel make_policy(const AppConfig& c, const cltr::Dataset& ds) {
  cltr::SupervisedConfig cfg;
  cfg.eta = c.policy_eta;
  cfg.iterations = c.policy_iterations;
  return cltr::train_logging_policy(ds, c.policy_fraction, c.seeds.front(), cfg);
}

// Runs fn(i) for i in [0, n) on up to `workers` threads; exceptions are
// rethrown on the calling thread.
void parallel_cells(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

int cmd_simulate(const AppConfig& c) {
  echo_config(c);
  cltr::Dataset ds = cltr::standardize_features(load_dataset(c), c.standardize);
  cltr::LinearModel policy = make_policy(c, ds);

  json stats;
  stats["policy_fingerprint"] = cltr::model_fingerprint(policy);
  stats["gammas"] = json::array();
  for (double gamma : c.gammas) {
    cltr::BiasConfig bias;
    bias.gamma = gamma;
    bias.n_clicks = c.n_clicks;
    bias.noise_click_prob = c.noise_click_prob;
    cltr::ClickLog log = cltr::simulate_clicks(ds, policy, bias, c.seeds.front());
    std::ostringstream buf;
    cltr::write_click_log(buf, log);
    write_file(fs::path(c.out) / ("clicks_gamma" + gamma_tag(gamma) + ".jsonl"),
               buf.str());
    const cltr::LogStats s = cltr::log_stats(log);
    stats["gammas"].push_back(
        {{"gamma", gamma}, {"M", s.m}, {"M_bar", s.m_bar}, {"n", log.entries.size()}});
    std::cout << "gamma=" << gamma_tag(gamma) << " M=" << s.m
              << " M_bar=" << s.m_bar << "\n";
  }
  write_file(fs::path(c.out) / "stats.json", stats.dump(2) + "\n");
  return 0;
}

struct Cell {
  cltr::Method method;
  cltr::OptimizerKind optimizer;
  int batch_size;
  double gamma;
  std::uint64_t seed;
  double eta;
  // outputs
  cltr::TrainResult result;
  double regret_test = 0.0;
};

std::string cell_stem(const Cell& cell) {
  return "curve_" + cltr::to_string(cell.method) + "_" +
         cltr::to_string(cell.optimizer) + "_b" +
         std::to_string(cell.batch_size) + "_gamma" + gamma_tag(cell.gamma) +
         "_seed" + std::to_string(cell.seed);
}

int cmd_train(const AppConfig& c) {
  echo_config(c);
  cltr::Dataset ds = cltr::standardize_features(load_dataset(c), c.standardize);
  cltr::LinearModel policy = make_policy(c, ds);

  cltr::SupervisedConfig gold_cfg;
  gold_cfg.eta = c.gold_eta;
  gold_cfg.iterations = c.gold_iterations;
  cltr::LinearModel gold = cltr::train_supervised(ds.train, gold_cfg, c.seeds.front());
  const double gold_valid = cltr::ndcg_at_k(gold, ds.validation);
  const double gold_test = cltr::ndcg_at_k(gold, ds.test);
  const double policy_valid = cltr::ndcg_at_k(policy, ds.validation);
  const double policy_test = cltr::ndcg_at_k(policy, ds.test);

  std::vector<cltr::ClickLog> logs;
  for (double gamma : c.gammas) {
    cltr::BiasConfig bias;
    bias.gamma = gamma;
    bias.n_clicks = c.n_clicks;
    bias.noise_click_prob = c.noise_click_prob;
    logs.push_back(cltr::simulate_clicks(ds, policy, bias, c.seeds.front()));
  }

  // grid-tune eta per (method, optimizer, batch, gamma) with the first seed
  // unless a fixed eta was configured
  std::vector<Cell> cells;
  for (const auto& ms : c.methods) {
    for (const auto& os : c.optimizers) {
      for (int batch : c.batch_sizes) {
        for (std::size_t gi = 0; gi < c.gammas.size(); ++gi) {
          double eta;
          if (c.eta) {
            eta = *c.eta;
          } else {
            cltr::TrainConfig tc;
            tc.method = cltr::method_from_string(ms);
            tc.optimizer = cltr::optimizer_from_string(os);
            tc.batch_size = batch;
            tc.iterations = c.iterations;
            tc.eval_every = c.eval_every;
            tc.seed = c.seeds.front();
            auto grid = cltr::grid_search_eta(logs[gi], ds, tc, gold_valid,
                                              cltr::default_eta_grid());
            if (grid.all_divergent)
              throw std::runtime_error("all grid runs diverged for " + ms + "/" + os);
            eta = grid.best_eta;
          }
          for (std::uint64_t seed : c.seeds) {
            Cell cell;
            cell.method = cltr::method_from_string(ms);
            cell.optimizer = cltr::optimizer_from_string(os);
            cell.batch_size = batch;
            cell.gamma = c.gammas[gi];
            cell.seed = seed;
            cell.eta = eta;
            cells.push_back(cell);
          }
        }
      }
    }
  }

  auto log_for_gamma = [&](double gamma) -> const cltr::ClickLog& {
    for (std::size_t i = 0; i < c.gammas.size(); ++i)
      if (c.gammas[i] == gamma) return logs[i];
    throw std::logic_error("gamma not simulated");
  };

  parallel_cells(static_cast<int>(cells.size()), c.workers, [&](int i) {
    Cell& cell = cells[i];
    cltr::TrainConfig tc;
    tc.method = cell.method;
    tc.optimizer = cell.optimizer;
    tc.eta = cell.eta;
    tc.batch_size = cell.batch_size;
    tc.iterations = c.iterations;
    tc.eval_every = c.eval_every;
    tc.seed = cell.seed;
    cell.result = cltr::train(log_for_gamma(cell.gamma), ds, tc, gold_valid);
    if (cell.result.diverged || cell.result.checkpoints.empty()) {
      cell.regret_test = gold_test;
    } else {
      std::vector<std::pair<std::int64_t, double>> pts;
      for (const auto& cp : cell.result.checkpoints)
        pts.emplace_back(cp.t, cp.ndcg_test);
      cell.regret_test = cltr::regret(pts, gold_test);
    }
    std::ostringstream csv;
    csv << "t,ndcg_valid,ndcg_test\n";
    for (const auto& cp : cell.result.checkpoints)
      csv << cp.t << ',' << fmt_double(cp.ndcg_valid) << ','
          << fmt_double(cp.ndcg_test) << '\n';
    write_file(fs::path(c.out) / (cell_stem(cell) + ".csv"), csv.str());
  });

  json summary;
  summary["gold"] = {{"ndcg_valid", gold_valid}, {"ndcg_test", gold_test}};
  summary["logging_policy"] = {{"ndcg_valid", policy_valid},
                               {"ndcg_test", policy_test}};
  summary["cells"] = json::array();
  for (const auto& cell : cells) {
    summary["cells"].push_back(
        {{"method", cltr::to_string(cell.method)},
         {"optimizer", cltr::to_string(cell.optimizer)},
         {"batch_size", cell.batch_size},
         {"gamma", cell.gamma},
         {"seed", cell.seed},
         {"eta", cell.eta},
         {"diverged", cell.result.diverged},
         {"regret_valid_x100", 100.0 * cell.result.regret},
         {"regret_test_x100", 100.0 * cell.regret_test},
         {"curve_file", cell_stem(cell) + ".csv"}});
  }
  // mean regret over seeds per configuration, rows=methods x columns=optimizers
  summary["mean_regret_x100"] = json::array();
  for (const auto& ms : c.methods) {
    for (const auto& os : c.optimizers) {
      for (int batch : c.batch_sizes) {
        for (double gamma : c.gammas) {
          double sum_v = 0.0, sum_t = 0.0;
          int count = 0;
          for (const auto& cell : cells) {
            if (cltr::to_string(cell.method) == ms &&
                cltr::to_string(cell.optimizer) == os &&
                cell.batch_size == batch && cell.gamma == gamma) {
              sum_v += cell.result.regret;
              sum_t += cell.regret_test;
              ++count;
            }
          }
          summary["mean_regret_x100"].push_back(
              {{"method", ms},
               {"optimizer", os},
               {"batch_size", batch},
               {"gamma", gamma},
               {"regret_valid_x100", 100.0 * sum_v / count},
               {"regret_test_x100", 100.0 * sum_t / count}});
        }
      }
    }
  }
  write_file(fs::path(c.out) / "summary.json", summary.dump(2) + "\n");
  std::cout << "wrote " << cells.size() << " cells to " << c.out << "\n";
  return 0;
}

int cmd_grid(const AppConfig& c) {
  echo_config(c);
  cltr::Dataset ds = cltr::standardize_features(load_dataset(c), c.standardize);
  cltr::LinearModel policy = make_policy(c, ds);

  cltr::SupervisedConfig gold_cfg;
  gold_cfg.eta = c.gold_eta;
  gold_cfg.iterations = c.gold_iterations;
  cltr::LinearModel gold = cltr::train_supervised(ds.train, gold_cfg, c.seeds.front());
  const double gold_valid = cltr::ndcg_at_k(gold, ds.validation);

  cltr::BiasConfig bias;
  bias.gamma = c.gammas.front();
  bias.n_clicks = c.n_clicks;
  bias.noise_click_prob = c.noise_click_prob;
  cltr::ClickLog log = cltr::simulate_clicks(ds, policy, bias, c.seeds.front());

  const std::vector<double> grid =
      c.eta ? std::vector<double>{*c.eta} : cltr::default_eta_grid();

  json report;
  report["gamma"] = bias.gamma;
  report["gold_ndcg_valid"] = gold_valid;
  report["results"] = json::array();
  bool any_converged = false;
  for (const auto& ms : c.methods) {
    for (const auto& os : c.optimizers) {
      cltr::TrainConfig tc;
      tc.method = cltr::method_from_string(ms);
      tc.optimizer = cltr::optimizer_from_string(os);
      tc.batch_size = c.batch_sizes.front();
      tc.iterations = c.iterations;
      tc.eval_every = c.eval_every;
      tc.seed = c.seeds.front();
      auto result = cltr::grid_search_eta(log, ds, tc, gold_valid, grid);
      any_converged = any_converged || !result.all_divergent;
      json etas = json::array();
      for (const auto& [eta, reg] : result.regrets)
        etas.push_back({{"eta", eta}, {"regret_valid_x100", 100.0 * reg}});
      report["results"].push_back({{"method", ms},
                                   {"optimizer", os},
                                   {"best_eta", result.best_eta},
                                   {"all_divergent", result.all_divergent},
                                   {"etas", etas}});
      std::cout << ms << "/" << os << ": best eta = " << result.best_eta << "\n";
    }
  }
  write_file(fs::path(c.out) / "grid.json", report.dump(2) + "\n");
  return any_converged ? 0 : kExitAllDivergent;
}

int cmd_toy(const std::vector<double>& etas, const std::vector<std::uint64_t>& seeds,
            int iterations, std::uint64_t problem_seed, const std::string& out) {
  fs::create_directories(out);
  cltr::ToyProblem problem = cltr::generate_toy(problem_seed);
  auto trajectories = cltr::run_toy_comparison(problem, etas, iterations, seeds);

  std::ostringstream csv;
  csv << "method,eta,seed,t,w1,w2,dist_to_wstar\n";
  for (const auto& traj : trajectories) {
    for (std::size_t t = 0; t < traj.iterates.size(); ++t) {
      const Eigen::Vector2d& w = traj.iterates[t];
      csv << traj.method << ',' << fmt_double(traj.eta, "%g") << ','
          << traj.seed << ',' << t << ',' << fmt_double(w[0]) << ','
          << fmt_double(w[1]) << ','
          << fmt_double((w - problem.w_star).norm()) << '\n';
    }
  }
  write_file(fs::path(out) / "toy_trajectories.csv", csv.str());

  json summary;
  summary["w_star"] = {problem.w_star[0], problem.w_star[1]};
  summary["iterations"] = iterations;
  summary["problem_seed"] = problem_seed;
  summary["final_distance"] = json::array();
  for (const std::string method : {"IPS-SGD", "CounterSample"}) {
    for (double eta : etas) {
      double sum = 0.0;
      int count = 0, diverged = 0;
      for (const auto& traj : trajectories) {
        if (traj.method != method || traj.eta != eta) continue;
        sum += (traj.iterates.back() - problem.w_star).norm();
        ++count;
        if (traj.diverged) ++diverged;
      }
      summary["final_distance"].push_back({{"method", method},
                                           {"eta", eta},
                                           {"mean_final_dist", sum / count},
                                           {"diverged_seeds", diverged}});
    }
  }
  write_file(fs::path(out) / "toy_summary.json", summary.dump(2) + "\n");
  std::cout << "wrote toy results to " << out << "\n";
  return 0;
}

int cmd_stats(const std::string& log_path) {
  std::ifstream in(log_path);
  if (!in) throw std::runtime_error("cannot open " + log_path);
  cltr::ClickLog log = cltr::read_click_log(in);
  const cltr::LogStats s = cltr::log_stats(log);
  std::cout << "n = " << log.entries.size() << "\n"
            << "gamma = " << log.gamma << "\n"
            << "M = " << s.m << "\n"
            << "M_bar = " << s.m_bar << "\n";
  // histogram of IPS weights 1/p, bucketed by powers of 2
  std::vector<long> buckets;
  for (const auto& e : log.entries) {
    const double w = 1.0 / e.propensity;
    int b = 0;
    while ((1L << (b + 1)) <= w) ++b;
    if (b >= static_cast<int>(buckets.size())) buckets.resize(b + 1, 0);
    ++buckets[b];
  }
  std::cout << "1/p histogram (powers of 2):\n";
  for (std::size_t b = 0; b < buckets.size(); ++b)
    std::cout << "  [" << (1L << b) << ", " << (1L << (b + 1))
              << "): " << buckets[b] << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual learning-to-rank experiment runner"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  std::optional<double> gamma_override, eta_override;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::int64_t> clicks_override;
  std::optional<int> batch_override, workers_override;
  std::string method_override, optimizer_override;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON experiment config");
    cmd->add_option("--out", out_override, "output directory");
    cmd->add_option("--seed", seed_override, "replace the seed list with one seed");
    cmd->add_option("--workers", workers_override, "worker thread count");
    cmd->add_option("--gamma", gamma_override, "replace the gamma list");
    cmd->add_option("--method", method_override, "replace the method list");
    cmd->add_option("--optimizer", optimizer_override, "replace the optimizer list");
    cmd->add_option("--batch-size", batch_override, "replace the batch size list");
    cmd->add_option("--eta", eta_override, "fixed learning rate (disables grid)");
    cmd->add_option("--clicks", clicks_override, "number of clicks to simulate");
  };

  auto* simulate = app.add_subcommand("simulate", "generate click logs and stats");
  auto* train = app.add_subcommand("train", "run the training sweep");
  auto* grid = app.add_subcommand("grid", "learning-rate grid search");
  add_common(simulate);
  add_common(train);
  add_common(grid);

  auto* toy = app.add_subcommand("toy", "toy regression comparison");
  std::vector<double> toy_etas{0.001, 0.005, 0.01, 0.05};
  std::vector<std::uint64_t> toy_seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  int toy_iterations = 50;
  std::uint64_t toy_problem_seed = 42;
  std::string toy_out = "out";
  toy->add_option("--etas", toy_etas, "learning rates to sweep");
  toy->add_option("--seeds", toy_seeds, "trajectory seeds");
  toy->add_option("--iterations", toy_iterations, "iterations per trajectory");
  toy->add_option("--problem-seed", toy_problem_seed, "seed for the dataset");
  toy->add_option("--out", toy_out, "output directory");

  auto* stats = app.add_subcommand("stats", "statistics of a click log");
  std::string stats_path;
  stats->add_option("log", stats_path, "JSONL click log path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kExitUsage;
  }

  try {
    if (toy->parsed())
      return cmd_toy(toy_etas, toy_seeds, toy_iterations, toy_problem_seed, toy_out);
    if (stats->parsed()) return cmd_stats(stats_path);

    AppConfig cfg;
    if (!config_path.empty()) load_config_file(config_path, cfg);
    if (!out_override.empty()) cfg.out = out_override;
    if (seed_override) cfg.seeds = {*seed_override};
    if (workers_override) cfg.workers = *workers_override;
    if (gamma_override) cfg.gammas = {*gamma_override};
    if (!method_override.empty()) cfg.methods = {method_override};
    if (!optimizer_override.empty()) cfg.optimizers = {optimizer_override};
    if (batch_override) cfg.batch_sizes = {*batch_override};
    if (eta_override) cfg.eta = eta_override;
    if (clicks_override) cfg.n_clicks = *clicks_override;

    if (cfg.methods.empty() || cfg.seeds.empty() || cfg.gammas.empty())
      throw CLI::ValidationError("config", "methods, seeds, gammas must be non-empty");

    if (simulate->parsed()) return cmd_simulate(cfg);
    if (train->parsed()) return cmd_train(cfg);
    if (grid->parsed()) return cmd_grid(cfg);
  } catch (const CLI::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

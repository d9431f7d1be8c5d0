#ifndef CLTR_OPTIMIZE_HPP
#define CLTR_OPTIMIZE_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cltr/alias.hpp"
#include "cltr/objectives.hpp"
#include "cltr/rng.hpp"

namespace cltr {

enum class Method { Biased, IpsSgd, CounterSample };
enum class OptimizerKind { Sgd, Adam, Adagrad };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::Biased: return "Biased-SGD";
    case Method::IpsSgd: return "IPS-SGD";
    case Method::CounterSample: return "CounterSample";
  }
  throw std::logic_error("unknown method");
}

inline std::string to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::Sgd: return "SGD";
    case OptimizerKind::Adam: return "Adam";
    case OptimizerKind::Adagrad: return "Adagrad";
  }
  throw std::logic_error("unknown optimizer");
}

inline Method method_from_string(const std::string& s) {
  if (s == "Biased-SGD" || s == "biased") return Method::Biased;
  if (s == "IPS-SGD" || s == "ips") return Method::IpsSgd;
  if (s == "CounterSample" || s == "countersample") return Method::CounterSample;
  throw std::invalid_argument("unknown method: " + s);
}

inline OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "SGD" || s == "sgd") return OptimizerKind::Sgd;
  if (s == "Adam" || s == "adam") return OptimizerKind::Adam;
  if (s == "Adagrad" || s == "adagrad") return OptimizerKind::Adagrad;
  throw std::invalid_argument("unknown optimizer: " + s);
}

// Update-rule state for plain SGD, Adam, and Adagrad with the standard
// published hyperparameters.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double eta, long dim)
      : kind_(kind), eta_(eta) {
    if (eta <= 0.0) throw std::invalid_argument("Optimizer: eta must be > 0");
    if (kind == OptimizerKind::Adam) {
      m_ = Eigen::VectorXd::Zero(dim);
      v_ = Eigen::VectorXd::Zero(dim);
    } else if (kind == OptimizerKind::Adagrad) {
      acc_ = Eigen::VectorXd::Zero(dim);
    }
  }

  void step(Eigen::VectorXd& w, const Eigen::VectorXd& g) {
    if (!g.allFinite()) throw std::invalid_argument("Optimizer: non-finite gradient");
    switch (kind_) {
      case OptimizerKind::Sgd:
        w -= eta_ * g;
        break;
      case OptimizerKind::Adam: {
        ++t_;
        m_ = kBeta1 * m_ + (1.0 - kBeta1) * g;
        v_ = kBeta2 * v_ + (1.0 - kBeta2) * g.array().square().matrix();
        const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
        w.array() -= eta_ * (m_.array() / c1) /
                     ((v_.array() / c2).sqrt() + kEps);
        break;
      }
      case OptimizerKind::Adagrad:
        acc_ += g.array().square().matrix();
        w.array() -= eta_ * g.array() / (acc_.array().sqrt() + kEps);
        break;
    }
  }

  double eta() const { return eta_; }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  OptimizerKind kind_;
  double eta_;
  std::int64_t t_ = 0;
  Eigen::VectorXd m_, v_, acc_;
};

struct TrainConfig {
  Method method = Method::CounterSample;
  OptimizerKind optimizer = OptimizerKind::Sgd;
  double eta = 0.01;
  int batch_size = 1;
  std::int64_t iterations = 1000;  // T
  std::int64_t eval_every = 0;     // 0 -> max(1, T/100)
  std::uint64_t seed = 0;
  bool apply_mbar_scaling = true;
};

struct Checkpoint {
  std::int64_t t;
  double ndcg_valid;
  double ndcg_test;
};

struct TrainResult {
  Eigen::VectorXd averaged_weights;
  std::vector<Checkpoint> checkpoints;
  double regret = std::numeric_limits<double>::quiet_NaN();  // vs validation gold
  bool diverged = false;
  std::int64_t diverged_at = -1;
  double wall_time_sec = 0.0;
  TrainConfig config;
};

// Piecewise-constant average regret: each checkpoint's nDCG stands in for
// the iterations since the previous checkpoint.
inline double regret(const std::vector<std::pair<std::int64_t, double>>& checkpoints,
                     double gold_ndcg) {
  if (checkpoints.empty())
    throw std::invalid_argument("regret: no checkpoints");
  if (gold_ndcg < 0.0 || gold_ndcg > 1.0)
    throw std::invalid_argument("regret: gold ndcg outside [0,1]");
  double total = 0.0;
  std::int64_t prev = 0;
  for (const auto& [t, ndcg] : checkpoints) {
    total += (gold_ndcg - ndcg) * static_cast<double>(t - prev);
    prev = t;
  }
  return total / static_cast<double>(prev);
}

inline bool weights_diverged(const Eigen::VectorXd& w) {
  return !w.allFinite() || w.norm() > 1e12;
}

// One counterfactual training run. Per iteration, `batch_size` clicks are
// drawn (uniformly for Biased/IPS-SGD, from the IPS-proportional alias table for
// CounterSample), the batch-mean gradient is scaled per method, the
// optimizer step is applied, and the running average iterate is maintained.
inline TrainResult train(const ClickLog& log, const Dataset& dataset,
                         const TrainConfig& config,
                         std::optional<double> gold_ndcg = {}) {
  if (config.iterations < 1)
    throw std::invalid_argument("train: iterations must be >= 1");
  if (config.batch_size < 1)
    throw std::invalid_argument("train: batch_size must be >= 1");
  if (log.entries.empty()) throw std::invalid_argument("train: empty click log");
  const std::int64_t T = config.iterations;
  std::int64_t eval_every =
      config.eval_every > 0 ? config.eval_every : std::max<std::int64_t>(1, T / 100);
  if (eval_every > T) eval_every = T;

  const auto t_start = std::chrono::steady_clock::now();
  const int n = static_cast<int>(log.entries.size());
  const long dim = dataset.dim;

  AliasTable table;
  double m_bar = 1.0;
  if (config.method == Method::CounterSample) {
    table = build_alias(ips_distribution(log));
    m_bar = log_stats(log).m_bar;
  }

  Rng rng(config.seed);
  Optimizer opt(config.optimizer, config.eta, dim);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd w_bar = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd g(dim);

  TrainResult result;
  result.config = config;
  const RankWeighting weighting = RankWeighting::Identity;
  const HingeConfig hinge;

  for (std::int64_t t = 1; t <= T; ++t) {
    g.setZero();
    for (int b = 0; b < config.batch_size; ++b) {
      int i;
      double scale = 1.0;
      switch (config.method) {
        case Method::Biased:
          i = rng.next_index(n);
          break;
        case Method::IpsSgd:
          i = rng.next_index(n);
          scale = 1.0 / log.entries[i].propensity;
          break;
        case Method::CounterSample:
          i = draw(table, rng);
          if (config.apply_mbar_scaling) scale = m_bar;
          break;
      }
      const ClickLogEntry& e = log.entries[i];
      g += scale * grad_f(w, dataset.train[e.query], e.doc, weighting, hinge);
    }
    g /= static_cast<double>(config.batch_size);
    opt.step(w, g);
    if (weights_diverged(w)) {
      result.diverged = true;
      result.diverged_at = t;
      break;
    }
    w_bar += (w - w_bar) / static_cast<double>(t);
    if (t % eval_every == 0 || t == T) {
      result.checkpoints.push_back(
          {t, ndcg_at_k(w_bar, dataset.validation),
           ndcg_at_k(w_bar, dataset.test)});
    }
  }

  result.averaged_weights = w_bar;
  if (gold_ndcg) {
    if (result.diverged || result.checkpoints.empty()) {
      result.regret = *gold_ndcg;  // worst case
    } else {
      std::vector<std::pair<std::int64_t, double>> pts;
      pts.reserve(result.checkpoints.size());
      for (const auto& c : result.checkpoints) pts.emplace_back(c.t, c.ndcg_valid);
      result.regret = regret(pts, *gold_ndcg);
    }
  }
  result.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return result;
}

struct SupervisedConfig {
  OptimizerKind optimizer = OptimizerKind::Sgd;
  std::optional<double> eta;  // unset -> tuned on the supplied queries' nDCG
  std::int64_t iterations = 100000;
};

inline std::vector<double> default_eta_grid() {
  std::vector<double> grid;
  for (int k = -10; k <= 0; ++k) {
    grid.push_back(std::pow(10.0, k));
    grid.push_back(3.0 * std::pow(10.0, k));
  }
  return grid;
}

namespace detail {

inline Eigen::VectorXd train_supervised_fixed_eta(
    const std::vector<Query>& queries,
    const std::vector<std::pair<int, int>>& pairs, const SupervisedConfig& cfg,
    double eta, std::uint64_t seed) {
  const long dim = queries.front().features.cols();
  Rng rng(seed);
  Optimizer opt(cfg.optimizer, eta, dim);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd w_bar = Eigen::VectorXd::Zero(dim);
  for (std::int64_t t = 1; t <= cfg.iterations; ++t) {
    const auto& [qi, doc] = pairs[rng.next_index(static_cast<int>(pairs.size()))];
    Eigen::VectorXd g =
        grad_f(w, queries[qi], doc, RankWeighting::Identity, HingeConfig{});
    opt.step(w, g);
    if (weights_diverged(w)) return Eigen::VectorXd::Constant(dim, std::nan(""));
    w_bar += (w - w_bar) / static_cast<double>(t);
  }
  return w_bar;
}

}  // namespace detail

// Fully supervised training: uniform sampling over (query, relevant doc)
// pairs with unweighted hinge gradients, averaged iterate returned. When no
// learning rate is given, the grid value with the best nDCG on the supplied
// queries is used.
inline Eigen::VectorXd train_supervised(const std::vector<Query>& queries,
                                        const SupervisedConfig& cfg,
                                        std::uint64_t seed) {
  if (queries.empty())
    throw std::invalid_argument("train_supervised: no queries");
  std::vector<std::pair<int, int>> pairs;
  for (int qi = 0; qi < static_cast<int>(queries.size()); ++qi)
    for (int d = 0; d < queries[qi].n_docs(); ++d)
      if (is_relevant_grade(queries[qi].grades[d])) pairs.emplace_back(qi, d);
  if (pairs.empty())
    throw std::invalid_argument("train_supervised: no relevant documents");

  if (cfg.eta)
    return detail::train_supervised_fixed_eta(queries, pairs, cfg, *cfg.eta, seed);

  Eigen::VectorXd best;
  double best_ndcg = -1.0;
  for (double eta : default_eta_grid()) {
    Eigen::VectorXd w =
        detail::train_supervised_fixed_eta(queries, pairs, cfg, eta, seed);
    if (!w.allFinite()) continue;
    double ndcg;
    try {
      ndcg = ndcg_at_k(w, queries);
    } catch (const std::runtime_error&) {
      break;  // no relevant query at all; any model is equivalent
    }
    if (ndcg > best_ndcg) {
      best_ndcg = ndcg;
      best = w;
    }
  }
  if (best.size() == 0)
    return Eigen::VectorXd::Zero(queries.front().features.cols());
  return best;
}

struct GridSearchResult {
  double best_eta = 0.0;
  std::vector<std::pair<double, double>> regrets;  // (eta, regret)
  bool all_divergent = false;
};

// One training run per grid value with a shared seed; regret measured
// against the gold nDCG on the validation split, divergent runs assigned
// the worst-case regret. Ties select the smaller eta.
inline GridSearchResult grid_search_eta(const ClickLog& log,
                                        const Dataset& dataset,
                                        TrainConfig config, double gold_ndcg,
                                        const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("grid_search_eta: empty grid");
  GridSearchResult out;
  std::vector<double> sorted_grid = grid;
  std::sort(sorted_grid.begin(), sorted_grid.end());
  double best_regret = std::numeric_limits<double>::infinity();
  bool any_finished = false;
  for (double eta : sorted_grid) {
    config.eta = eta;
    TrainResult r = train(log, dataset, config, gold_ndcg);
    any_finished = any_finished || !r.diverged;
    out.regrets.emplace_back(eta, r.regret);
    if (r.regret < best_regret) {
      best_regret = r.regret;
      out.best_eta = eta;
    }
  }
  out.all_divergent = !any_finished;
  return out;
}

// Bounds supplied by the analyst for the convergence-rate helpers; M and
// M_bar come from log_stats.
struct TheoryParams {
  double b;
  double g;
  double m;
  double m_bar;
  double epsilon;
};

inline double effective_ips_bound(const TheoryParams& p, Method method) {
  if (p.b <= 0 || p.g <= 0 || p.m <= 0 || p.m_bar <= 0 || p.epsilon <= 0)
    throw std::invalid_argument("TheoryParams must be positive");
  switch (method) {
    case Method::IpsSgd: return p.m;
    case Method::CounterSample: return p.m_bar;
    case Method::Biased: break;
  }
  throw std::invalid_argument("theory helpers apply to IPS-SGD and CounterSample");
}

// Iterations sufficient for an epsilon-optimal averaged iterate:
// B^2 (M_eff G)^2 / epsilon^2.
inline double required_iterations(const TheoryParams& p, Method method) {
  const double m_eff = effective_ips_bound(p, method);
  const double bg = p.b * m_eff * p.g;
  return bg * bg / (p.epsilon * p.epsilon);
}

// Learning rate from the convergence theorems: B / (M_eff G sqrt(T)).
inline double theoretical_eta(const TheoryParams& p, double iterations,
                              Method method) {
  if (iterations <= 0) throw std::invalid_argument("theoretical_eta: T must be > 0");
  const double m_eff = effective_ips_bound(p, method);
  return p.b / (m_eff * p.g * std::sqrt(iterations));
}

}  // namespace cltr

#endif  // CLTR_OPTIMIZE_HPP

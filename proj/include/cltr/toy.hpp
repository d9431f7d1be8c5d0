#ifndef CLTR_TOY_HPP
#define CLTR_TOY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cltr/alias.hpp"
#include "cltr/rng.hpp"

namespace cltr {

// IPS-weighted least-squares problem: 50 gaussian samples in 2-d, noiseless
// targets from a fixed optimum, propensities uniform on [0.05, 1.0].
struct ToyProblem {
  Eigen::MatrixXd x;            // 50 x 2
  Eigen::VectorXd y;            // 50
  Eigen::VectorXd propensities; // 50, in [0.05, 1.0]
  Eigen::Vector2d w_star;

  int size() const { return static_cast<int>(x.rows()); }
};

inline ToyProblem generate_toy(std::uint64_t seed) {
  constexpr int n = 50;
  ToyProblem p;
  p.w_star << 0.973, 1.144;
  p.x.resize(n, 2);
  p.propensities.resize(n);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    p.x(i, 0) = rng.next_gaussian();
    p.x(i, 1) = rng.next_gaussian();
  }
  for (int i = 0; i < n; ++i)
    p.propensities[i] = 0.05 + 0.95 * rng.next_double();
  p.y = p.x * p.w_star;
  return p;
}

// per-sample squared loss f_i(w) and its gradient
inline double toy_sample_loss(const ToyProblem& p, int i,
                              const Eigen::Vector2d& w) {
  const double r = p.x.row(i).dot(w) - p.y[i];
  return r * r;
}

inline Eigen::Vector2d toy_sample_grad(const ToyProblem& p, int i,
                                       const Eigen::Vector2d& w) {
  const double r = p.x.row(i).dot(w) - p.y[i];
  return 2.0 * r * p.x.row(i).transpose();
}

// R_IPS(w) = (1/n) sum_i (1/p_i) f_i(w); zero exactly at w_star.
inline double toy_loss(const ToyProblem& p, const Eigen::Vector2d& w) {
  double total = 0.0;
  for (int i = 0; i < p.size(); ++i)
    total += toy_sample_loss(p, i, w) / p.propensities[i];
  return total / p.size();
}

inline Eigen::Vector2d toy_grad(const ToyProblem& p, const Eigen::Vector2d& w) {
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (int i = 0; i < p.size(); ++i)
    g += toy_sample_grad(p, i, w) / p.propensities[i];
  return g / p.size();
}

struct ToyTrajectory {
  std::string method;  // "IPS-SGD" or "CounterSample"
  double eta;
  std::uint64_t seed;
  std::vector<Eigen::Vector2d> iterates;  // w_1 .. w_{T+1}
  bool diverged = false;
};

// IPS-weighted SGD and CounterSample trajectories from w_1 = 0, full
// iterate paths per (eta, seed) for plotting and distance summaries.
inline std::vector<ToyTrajectory> run_toy_comparison(
    const ToyProblem& p, const std::vector<double>& etas, int iterations,
    const std::vector<std::uint64_t>& seeds) {
  const int n = p.size();
  Eigen::VectorXd ips_weights(n);
  for (int i = 0; i < n; ++i) ips_weights[i] = 1.0 / p.propensities[i];
  const double m_bar = ips_weights.mean();
  const AliasTable table = build_alias(ips_weights / ips_weights.sum());

  std::vector<ToyTrajectory> out;
  for (double eta : etas) {
    for (std::uint64_t seed : seeds) {
      for (const bool counter_sample : {false, true}) {
        ToyTrajectory traj;
        traj.method = counter_sample ? "CounterSample" : "IPS-SGD";
        traj.eta = eta;
        traj.seed = seed;
        Rng rng(seed);
        Eigen::Vector2d w = Eigen::Vector2d::Zero();
        traj.iterates.push_back(w);
        for (int t = 0; t < iterations; ++t) {
          Eigen::Vector2d g;
          if (counter_sample) {
            g = m_bar * toy_sample_grad(p, draw(table, rng), w);
          } else {
            const int i = rng.next_index(n);
            g = toy_sample_grad(p, i, w) / p.propensities[i];
          }
          w -= eta * g;
          if (!w.allFinite()) {
            traj.diverged = true;
            break;
          }
          traj.iterates.push_back(w);
        }
        out.push_back(std::move(traj));
      }
    }
  }
  return out;
}

}  // namespace cltr

#endif  // CLTR_TOY_HPP

#ifndef CLTR_SIMULATION_HPP
#define CLTR_SIMULATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "cltr/click_log.hpp"
#include "cltr/optimize.hpp"
#include "cltr/ranking.hpp"
#include "cltr/rng.hpp"

namespace cltr {

// Position-bias observation probability: P(o) = (1/rank)^gamma.
inline double observation_propensity(int rank, double gamma) {
  if (rank < 1) throw std::invalid_argument("observation_propensity: rank < 1");
  if (gamma < 0.0) throw std::invalid_argument("observation_propensity: gamma < 0");
  return std::pow(1.0 / static_cast<double>(rank), gamma);
}

struct BiasConfig {
  double gamma = 1.0;
  double noise_click_prob = 0.1;  // click prob for non-relevant observed items
  int min_relevant_grade = 3;     // grades {3,4} are relevant
  std::int64_t n_clicks = 1000000;
};

// FNV-1a over the weight bytes; identifies the logging policy in log headers.
inline std::string model_fingerprint(const LinearModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(model.data());
  for (long i = 0; i < model.size() * static_cast<long>(sizeof(double)); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

// Trains the logging policy with full supervision on a uniformly sampled
// subset of ceil(fraction * |train|) queries.
inline LinearModel train_logging_policy(const Dataset& dataset,
                                        double fraction, std::uint64_t seed,
                                        const SupervisedConfig& cfg = {}) {
  if (dataset.train.empty())
    throw std::invalid_argument("train_logging_policy: empty train split");
  const int n = static_cast<int>(dataset.train.size());
  const int n_sel =
      std::min(n, static_cast<int>(std::ceil(fraction * static_cast<double>(n))));
  if (n_sel < 1)
    throw std::invalid_argument("train_logging_policy: fraction selects no query");

  // partial Fisher-Yates over query indices
  Rng rng(mix64(seed ^ 0x706f6c696379ULL));
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < n_sel; ++i)
    std::swap(idx[i], idx[i + rng.next_index(n - i)]);
  std::vector<Query> subset;
  subset.reserve(n_sel);
  for (int i = 0; i < n_sel; ++i) subset.push_back(dataset.train[idx[i]]);
  return train_supervised(subset, cfg, seed);
}

// Examination-hypothesis click simulation. Sessions are independent
// substreams of the seed; within a session the candidates are scanned in
// rank order and one uniform draw is consumed per candidate regardless of
// the click outcome, so logs are reproducible and sessions parallelizable.
// Clicks accumulate until exactly n_clicks, possibly truncating mid-session.
inline ClickLog simulate_clicks(const Dataset& dataset,
                                const LinearModel& policy,
                                const BiasConfig& config, std::uint64_t seed) {
  if (dataset.train.empty())
    throw std::invalid_argument("simulate_clicks: empty train split");
  if (policy.size() != dataset.dim)
    throw std::invalid_argument("simulate_clicks: policy dim mismatch");
  if (config.noise_click_prob < 0.0 || config.noise_click_prob > 1.0)
    throw std::invalid_argument("simulate_clicks: noise_click_prob outside [0,1]");
  if (config.gamma < 0.0)
    throw std::invalid_argument("simulate_clicks: gamma < 0");
  if (config.n_clicks < 1)
    throw std::invalid_argument("simulate_clicks: n_clicks must be >= 1");

  ClickLog log;
  log.gamma = config.gamma;
  log.seed = seed;
  log.policy_fingerprint = model_fingerprint(policy);
  log.entries.reserve(static_cast<std::size_t>(config.n_clicks));

  const int n_queries = static_cast<int>(dataset.train.size());
  const std::uint64_t session_budget =
      std::max<std::uint64_t>(1000000, 1000 * static_cast<std::uint64_t>(config.n_clicks));

  for (std::uint64_t session = 0;; ++session) {
    if (session >= session_budget)
      throw std::runtime_error(
          "simulate_clicks: only " + std::to_string(log.entries.size()) + "/" +
          std::to_string(config.n_clicks) + " clicks after " +
          std::to_string(session) +
          " sessions; the configuration yields too few clicks per session");
    Rng rng = Rng::substream(seed, session);
    const int qi = rng.next_index(n_queries);
    const Query& q = dataset.train[qi];
    std::vector<int> order = rank_all(policy, q);
    for (int pos = 0; pos < q.n_docs(); ++pos) {
      const int d = order[pos];
      const double p_obs = observation_propensity(pos + 1, config.gamma);
      const bool relevant = q.grades[d] >= config.min_relevant_grade;
      const double p_click = relevant ? p_obs : p_obs * config.noise_click_prob;
      if (rng.next_double() < p_click) {
        log.entries.push_back({qi, d, p_obs});
        if (static_cast<std::int64_t>(log.entries.size()) == config.n_clicks)
          return log;
      }
    }
  }
}

}  // namespace cltr

#endif  // CLTR_SIMULATION_HPP

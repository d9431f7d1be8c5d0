#ifndef CLTR_CLICK_LOG_HPP
#define CLTR_CLICK_LOG_HPP

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cltr {

// One logged click: which train query, which document, and the propensity
// (observation probability) the click was collected under.
struct ClickLogEntry {
  int query;          // index into the train split
  int doc;            // doc index within that query
  double propensity;  // in (0, 1]
};

struct ClickLog {
  std::vector<ClickLogEntry> entries;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  std::string policy_fingerprint;
};

struct LogStats {
  double m;      // max IPS weight, max_i 1/p_i
  double m_bar;  // mean IPS weight, (1/n) sum_i 1/p_i
};

inline LogStats log_stats(const ClickLog& log) {
  if (log.entries.empty())
    throw std::invalid_argument("log_stats: empty click log");
  double m = 0.0, sum = 0.0;
  for (const auto& e : log.entries) {
    const double w = 1.0 / e.propensity;
    if (w > m) m = w;
    sum += w;
  }
  return {m, sum / static_cast<double>(log.entries.size())};
}

// JSON Lines format: a header line {"gamma":..,"seed":..,"policy":..,"n":..}
// followed by one {"q":..,"d":..,"p":..} line per click.
inline void write_click_log(std::ostream& out, const ClickLog& log) {
  nlohmann::ordered_json header = {{"gamma", log.gamma},
                                   {"seed", log.seed},
                                   {"policy", log.policy_fingerprint},
                                   {"n", log.entries.size()}};
  out << header.dump() << '\n';
  for (const auto& e : log.entries) {
    nlohmann::ordered_json j = {{"q", e.query}, {"d", e.doc}, {"p", e.propensity}};
    out << j.dump() << '\n';
  }
}

inline ClickLog read_click_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_click_log: missing header line");
  ClickLog log;
  std::size_t n;
  try {
    auto header = nlohmann::json::parse(line);
    log.gamma = header.at("gamma").get<double>();
    log.seed = header.at("seed").get<std::uint64_t>();
    log.policy_fingerprint = header.at("policy").get<std::string>();
    n = header.at("n").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("read_click_log: bad header: ") +
                             e.what());
  }
  log.entries.reserve(n);
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      log.entries.push_back({j.at("q").get<int>(), j.at("d").get<int>(),
                             j.at("p").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("read_click_log: bad entry at line " +
                               std::to_string(line_no) + ": " + e.what());
    }
    if (log.entries.back().propensity <= 0.0)
      throw std::runtime_error("read_click_log: non-positive propensity at line " +
                               std::to_string(line_no));
  }
  if (log.entries.size() != n)
    throw std::runtime_error("read_click_log: header count " +
                             std::to_string(n) + " != " +
                             std::to_string(log.entries.size()) + " entries");
  return log;
}

}  // namespace cltr

#endif  // CLTR_CLICK_LOG_HPP

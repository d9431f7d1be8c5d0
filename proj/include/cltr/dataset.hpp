#ifndef CLTR_DATASET_HPP
#define CLTR_DATASET_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cltr/rng.hpp"

namespace cltr {

// One query with its candidate set. Row i of `features` is the feature
// vector of the document with doc index i; grades are 0..4.
struct Query {
  std::string id;
  Eigen::MatrixXd features;  // n_docs x dim
  Eigen::VectorXi grades;    // n_docs

  int n_docs() const { return static_cast<int>(features.rows()); }
};

struct Dataset {
  int dim = 0;
  std::vector<Query> train;
  std::vector<Query> validation;
  std::vector<Query> test;
};

inline bool is_relevant_grade(int grade) { return grade >= 3; }

namespace detail {

struct RawDoc {
  int grade;
  std::string qid;
  std::vector<std::pair<int, double>> feats;  // 1-based indices
};

inline RawDoc parse_svmlight_line(const std::string& line, long line_no) {
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("svmlight parse error at line " +
                             std::to_string(line_no) + ": " + what);
  };
  RawDoc doc;
  std::istringstream ss(line);
  std::string tok;
  if (!(ss >> tok)) fail("empty record");
  try {
    std::size_t pos = 0;
    doc.grade = std::stoi(tok, &pos);
    if (pos != tok.size()) fail("bad relevance grade '" + tok + "'");
  } catch (const std::logic_error&) {
    fail("bad relevance grade '" + tok + "'");
  }
  if (doc.grade < 0 || doc.grade > 4)
    fail("relevance grade " + std::to_string(doc.grade) + " outside [0,4]");
  if (!(ss >> tok) || tok.rfind("qid:", 0) != 0) fail("expected qid:<id>");
  doc.qid = tok.substr(4);
  if (doc.qid.empty()) fail("empty qid");
  while (ss >> tok) {
    auto colon = tok.find(':');
    if (colon == std::string::npos)
      fail("expected <featidx>:<value>, got '" + tok + "'");
    int idx;
    double val;
    try {
      idx = std::stoi(tok.substr(0, colon));
      std::size_t pos = 0;
      const std::string vs = tok.substr(colon + 1);
      val = std::stod(vs, &pos);
      if (pos != vs.size()) throw std::invalid_argument(vs);
    } catch (const std::logic_error&) {
      fail("bad feature token '" + tok + "'");
    }
    if (idx < 1) fail("feature index " + std::to_string(idx) + " < 1");
    for (const auto& [seen, _] : doc.feats)
      if (seen == idx)
        fail("duplicate feature index " + std::to_string(idx));
    doc.feats.emplace_back(idx, val);
  }
  return doc;
}

}  // namespace detail

// Documents are grouped by consecutive qid; dimensionality defaults to the
// maximum feature index observed across the whole stream (SVMLight files
// omit trailing zeros), overridable for datasets with a known dim.
inline std::vector<Query> parse_svmlight(std::istream& in,
                                         std::optional<int> dim_override = {},
                                         int* out_dim = nullptr) {
  std::vector<detail::RawDoc> docs;
  int max_idx = 0;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    docs.push_back(detail::parse_svmlight_line(line, line_no));
    for (const auto& [idx, _] : docs.back().feats) max_idx = std::max(max_idx, idx);
  }
  const int dim = dim_override.value_or(max_idx);
  if (out_dim) *out_dim = dim;

  std::vector<Query> queries;
  for (std::size_t i = 0; i < docs.size();) {
    std::size_t j = i;
    while (j < docs.size() && docs[j].qid == docs[i].qid) ++j;
    Query q;
    q.id = docs[i].qid;
    q.features = Eigen::MatrixXd::Zero(static_cast<long>(j - i), dim);
    q.grades.resize(static_cast<long>(j - i));
    for (std::size_t k = i; k < j; ++k) {
      const long row = static_cast<long>(k - i);
      q.grades[row] = docs[k].grade;
      for (const auto& [idx, val] : docs[k].feats) {
        if (idx > dim)
          throw std::runtime_error("feature index " + std::to_string(idx) +
                                   " exceeds declared dim " + std::to_string(dim));
        q.features(row, idx - 1) = val;
      }
    }
    queries.push_back(std::move(q));
    i = j;
  }
  return queries;
}

inline void serialize_svmlight(const std::vector<Query>& queries,
                               std::ostream& out) {
  char buf[64];
  for (const auto& q : queries) {
    for (int d = 0; d < q.n_docs(); ++d) {
      out << q.grades[d] << " qid:" << q.id;
      for (int f = 0; f < q.features.cols(); ++f) {
        std::snprintf(buf, sizeof(buf), "%.17g", q.features(d, f));
        out << ' ' << (f + 1) << ':' << buf;
      }
      out << '\n';
    }
  }
}

// Synthetic stand-in for the licensed LTR datasets: gaussian features, a
// hidden linear ground truth, grades by per-query latent-score quantiles
// with proportions 50/20/15/10/5 for grades 0..4, splits 60/20/20 by query.
inline Dataset generate_synthetic_ltr(int n_queries, int docs_per_query,
                                      int dim, std::uint64_t seed) {
  if (n_queries <= 0 || docs_per_query <= 0 || dim <= 0)
    throw std::invalid_argument("generate_synthetic_ltr: counts must be positive");
  Rng rng(seed);
  Eigen::VectorXd hidden(dim);
  for (int i = 0; i < dim; ++i) hidden[i] = rng.next_gaussian();

  constexpr double kNoiseSigma = 0.5;
  // cumulative grade proportions: 50% grade 0, then 20/15/10/5
  constexpr double kCum[4] = {0.50, 0.70, 0.85, 0.95};

  std::vector<Query> queries;
  queries.reserve(n_queries);
  for (int qi = 0; qi < n_queries; ++qi) {
    Query q;
    q.id = std::to_string(qi);
    q.features.resize(docs_per_query, dim);
    for (int d = 0; d < docs_per_query; ++d)
      for (int f = 0; f < dim; ++f) q.features(d, f) = rng.next_gaussian();
    Eigen::VectorXd latent = q.features * hidden;
    for (int d = 0; d < docs_per_query; ++d)
      latent[d] += kNoiseSigma * rng.next_gaussian();

    std::vector<int> order(docs_per_query);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return latent[a] < latent[b]; });
    q.grades.resize(docs_per_query);
    for (int pos = 0; pos < docs_per_query; ++pos) {
      int grade = 4;
      for (int g = 0; g < 4; ++g) {
        if (pos < static_cast<int>(kCum[g] * docs_per_query)) {
          grade = g;
          break;
        }
      }
      q.grades[order[pos]] = grade;
    }
    queries.push_back(std::move(q));
  }

  Dataset ds;
  ds.dim = dim;
  const int n_train = std::max(1, n_queries * 3 / 5);
  const int n_valid = (n_queries - n_train) / 2;
  for (int i = 0; i < n_queries; ++i) {
    if (i < n_train)
      ds.train.push_back(std::move(queries[i]));
    else if (i < n_train + n_valid)
      ds.validation.push_back(std::move(queries[i]));
    else
      ds.test.push_back(std::move(queries[i]));
  }
  return ds;
}

// Per-feature standardization fit on the train split only; zero-variance
// features are left untouched.
inline Dataset standardize_features(Dataset ds, bool enabled) {
  if (!enabled) return ds;
  if (ds.train.empty())
    throw std::invalid_argument("standardize_features: empty train split");
  const int dim = ds.dim;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(dim);
  long n = 0;
  for (const auto& q : ds.train) {
    sum += q.features.colwise().sum().transpose();
    sumsq += q.features.array().square().colwise().sum().matrix().transpose();
    n += q.n_docs();
  }
  Eigen::VectorXd mean = sum / static_cast<double>(n);
  Eigen::VectorXd var =
      sumsq / static_cast<double>(n) - mean.array().square().matrix();
  Eigen::VectorXd shift(dim), scale(dim);
  for (int f = 0; f < dim; ++f) {
    if (var[f] > 0.0) {
      shift[f] = mean[f];
      scale[f] = 1.0 / std::sqrt(var[f]);
    } else {
      shift[f] = 0.0;
      scale[f] = 1.0;
    }
  }
  auto apply = [&](std::vector<Query>& split) {
    for (auto& q : split)
      q.features = (q.features.rowwise() - shift.transpose()).array().rowwise() *
                   scale.transpose().array();
  };
  apply(ds.train);
  apply(ds.validation);
  apply(ds.test);
  return ds;
}

}  // namespace cltr

#endif  // CLTR_DATASET_HPP

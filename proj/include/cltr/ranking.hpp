#ifndef CLTR_RANKING_HPP
#define CLTR_RANKING_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cltr/dataset.hpp"

namespace cltr {

// Linear scoring model: score of document d is <weights, x_d>.
using LinearModel = Eigen::VectorXd;

// Rank weighting function for the additive metric; Identity is the only
// implemented kind (extension point for other convex increasing weightings).
enum class RankWeighting { Identity };

inline double rank_weight(double rank, RankWeighting w) {
  switch (w) {
    case RankWeighting::Identity:
      return rank;
  }
  throw std::logic_error("unknown rank weighting");
}

inline Eigen::VectorXd score(const LinearModel& model, const Query& query) {
  if (model.size() != query.features.cols())
    throw std::invalid_argument("score: model dim " +
                                std::to_string(model.size()) +
                                " != feature dim " +
                                std::to_string(query.features.cols()));
  return query.features * model;
}

// Permutation of doc indices ordered by descending score, ties broken by
// ascending doc index so results are deterministic.
inline std::vector<int> rank_all(const LinearModel& model, const Query& query) {
  Eigen::VectorXd s = score(model, query);
  std::vector<int> order(query.n_docs());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return s[a] > s[b]; });
  return order;
}

// 1-based rank of one document under the same tie-break rule as rank_all.
inline int rank_of(const LinearModel& model, const Query& query,
                   int doc_index) {
  if (doc_index < 0 || doc_index >= query.n_docs())
    throw std::out_of_range("rank_of: doc_index out of range");
  Eigen::VectorXd s = score(model, query);
  int rank = 1;
  for (int d = 0; d < query.n_docs(); ++d) {
    if (s[d] > s[doc_index] || (s[d] == s[doc_index] && d < doc_index)) ++rank;
  }
  return rank;
}

// Additive ranking metric: sum of weighted ranks of relevant documents,
// relevance binarized as grade in {3,4}.
inline double delta_metric(const LinearModel& model, const Query& query,
                           RankWeighting weighting) {
  std::vector<int> order = rank_all(model, query);
  double total = 0.0;
  for (int pos = 0; pos < query.n_docs(); ++pos) {
    int d = order[pos];
    if (is_relevant_grade(query.grades[d]))
      total += rank_weight(pos + 1.0, weighting);
  }
  return total;
}

inline double dcg_at_k(const Eigen::VectorXi& grades_in_rank_order, int k) {
  double dcg = 0.0;
  const int top = std::min<int>(k, static_cast<int>(grades_in_rank_order.size()));
  for (int r = 0; r < top; ++r)
    dcg += (std::pow(2.0, grades_in_rank_order[r]) - 1.0) /
           std::log2(r + 2.0);
  return dcg;
}

// Mean nDCG@k over all queries with at least one relevant document;
// queries with IDCG = 0 carry no ranking signal and are excluded.
inline double ndcg_at_k(const LinearModel& model,
                        const std::vector<Query>& queries, int k = 10) {
  if (k < 1) throw std::invalid_argument("ndcg_at_k: k must be >= 1");
  double total = 0.0;
  long included = 0;
  for (const auto& q : queries) {
    std::vector<int> order = rank_all(model, q);
    Eigen::VectorXi ranked(q.n_docs());
    for (int pos = 0; pos < q.n_docs(); ++pos) ranked[pos] = q.grades[order[pos]];
    Eigen::VectorXi ideal = q.grades;
    std::sort(ideal.begin(), ideal.end(), std::greater<int>());
    const double idcg = dcg_at_k(ideal, k);
    if (idcg == 0.0) continue;
    total += dcg_at_k(ranked, k) / idcg;
    ++included;
  }
  if (included == 0)
    throw std::runtime_error(
        "ndcg_at_k: no query has a relevant document (IDCG = 0 everywhere)");
  return total / static_cast<double>(included);
}

}  // namespace cltr

#endif  // CLTR_RANKING_HPP

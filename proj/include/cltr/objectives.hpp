#ifndef CLTR_OBJECTIVES_HPP
#define CLTR_OBJECTIVES_HPP

#include <Eigen/Dense>
#include <stdexcept>

#include "cltr/click_log.hpp"
#include "cltr/ranking.hpp"

namespace cltr {

struct HingeConfig {
  double margin = 1.0;
  // The literal pairwise sum includes d' = d, which contributes a constant
  // `margin` and no gradient; excluding it keeps the perfect loss at 1.
  bool exclude_self = true;
};

// Pairwise hinge upper bound on the rank of the clicked document:
// 1 + sum over other candidates of max(0, margin - (S(d) - S(d'))).
inline double hinge_rank_bound(const LinearModel& model, const Query& query,
                               int clicked_doc, const HingeConfig& cfg = {}) {
  if (clicked_doc < 0 || clicked_doc >= query.n_docs())
    throw std::out_of_range("hinge_rank_bound: clicked_doc out of range");
  Eigen::VectorXd s = score(model, query);
  const double sd = s[clicked_doc];
  double bound = 1.0;
  for (int d = 0; d < query.n_docs(); ++d) {
    if (d == clicked_doc) continue;
    const double slack = cfg.margin - (sd - s[d]);
    if (slack > 0.0) bound += slack;
  }
  if (!cfg.exclude_self) bound += cfg.margin;
  return bound;
}

// Per-click convex loss f_i(w): rank weighting applied to the hinge bound.
inline double loss_f(const LinearModel& model, const Query& query,
                     int clicked_doc, RankWeighting weighting,
                     const HingeConfig& cfg = {}) {
  return rank_weight(hinge_rank_bound(model, query, clicked_doc, cfg),
                     weighting);
}

// Subgradient of loss_f. With the Identity weighting this is the sum of
// (x_d' - x_d) over candidates whose hinge is strictly active; exact-margin
// kinks contribute 0.
inline Eigen::VectorXd grad_f(const LinearModel& model, const Query& query,
                              int clicked_doc, RankWeighting weighting,
                              const HingeConfig& cfg = {}) {
  (void)weighting;  // Identity: outer derivative is 1
  if (clicked_doc < 0 || clicked_doc >= query.n_docs())
    throw std::out_of_range("grad_f: clicked_doc out of range");
  Eigen::VectorXd s = score(model, query);
  const double sd = s[clicked_doc];
  Eigen::VectorXd g = Eigen::VectorXd::Zero(model.size());
  for (int d = 0; d < query.n_docs(); ++d) {
    if (d == clicked_doc) continue;
    if (cfg.margin - (sd - s[d]) > 0.0)
      g += (query.features.row(d) - query.features.row(clicked_doc)).transpose();
  }
  return g;
}

// Unbiased empirical risk: mean of IPS-weighted per-click losses.
inline double r_ips(const ClickLog& log, const Dataset& dataset,
                    const LinearModel& model, RankWeighting weighting,
                    const HingeConfig& cfg = {}) {
  if (log.entries.empty()) throw std::invalid_argument("r_ips: empty click log");
  double total = 0.0;
  for (const auto& e : log.entries) {
    const Query& q = dataset.train.at(e.query);
    total += loss_f(model, q, e.doc, weighting, cfg) / e.propensity;
  }
  return total / static_cast<double>(log.entries.size());
}

}  // namespace cltr

#endif  // CLTR_OBJECTIVES_HPP

#include "mtlprior/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mtlprior {

namespace {

void check_pairs(const std::vector<Vector>& truth, const std::vector<Vector>& predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorKind::DimensionMismatch, "truth has " + std::to_string(truth.size()) +
                                                  " tasks, predictions " +
                                                  std::to_string(predicted.size()));
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].size() != predicted[i].size()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "task " + std::to_string(i) + ": " + std::to_string(truth[i].size()) +
                      " responses vs " + std::to_string(predicted[i].size()) + " predictions");
    }
  }
}

double mean_and_std(const std::vector<double>& values, double& stddev) {
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  stddev = std::sqrt(ss / n);
  return mean;
}

}  // namespace

double nmse(const std::vector<Vector>& truth, const std::vector<Vector>& predicted) {
  check_pairs(truth, predicted);
  double error = 0.0;
  double spread = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].size() == 0) continue;
    error += (predicted[i] - truth[i]).squaredNorm();
    spread += (truth[i].array() - truth[i].mean()).matrix().squaredNorm();
  }
  if (!(spread > 0.0)) {
    throw Error(ErrorKind::UndefinedMetric, "responses have zero variance in every task");
  }
  return error / spread;
}

double variance_explained(const std::vector<Vector>& truth, const std::vector<Vector>& predicted) {
  return 1.0 - nmse(truth, predicted);
}

double trapezoid_area(const std::vector<RocPoint>& points) {
  double area = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    area += (points[k].fpr - points[k - 1].fpr) * (points[k].tpr + points[k - 1].tpr) * 0.5;
  }
  return area;
}

RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::DimensionMismatch, "scores and labels differ in length");
  }
  std::size_t positives = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw Error(ErrorKind::InvalidArgument, "labels must be 0 or 1");
    positives += static_cast<std::size_t>(l);
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorKind::DegenerateLabels, "both classes must be present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double score = scores[order[k]];
    while (k < order.size() && scores[order[k]] == score) {
      if (labels[order[k]] == 1) {
        ++tp;
      } else {
        ++fp;
      }
      ++k;
    }
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives)});
  }
  curve.auc = trapezoid_area(curve.points);
  return curve;
}

double interpolate_tpr(const RocCurve& curve, double fpr) {
  const auto& pts = curve.points;
  if (pts.empty()) return 0.0;
  double best = -1.0;
  for (const auto& p : pts) {
    if (p.fpr == fpr) best = std::max(best, p.tpr);
  }
  if (best >= 0.0) return best;
  // last point left of fpr (top of its vertical run) and first point right of it
  std::size_t left = 0;
  bool has_left = false;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (pts[k].fpr < fpr) {
      left = k;
      has_left = true;
    }
  }
  if (!has_left) return pts.front().tpr;
  std::size_t right = left + 1;
  while (right < pts.size() && pts[right].fpr <= fpr) ++right;
  if (right >= pts.size()) return pts[left].tpr;
  const double w = (fpr - pts[left].fpr) / (pts[right].fpr - pts[left].fpr);
  return pts[left].tpr + w * (pts[right].tpr - pts[left].tpr);
}

MacroRoc macro_roc(const std::vector<RocCurve>& curves, int grid_points) {
  if (curves.empty()) throw Error(ErrorKind::InvalidArgument, "macro_roc needs at least one curve");
  if (grid_points < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 points");
  MacroRoc out;
  const auto n = static_cast<std::size_t>(grid_points);
  out.grid.resize(n);
  for (std::size_t g = 0; g < n; ++g) {
    out.grid[g] = static_cast<double>(g) / static_cast<double>(n - 1);
  }
  std::vector<double> column(curves.size());
  for (double x : out.grid) {
    for (std::size_t c = 0; c < curves.size(); ++c) column[c] = interpolate_tpr(curves[c], x);
    double sd = 0.0;
    out.mean_tpr.push_back(mean_and_std(column, sd));
    out.std_tpr.push_back(sd);
  }
  std::vector<double> aucs;
  for (const auto& c : curves) aucs.push_back(c.auc);
  out.mean_auc = mean_and_std(aucs, out.std_auc);
  return out;
}

}  // namespace mtlprior

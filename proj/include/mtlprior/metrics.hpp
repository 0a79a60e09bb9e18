#pragma once

#include <vector>

#include "mtlprior/model.hpp"

namespace mtlprior {

/// sum_i |yhat_i - y_i|^2 / sum_i |y_i - mean(y_i)|^2, each task centred on
/// its own mean. Throws UndefinedMetric when every task is constant.
double nmse(const std::vector<Vector>& truth, const std::vector<Vector>& predicted);

/// 1 - nmse.
double variance_explained(const std::vector<Vector>& truth, const std::vector<Vector>& predicted);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) ... (1,1), one point per distinct score
  double auc = 0.0;              // trapezoidal area under `points`
};

/// Labels must be 0 or 1 with both classes present (else DegenerateLabels).
RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Trapezoidal area under a curve given as ordered points.
double trapezoid_area(const std::vector<RocPoint>& points);

/// TPR of `curve` at `fpr`, linear between points; on a vertical run the
/// highest TPR is used.
double interpolate_tpr(const RocCurve& curve, double fpr);

inline constexpr int kMacroGridPoints = 101;

struct MacroRoc {
  std::vector<double> grid;  // common FPR grid
  std::vector<double> mean_tpr;
  std::vector<double> std_tpr;  // population standard deviation
  double mean_auc = 0.0;
  double std_auc = 0.0;
};

MacroRoc macro_roc(const std::vector<RocCurve>& curves, int grid_points = kMacroGridPoints);

}  // namespace mtlprior

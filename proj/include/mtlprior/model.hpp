#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "mtlprior/error.hpp"

namespace mtlprior {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// d x m matrix whose column i holds the coefficients of task i.
using CoefficientMatrix = Matrix;

struct TaskData {
  Matrix features;   // n_i x d
  Vector responses;  // n_i
  int task_id = 0;

  Eigen::Index samples() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

struct RegularizationParams {
  double lambda = 1.0;   // group-lasso weight
  double theta = 1.0;    // prior-penalty weight
  double epsilon = 1.0;  // adjacent-task smoothness weight
};

enum class PriorKind { Natural, Artificial, User };

std::string_view to_string(PriorKind kind);
PriorKind parse_prior_kind(std::string_view text);

struct PriorProvenance {
  PriorKind kind = PriorKind::User;
  std::pair<std::size_t, std::size_t> feature_indices{0, 0};
  std::optional<double> statistic;
};

/// Rows of `rows` encode pairwise feature relations; s = rows.rows() may be 0.
struct PriorMatrix {
  Matrix rows;
  std::vector<PriorProvenance> provenance;

  static PriorMatrix empty(Eigen::Index d) { return {Matrix(0, d), {}}; }
  Eigen::Index constraints() const { return rows.rows(); }
};

/// The frozen input to every solver. Task order is significant: the
/// smoothness term couples adjacent columns.
struct ProblemInstance {
  std::vector<TaskData> tasks;
  PriorMatrix prior;
  RegularizationParams params;

  Eigen::Index dim() const { return tasks.empty() ? 0 : tasks.front().dim(); }
  Eigen::Index num_tasks() const { return static_cast<Eigen::Index>(tasks.size()); }
};

/// Returns a copy of `instance` after checking every structural invariant.
/// Throws Error(DimensionMismatch | NonFiniteEntry | NegativeParameter).
ProblemInstance validate_instance(const ProblemInstance& instance);

void validate_params(const RegularizationParams& params);
void validate_task(const TaskData& task, Eigen::Index d);
void validate_prior(const PriorMatrix& prior, Eigen::Index d);

/// Throws DimensionMismatch unless P is d x m for `instance`.
void check_coefficients(const ProblemInstance& instance, const CoefficientMatrix& P);

CoefficientMatrix zero_coefficients(const ProblemInstance& instance);

}  // namespace mtlprior

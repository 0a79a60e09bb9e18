#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mtlprior/objective.hpp"
#include "mtlprior/solvers.hpp"
#include "mtlprior/verification.hpp"

namespace mtlprior {

// ---- synthetic data -------------------------------------------------------

struct SyntheticSpec {
  Eigen::Index d = 20;
  Eigen::Index m = 5;
  Eigen::Index n_per_task = 40;
  Eigen::Index active_rows = 5;  // nonzero rows of the true coefficient matrix
  double smoothness_drift = 0.1;  // random-walk scale between adjacent columns
  double noise_std = 0.1;
  std::uint64_t seed = 0;
  // When > 0 every X_i has singular values spaced geometrically so that
  // X_i^T X_i has exactly this condition number (largest eigenvalue n).
  // Otherwise entries are i.i.d. standard normal.
  double condition = 0.0;
};

struct SyntheticData {
  std::vector<TaskData> tasks;
  CoefficientMatrix true_P;
  std::vector<Eigen::Index> active;  // indices of the nonzero rows, ascending
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Parses "d=50,m=10,n=100,k=10,cond=100,seed=7" (also drift=, noise=).
SyntheticSpec parse_synthetic_spec(std::string_view text);

// ---- CSV ------------------------------------------------------------------

/// One file per task: header row, last column is the response.
TaskData read_task_csv(const std::filesystem::path& path, int task_id);
std::vector<TaskData> load_tasks_csv(const std::vector<std::filesystem::path>& paths);
void write_task_csv(const std::filesystem::path& path, const TaskData& task);

/// Dense numeric matrix, no header. An empty file is a 0 x expected_cols matrix.
Matrix read_matrix_csv(const std::filesystem::path& path,
                       std::optional<Eigen::Index> expected_cols = std::nullopt);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& matrix);

/// D as a dense s x d CSV; provenance, when present, lives in the sibling
/// "<stem>.provenance.json".
PriorMatrix load_prior_csv(const std::filesystem::path& path,
                           std::optional<Eigen::Index> expected_d = std::nullopt);
void write_prior_csv(const std::filesystem::path& path, const PriorMatrix& prior);
std::filesystem::path provenance_path(const std::filesystem::path& prior_path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// ---- holdout split ----------------------------------------------------------

/// An absolute per-task count or a fraction of each task's samples.
using TrainSize = std::variant<std::size_t, double>;

struct HoldoutSplit {
  std::vector<TaskData> train;
  std::vector<TaskData> test;
};

HoldoutSplit split_holdout(const std::vector<TaskData>& tasks, TrainSize train_size,
                           std::uint64_t seed);

// ---- traces and reports ---------------------------------------------------

struct TraceRow {
  int k = 0;
  std::string algorithm;
  double objective = 0.0;
  std::optional<double> stepsize;  // absent at k = 0
};

/// Columns k,algorithm,objective,stepsize; one block per result.
void write_trace_csv(const std::vector<SolverResult>& results, const std::filesystem::path& path);
std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const SmoothnessConstants& constants);
nlohmann::ordered_json to_json(const SolverConfig& config);
nlohmann::ordered_json to_json(const ConvergenceCertificate& certificate);
nlohmann::ordered_json to_json(const RegularizationParams& params);
nlohmann::ordered_json summary_json(const SolverResult& result);

/// Writes {"certificates", "metrics", "config", "constants"} in that order.
void write_report_json(const std::filesystem::path& path,
                       const nlohmann::ordered_json& certificates,
                       const nlohmann::ordered_json& metrics,
                       const nlohmann::ordered_json& config,
                       const nlohmann::ordered_json& constants);

}  // namespace mtlprior

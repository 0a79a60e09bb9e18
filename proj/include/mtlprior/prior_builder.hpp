#pragma once

#include <cstdint>
#include <vector>

#include "mtlprior/model.hpp"

namespace mtlprior {

enum class PriorMode { Natural, Artificial };

struct PriorBuildConfig {
  PriorMode mode = PriorMode::Natural;
  double correlation_threshold = 0.9;  // in (0, 1]
  std::optional<std::size_t> max_constraints;  // d when absent
  bool include_negative = false;
  double duplicate_fraction = 0.05;  // in [0, 1]
  std::uint64_t seed = 0;
};

void validate_prior_config(const PriorBuildConfig& config);

struct NaturalPrior {
  PriorMatrix prior;
  std::vector<std::size_t> zero_variance_features;  // excluded from pairing
};

/// Pearson correlation of the row-stacked features; pairs with
/// |corr| >= threshold become rows e_i - e_j (or e_i + e_j for negative
/// correlation when include_negative is set), strongest first.
NaturalPrior build_natural(const std::vector<TaskData>& tasks, const PriorBuildConfig& config);

struct ArtificialPrior {
  std::vector<TaskData> tasks;  // every task gains the same duplicated columns
  PriorMatrix prior;            // one row e_original - e_copy per duplicate
};

/// Appends exact copies of ceil(fraction * d) seeded-random feature columns.
ArtificialPrior build_artificial(const std::vector<TaskData>& tasks,
                                 const PriorBuildConfig& config);

/// Pearson correlation matrix of the rows of `samples`; entries involving a
/// zero-variance column are 0.
Matrix pearson_correlation(const Matrix& samples);

Matrix stack_features(const std::vector<TaskData>& tasks);

}  // namespace mtlprior

#include "mtlprior/prior_builder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <tuple>

namespace mtlprior {

void validate_prior_config(const PriorBuildConfig& config) {
  if (!(config.correlation_threshold > 0.0 && config.correlation_threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "correlation_threshold must lie in (0, 1]");
  }
  if (!(config.duplicate_fraction >= 0.0 && config.duplicate_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "duplicate_fraction must lie in [0, 1]");
  }
}

Matrix stack_features(const std::vector<TaskData>& tasks) {
  if (tasks.empty()) return Matrix(0, 0);
  const Eigen::Index d = tasks.front().dim();
  Eigen::Index rows = 0;
  for (const auto& t : tasks) {
    if (t.dim() != d) {
      throw Error(ErrorKind::DimensionMismatch,
                  "task " + std::to_string(t.task_id) + " has a different feature count");
    }
    rows += t.samples();
  }
  Matrix stacked(rows, d);
  Eigen::Index offset = 0;
  for (const auto& t : tasks) {
    stacked.middleRows(offset, t.samples()) = t.features;
    offset += t.samples();
  }
  return stacked;
}

Matrix pearson_correlation(const Matrix& samples) {
  const Eigen::Index n = samples.rows();
  const Matrix centered = samples.rowwise() - samples.colwise().mean();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
  const Vector sd = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  Matrix corr = Matrix::Zero(cov.rows(), cov.cols());
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    for (Eigen::Index j = 0; j < cov.cols(); ++j) {
      if (sd(i) > 0.0 && sd(j) > 0.0) {
        corr(i, j) = std::clamp(cov(i, j) / (sd(i) * sd(j)), -1.0, 1.0);
      }
    }
  }
  return corr;
}

NaturalPrior build_natural(const std::vector<TaskData>& tasks, const PriorBuildConfig& config) {
  validate_prior_config(config);
  const Matrix stacked = stack_features(tasks);
  if (stacked.rows() < 2) {
    throw Error(ErrorKind::InsufficientSamples,
                "correlation needs at least 2 samples, got " + std::to_string(stacked.rows()));
  }
  const Eigen::Index d = stacked.cols();
  NaturalPrior out;

  const Matrix centered = stacked.rowwise() - stacked.colwise().mean();
  std::vector<bool> usable(static_cast<std::size_t>(d), true);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (centered.col(j).squaredNorm() == 0.0) {
      usable[static_cast<std::size_t>(j)] = false;
      out.zero_variance_features.push_back(static_cast<std::size_t>(j));
    }
  }
  const Matrix corr = pearson_correlation(stacked);

  // (|corr|, i, j, corr); ties keep index order
  std::vector<std::tuple<double, Eigen::Index, Eigen::Index, double>> pairs;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!usable[static_cast<std::size_t>(i)]) continue;
    for (Eigen::Index j = i + 1; j < d; ++j) {
      if (!usable[static_cast<std::size_t>(j)]) continue;
      const double r = corr(i, j);
      if (std::abs(r) < config.correlation_threshold) continue;
      if (r < 0.0 && !config.include_negative) continue;
      pairs.emplace_back(std::abs(r), i, j, r);
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
  const std::size_t cap = config.max_constraints.value_or(static_cast<std::size_t>(d));
  if (pairs.size() > cap) pairs.resize(cap);

  out.prior.rows = Matrix::Zero(static_cast<Eigen::Index>(pairs.size()), d);
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const auto& [strength, i, j, value] = pairs[r];
    const auto row = static_cast<Eigen::Index>(r);
    out.prior.rows(row, i) = 1.0;
    out.prior.rows(row, j) = value >= 0.0 ? -1.0 : 1.0;
    out.prior.provenance.push_back(
        {PriorKind::Natural, {static_cast<std::size_t>(i), static_cast<std::size_t>(j)}, value});
  }
  return out;
}

ArtificialPrior build_artificial(const std::vector<TaskData>& tasks,
                                 const PriorBuildConfig& config) {
  validate_prior_config(config);
  if (tasks.empty()) throw Error(ErrorKind::InvalidArgument, "no tasks given");
  const Eigen::Index d = tasks.front().dim();
  for (const auto& t : tasks) {
    if (t.dim() != d) {
      throw Error(ErrorKind::DimensionMismatch,
                  "task " + std::to_string(t.task_id) + " has a different feature count");
    }
  }
  // The small offset keeps e.g. 0.05 * 100 from rounding up to 6.
  const auto count = static_cast<Eigen::Index>(
      std::ceil(config.duplicate_fraction * static_cast<double>(d) - 1e-9));

  std::vector<Eigen::Index> all(static_cast<std::size_t>(d));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  std::vector<Eigen::Index> chosen;
  std::mt19937_64 rng(config.seed);
  std::sample(all.begin(), all.end(), std::back_inserter(chosen), count, rng);

  ArtificialPrior out;
  const Eigen::Index augmented = d + count;
  for (const auto& t : tasks) {
    TaskData copy = t;
    copy.features.conservativeResize(Eigen::NoChange, augmented);
    for (Eigen::Index c = 0; c < count; ++c) {
      copy.features.col(d + c) = t.features.col(chosen[static_cast<std::size_t>(c)]);
    }
    out.tasks.push_back(std::move(copy));
  }
  out.prior.rows = Matrix::Zero(count, augmented);
  for (Eigen::Index c = 0; c < count; ++c) {
    const Eigen::Index original = chosen[static_cast<std::size_t>(c)];
    out.prior.rows(c, original) = 1.0;
    out.prior.rows(c, d + c) = -1.0;
    out.prior.provenance.push_back(
        {PriorKind::Artificial,
         {static_cast<std::size_t>(original), static_cast<std::size_t>(d + c)},
         std::nullopt});
  }
  return out;
}

}  // namespace mtlprior

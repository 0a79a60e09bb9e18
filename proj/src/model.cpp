#include "mtlprior/model.hpp"

#include <cmath>
#include <string>

namespace mtlprior {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::NonFiniteEntry: return "non-finite-entry";
    case ErrorKind::NegativeParameter: return "negative-parameter";
    case ErrorKind::NonPositiveEta: return "nonpositive-eta";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::StrongConvexityUnavailable: return "strong-convexity-unavailable";
    case ErrorKind::SearchCapExceeded: return "search-cap-exceeded";
    case ErrorKind::InapplicablePrecondition: return "inapplicable-precondition";
    case ErrorKind::MissingReference: return "missing-reference";
    case ErrorKind::InsufficientSamples: return "insufficient-samples";
    case ErrorKind::UndefinedMetric: return "undefined-metric";
    case ErrorKind::DegenerateLabels: return "degenerate-labels";
    case ErrorKind::TrainSizeTooLarge: return "train-size-too-large";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::IoError: return "io-error";
  }
  return "unknown";
}

std::string_view to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::Natural: return "natural";
    case PriorKind::Artificial: return "artificial";
    case PriorKind::User: return "user";
  }
  return "user";
}

PriorKind parse_prior_kind(std::string_view text) {
  if (text == "natural") return PriorKind::Natural;
  if (text == "artificial") return PriorKind::Artificial;
  if (text == "user") return PriorKind::User;
  throw Error(ErrorKind::InvalidArgument, "unknown prior kind '" + std::string(text) + "'");
}

void validate_params(const RegularizationParams& params) {
  auto check = [](double value, const char* name) {
    if (!std::isfinite(value)) {
      throw Error(ErrorKind::NonFiniteEntry, std::string(name) + " is not finite");
    }
    if (value < 0.0) {
      throw Error(ErrorKind::NegativeParameter,
                  std::string(name) + " = " + std::to_string(value) + " must be >= 0");
    }
  };
  check(params.lambda, "lambda");
  check(params.theta, "theta");
  check(params.epsilon, "epsilon");
}

void validate_task(const TaskData& task, Eigen::Index d) {
  const std::string label = "task " + std::to_string(task.task_id);
  if (task.samples() < 1) {
    throw Error(ErrorKind::DimensionMismatch, label + " has no samples");
  }
  if (task.dim() != d) {
    throw Error(ErrorKind::DimensionMismatch, label + " has " + std::to_string(task.dim()) +
                                                  " features, expected " + std::to_string(d));
  }
  if (task.responses.size() != task.samples()) {
    throw Error(ErrorKind::DimensionMismatch,
                label + " has " + std::to_string(task.responses.size()) + " responses for " +
                    std::to_string(task.samples()) + " feature rows");
  }
  if (!task.features.allFinite() || !task.responses.allFinite()) {
    throw Error(ErrorKind::NonFiniteEntry, label + " contains NaN or Inf");
  }
}

void validate_prior(const PriorMatrix& prior, Eigen::Index d) {
  if (prior.rows.cols() != d) {
    throw Error(ErrorKind::DimensionMismatch, "prior matrix has " +
                                                  std::to_string(prior.rows.cols()) +
                                                  " columns, expected " + std::to_string(d));
  }
  if (!prior.rows.allFinite()) {
    throw Error(ErrorKind::NonFiniteEntry, "prior matrix contains NaN or Inf");
  }
  if (!prior.provenance.empty() &&
      static_cast<Eigen::Index>(prior.provenance.size()) != prior.rows.rows()) {
    throw Error(ErrorKind::DimensionMismatch,
                "prior provenance has " + std::to_string(prior.provenance.size()) +
                    " records for " + std::to_string(prior.rows.rows()) + " rows");
  }
  for (std::size_t r = 0; r < prior.provenance.size(); ++r) {
    if (prior.provenance[r].kind == PriorKind::User) continue;
    const auto row = prior.rows.row(static_cast<Eigen::Index>(r));
    int nonzeros = 0;
    bool unit = true;
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      if (row(j) != 0.0) {
        ++nonzeros;
        unit = unit && std::abs(row(j)) == 1.0;
      }
    }
    if (nonzeros != 2 || !unit) {
      throw Error(ErrorKind::InvalidArgument,
                  "prior row " + std::to_string(r) + " must hold exactly two entries of +-1");
    }
  }
}

ProblemInstance validate_instance(const ProblemInstance& instance) {
  if (instance.tasks.empty()) {
    throw Error(ErrorKind::DimensionMismatch, "instance has no tasks");
  }
  validate_params(instance.params);
  const Eigen::Index d = instance.tasks.front().dim();
  if (d < 1) {
    throw Error(ErrorKind::DimensionMismatch, "instance has no features");
  }
  for (const auto& task : instance.tasks) validate_task(task, d);
  validate_prior(instance.prior, d);
  return instance;
}

void check_coefficients(const ProblemInstance& instance, const CoefficientMatrix& P) {
  if (P.rows() != instance.dim() || P.cols() != instance.num_tasks()) {
    throw Error(ErrorKind::DimensionMismatch,
                "coefficient matrix is " + std::to_string(P.rows()) + "x" +
                    std::to_string(P.cols()) + ", expected " + std::to_string(instance.dim()) +
                    "x" + std::to_string(instance.num_tasks()));
  }
}

CoefficientMatrix zero_coefficients(const ProblemInstance& instance) {
  return CoefficientMatrix::Zero(instance.dim(), instance.num_tasks());
}

}  // namespace mtlprior

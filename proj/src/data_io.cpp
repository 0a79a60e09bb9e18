#include "mtlprior/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace mtlprior {

namespace fs = std::filesystem;

// ---- synthetic data -------------------------------------------------------

namespace {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  }
  return out;
}

Matrix orthonormal_columns(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  const Matrix z = gaussian_matrix(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(z);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

Matrix conditioned_features(Eigen::Index n, Eigen::Index d, double condition,
                            std::mt19937_64& rng) {
  const Eigen::Index r = std::min(n, d);
  const Matrix left = orthonormal_columns(n, r, rng);
  const Matrix right = orthonormal_columns(d, r, rng);
  Vector singular(r);
  for (Eigen::Index j = 0; j < r; ++j) {
    const double position = r > 1 ? static_cast<double>(j) / static_cast<double>(r - 1) : 0.0;
    singular(j) = std::sqrt(static_cast<double>(n)) * std::pow(condition, -0.5 * position);
  }
  return left * singular.asDiagonal() * right.transpose();
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.d < 1 || spec.m < 1 || spec.n_per_task < 1) {
    throw Error(ErrorKind::InvalidArgument, "d, m and n must be >= 1");
  }
  if (spec.active_rows < 0 || spec.active_rows > spec.d) {
    throw Error(ErrorKind::InvalidArgument, "active rows must lie in [0, d]");
  }
  if (spec.smoothness_drift < 0.0 || spec.noise_std < 0.0 || spec.condition < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "drift, noise and condition must be >= 0");
  }
  if (spec.condition > 0.0 && spec.condition < 1.0) {
    throw Error(ErrorKind::InvalidArgument, "condition number must be >= 1");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal;

  SyntheticData out;
  std::vector<Eigen::Index> all(static_cast<std::size_t>(spec.d));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  std::sample(all.begin(), all.end(), std::back_inserter(out.active), spec.active_rows, rng);

  out.true_P = CoefficientMatrix::Zero(spec.d, spec.m);
  for (Eigen::Index row : out.active) out.true_P(row, 0) = normal(rng);
  for (Eigen::Index j = 1; j < spec.m; ++j) {
    out.true_P.col(j) = out.true_P.col(j - 1);
    for (Eigen::Index row : out.active) {
      out.true_P(row, j) += spec.smoothness_drift * normal(rng);
    }
  }

  for (Eigen::Index i = 0; i < spec.m; ++i) {
    TaskData task;
    task.task_id = static_cast<int>(i);
    task.features = spec.condition > 0.0
                        ? conditioned_features(spec.n_per_task, spec.d, spec.condition, rng)
                        : gaussian_matrix(spec.n_per_task, spec.d, rng);
    task.responses = task.features * out.true_P.col(i);
    for (Eigen::Index r = 0; r < spec.n_per_task; ++r) {
      task.responses(r) += spec.noise_std * normal(rng);
    }
    out.tasks.push_back(std::move(task));
  }
  return out;
}

namespace {

double parse_number(std::string_view text, const std::string& context) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::ParseError, context + ": cannot parse '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "' for writing");
  return out;
}

void finish_output(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "failed writing '" + path.string() + "'");
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

SyntheticSpec parse_synthetic_spec(std::string_view text) {
  SyntheticSpec spec;
  if (blank(text)) return spec;
  for (std::string_view field : split_commas(text)) {
    const std::size_t eq = field.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::ParseError, "synthetic spec field '" + std::string(field) +
                                             "' is not key=value");
    }
    const std::string key = trim(field.substr(0, eq));
    const double value = parse_number(field.substr(eq + 1), "synthetic spec '" + key + "'");
    auto as_index = [&]() {
      if (value < 0 || value != std::floor(value)) {
        throw Error(ErrorKind::ParseError, "synthetic spec '" + key + "' must be a whole number");
      }
      return static_cast<Eigen::Index>(value);
    };
    if (key == "d") spec.d = as_index();
    else if (key == "m") spec.m = as_index();
    else if (key == "n") spec.n_per_task = as_index();
    else if (key == "k") spec.active_rows = as_index();
    else if (key == "drift") spec.smoothness_drift = value;
    else if (key == "noise") spec.noise_std = value;
    else if (key == "cond") spec.condition = value;
    else if (key == "seed") spec.seed = static_cast<std::uint64_t>(as_index());
    else throw Error(ErrorKind::ParseError, "unknown synthetic spec key '" + key + "'");
  }
  return spec;
}

// ---- CSV ------------------------------------------------------------------

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  (void)ec;
  return std::string(buffer, ptr);
}

TaskData read_task_csv(const fs::path& path, int task_id) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  bool header_seen = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = strip_cr(line);
    if (blank(view)) continue;
    const auto fields = split_commas(view);
    const std::string where = path.string() + " line " + std::to_string(line_no);
    if (!header_seen) {
      header_seen = true;
      columns = fields.size();
      if (columns < 2) {
        throw Error(ErrorKind::ParseError, where + ": need at least one feature and a response");
      }
      continue;
    }
    if (fields.size() != columns) {
      throw Error(ErrorKind::ParseError, where + ": expected " + std::to_string(columns) +
                                             " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> values;
    values.reserve(columns);
    for (auto f : fields) values.push_back(parse_number(f, where));
    rows.push_back(std::move(values));
  }
  if (!header_seen) throw Error(ErrorKind::ParseError, path.string() + ": missing header row");

  TaskData task;
  task.task_id = task_id;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(columns - 1);
  task.features.resize(n, d);
  task.responses.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& values = rows[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < d; ++c) task.features(r, c) = values[static_cast<std::size_t>(c)];
    task.responses(r) = values.back();
  }
  validate_task(task, d);
  return task;
}

std::vector<TaskData> load_tasks_csv(const std::vector<fs::path>& paths) {
  std::vector<TaskData> tasks;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    tasks.push_back(read_task_csv(paths[i], static_cast<int>(i)));
    if (tasks.back().dim() != tasks.front().dim()) {
      throw Error(ErrorKind::DimensionMismatch,
                  paths[i].string() + " has " + std::to_string(tasks.back().dim()) +
                      " features, expected " + std::to_string(tasks.front().dim()));
    }
  }
  return tasks;
}

void write_task_csv(const fs::path& path, const TaskData& task) {
  std::ofstream out = open_output(path);
  for (Eigen::Index c = 0; c < task.dim(); ++c) out << 'x' << (c + 1) << ',';
  out << "y\n";
  for (Eigen::Index r = 0; r < task.samples(); ++r) {
    for (Eigen::Index c = 0; c < task.dim(); ++c) out << format_double(task.features(r, c)) << ',';
    out << format_double(task.responses(r)) << '\n';
  }
  finish_output(out, path);
}

Matrix read_matrix_csv(const fs::path& path, std::optional<Eigen::Index> expected_cols) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = strip_cr(line);
    if (blank(view)) continue;
    const std::string where = path.string() + " line " + std::to_string(line_no);
    std::vector<double> values;
    for (auto f : split_commas(view)) values.push_back(parse_number(f, where));
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw Error(ErrorKind::ParseError, where + ": expected " +
                                             std::to_string(rows.front().size()) +
                                             " fields, found " + std::to_string(values.size()));
    }
    rows.push_back(std::move(values));
  }
  const Eigen::Index cols =
      rows.empty() ? expected_cols.value_or(0) : static_cast<Eigen::Index>(rows.front().size());
  if (expected_cols && cols != *expected_cols) {
    throw Error(ErrorKind::DimensionMismatch, path.string() + " has " + std::to_string(cols) +
                                                  " columns, expected " +
                                                  std::to_string(*expected_cols));
  }
  Matrix out(static_cast<Eigen::Index>(rows.size()), cols);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      out(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  return out;
}

void write_matrix_csv(const fs::path& path, const Matrix& matrix) {
  std::ofstream out = open_output(path);
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      if (c > 0) out << ',';
      out << format_double(matrix(r, c));
    }
    out << '\n';
  }
  finish_output(out, path);
}

fs::path provenance_path(const fs::path& prior_path) {
  fs::path p = prior_path;
  p.replace_extension(".provenance.json");
  return p;
}

PriorMatrix load_prior_csv(const fs::path& path, std::optional<Eigen::Index> expected_d) {
  PriorMatrix prior;
  prior.rows = read_matrix_csv(path, expected_d);
  const fs::path side = provenance_path(path);
  if (fs::exists(side)) {
    std::ifstream in = open_input(side);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
      for (const auto& item : doc.at("rows")) {
        PriorProvenance p;
        p.kind = parse_prior_kind(item.at("kind").get<std::string>());
        p.feature_indices = {item.at("i").get<std::size_t>(), item.at("j").get<std::size_t>()};
        if (item.contains("statistic") && !item.at("statistic").is_null()) {
          p.statistic = item.at("statistic").get<double>();
        }
        prior.provenance.push_back(p);
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ParseError, side.string() + ": " + e.what());
    }
  }
  validate_prior(prior, prior.rows.cols());
  return prior;
}

void write_prior_csv(const fs::path& path, const PriorMatrix& prior) {
  write_matrix_csv(path, prior.rows);
  if (prior.provenance.empty()) return;
  nlohmann::ordered_json doc;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& p : prior.provenance) {
    nlohmann::ordered_json item;
    item["kind"] = std::string(to_string(p.kind));
    item["i"] = p.feature_indices.first;
    item["j"] = p.feature_indices.second;
    item["statistic"] = p.statistic ? nlohmann::ordered_json(*p.statistic) : nullptr;
    doc["rows"].push_back(item);
  }
  const fs::path side = provenance_path(path);
  std::ofstream out = open_output(side);
  out << doc.dump(2) << '\n';
  finish_output(out, side);
}

// ---- holdout split ----------------------------------------------------------

HoldoutSplit split_holdout(const std::vector<TaskData>& tasks, TrainSize train_size,
                           std::uint64_t seed) {
  HoldoutSplit split;
  std::mt19937_64 rng(seed);
  for (const auto& task : tasks) {
    const auto n = static_cast<std::size_t>(task.samples());
    std::size_t count = 0;
    if (const auto* fixed = std::get_if<std::size_t>(&train_size)) {
      count = *fixed;
    } else {
      const double fraction = std::get<double>(train_size);
      if (!(fraction > 0.0 && fraction < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "train fraction must lie in (0, 1)");
      }
      count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    }
    if (count >= n) {
      throw Error(ErrorKind::TrainSizeTooLarge,
                  "task " + std::to_string(task.task_id) + ": train size " +
                      std::to_string(count) + " leaves no test samples out of " +
                      std::to_string(n));
    }
    if (count == 0) {
      throw Error(ErrorKind::InvalidArgument,
                  "task " + std::to_string(task.task_id) + ": train size rounds to 0");
    }
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), rng);

    auto take = [&task](const std::vector<Eigen::Index>& idx) {
      TaskData part;
      part.task_id = task.task_id;
      part.features = task.features(idx, Eigen::all);
      part.responses = task.responses(idx);
      return part;
    };
    const std::vector<Eigen::Index> train(order.begin(), order.begin() + static_cast<long>(count));
    const std::vector<Eigen::Index> test(order.begin() + static_cast<long>(count), order.end());
    split.train.push_back(take(train));
    split.test.push_back(take(test));
  }
  return split;
}

// ---- traces and reports ---------------------------------------------------

void write_trace_csv(const std::vector<SolverResult>& results, const fs::path& path) {
  std::ofstream out = open_output(path);
  out << "k,algorithm,objective,stepsize\n";
  for (const auto& result : results) {
    const std::string name(to_string(result.algorithm));
    for (std::size_t k = 0; k < result.objective_trace.size(); ++k) {
      out << k << ',' << name << ',' << format_double(result.objective_trace[k]) << ',';
      if (k > 0) out << format_double(result.stepsize_trace[k - 1]);
      out << '\n';
    }
  }
  finish_output(out, path);
}

std::vector<TraceRow> read_trace_csv(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = strip_cr(line);
    if (line_no == 1) {
      if (view != "k,algorithm,objective,stepsize") {
        throw Error(ErrorKind::ParseError, path.string() + " line 1: unexpected trace header");
      }
      continue;
    }
    if (blank(view)) continue;
    const auto fields = split_commas(view);
    const std::string where = path.string() + " line " + std::to_string(line_no);
    if (fields.size() != 4) throw Error(ErrorKind::ParseError, where + ": expected 4 fields");
    TraceRow row;
    row.k = static_cast<int>(parse_number(fields[0], where));
    row.algorithm = std::string(fields[1]);
    row.objective = parse_number(fields[2], where);
    if (!blank(fields[3])) row.stepsize = parse_number(fields[3], where);
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json to_json(const SmoothnessConstants& c) {
  nlohmann::ordered_json j;
  j["per_task_smax"] = c.per_task_smax;
  j["per_task_smin"] = c.per_task_smin;
  j["d_max"] = c.d_max;
  j["d_min"] = c.d_min;
  j["chain_max"] = c.chain_max;
  j["L_paper"] = c.L_paper;
  j["L_safe"] = c.L_safe;
  j["sigma_paper"] = c.sigma_paper;
  j["sigma_safe"] = c.sigma_safe;
  j["condition_c"] = c.condition_c ? nlohmann::ordered_json(*c.condition_c) : nullptr;
  j["eigen_converged"] = c.eigen_converged;
  j["max_eigen_residual"] = c.max_eigen_residual;
  return j;
}

nlohmann::ordered_json to_json(const RegularizationParams& p) {
  nlohmann::ordered_json j;
  j["lambda"] = p.lambda;
  j["theta"] = p.theta;
  j["epsilon"] = p.epsilon;
  return j;
}

nlohmann::ordered_json to_json(const SolverConfig& c) {
  nlohmann::ordered_json j;
  j["algorithm"] = std::string(to_string(c.algorithm));
  j["max_iterations"] = c.max_iterations;
  j["objective_tolerance"] = c.objective_tolerance;
  j["beta_shrink"] = c.beta_shrink;
  j["beta_grow"] = c.beta_grow;
  j["constants_source"] = std::string(to_string(c.constants_source));
  j["initial_P"] = c.initial_P ? "given" : "zero";
  j["search_cap"] = c.search_cap;
  j["backtracking_eta0"] =
      c.backtracking_eta0 ? nlohmann::ordered_json(*c.backtracking_eta0) : nullptr;
  j["target_objective"] =
      c.target_objective ? nlohmann::ordered_json(*c.target_objective) : nullptr;
  j["momentum_patience"] = c.momentum_patience;
  return j;
}

nlohmann::ordered_json to_json(const ConvergenceCertificate& c) {
  auto finite_or_null = [](const std::vector<double>& values) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (double v : values) {
      arr.push_back(std::isfinite(v) ? nlohmann::ordered_json(v) : nullptr);
    }
    return arr;
  };
  nlohmann::ordered_json j;
  j["reference_optimum_F"] = c.reference_optimum_F;
  j["satisfied"] = c.satisfied;
  j["max_violation"] = c.max_violation;
  j["slack"] = c.slack;
  j["V_trace"] = finite_or_null(c.V_trace);
  j["bound_trace"] = finite_or_null(c.bound_trace);
  if (!c.lyapunov_trace.empty()) {
    j["lyapunov_trace"] = finite_or_null(c.lyapunov_trace);
    j["lyapunov_bound_trace"] = finite_or_null(c.lyapunov_bound_trace);
  }
  return j;
}

nlohmann::ordered_json summary_json(const SolverResult& r) {
  nlohmann::ordered_json j;
  j["algorithm"] = std::string(to_string(r.algorithm));
  j["iterations"] = r.iterations;
  j["termination"] = std::string(to_string(r.termination));
  j["final_objective"] = r.objective_trace.back();
  j["lipschitz"] = r.lipschitz;
  j["min_stepsize_ratio"] = r.min_stepsize_ratio;
  j["max_stepsize_ratio"] = r.max_stepsize_ratio;
  return j;
}

void write_report_json(const fs::path& path, const nlohmann::ordered_json& certificates,
                       const nlohmann::ordered_json& metrics,
                       const nlohmann::ordered_json& config,
                       const nlohmann::ordered_json& constants) {
  nlohmann::ordered_json doc;
  doc["certificates"] = certificates;
  doc["metrics"] = metrics;
  doc["config"] = config;
  doc["constants"] = constants;
  std::ofstream out = open_output(path);
  out << doc.dump(2) << '\n';
  finish_output(out, path);
}

}  // namespace mtlprior

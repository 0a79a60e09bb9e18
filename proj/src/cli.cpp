#include "mtlprior/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "mtlprior/data_io.hpp"
#include "mtlprior/metrics.hpp"
#include "mtlprior/prior_builder.hpp"
#include "mtlprior/solvers.hpp"
#include "mtlprior/verification.hpp"

namespace mtlprior {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct ProblemOptions {
  std::vector<std::string> tasks;
  std::string prior;
  std::string synthetic;
  double lambda = 1.0;
  double theta = 1.0;
  double epsilon = 1.0;
};

struct SolverOptions {
  std::string algorithm = "ista-modified";
  double tolerance = 1e-3;
  int max_iterations = 10000;
  double beta_shrink = 0.5;
  double beta_grow = 2.0;
  std::string constants = "safe";
  int search_cap = 60;
  double eta0 = 0.0;  // 0: L / 100
  bool certify = false;
  int reference_iterations = kReferenceIterations;
};

void add_problem_options(CLI::App& cmd, ProblemOptions& o) {
  cmd.add_option("--tasks", o.tasks, "Task CSV files, one per task, in task order");
  cmd.add_option("--prior", o.prior, "Prior matrix D as CSV (optional)");
  cmd.add_option("--synthetic", o.synthetic,
                 "Generate the instance instead, e.g. d=50,m=10,n=100,k=10,cond=100,seed=7");
  cmd.add_option("--lambda", o.lambda, "Group-lasso weight")->capture_default_str();
  cmd.add_option("--theta", o.theta, "Prior-penalty weight")->capture_default_str();
  cmd.add_option("--epsilon", o.epsilon, "Adjacent-task smoothness weight")->capture_default_str();
}

void add_solver_options(CLI::App& cmd, SolverOptions& o) {
  cmd.add_option("--tol", o.tolerance, "Objective-change tolerance")->capture_default_str();
  cmd.add_option("--max-iter", o.max_iterations, "Iteration cap")->capture_default_str();
  cmd.add_option("--beta", o.beta_shrink, "Shrink factor of the modified step search")
      ->capture_default_str();
  cmd.add_option("--grow", o.beta_grow, "Grow factor of the backtracking baselines")
      ->capture_default_str();
  cmd.add_option("--constants", o.constants, "Lipschitz/strong-convexity constants: safe|paper")
      ->check(CLI::IsMember({"safe", "paper"}))
      ->capture_default_str();
  cmd.add_option("--search-cap", o.search_cap, "Max shrink/grow steps per iteration")
      ->capture_default_str();
  cmd.add_option("--eta0", o.eta0, "Initial eta of the backtracking baselines (default L/100)");
  cmd.add_flag("--certify", o.certify,
               "Estimate F* and check the convergence bounds of the run(s)");
  cmd.add_option("--reference-iter", o.reference_iterations,
                 "Iterations of the F* reference run")
      ->capture_default_str();
}

json problem_json(const ProblemOptions& o) {
  json j;
  j["tasks"] = o.tasks;
  j["prior"] = o.prior.empty() ? json(nullptr) : json(o.prior);
  j["synthetic"] = o.synthetic.empty() ? json(nullptr) : json(o.synthetic);
  j["lambda"] = o.lambda;
  j["theta"] = o.theta;
  j["epsilon"] = o.epsilon;
  return j;
}

std::vector<fs::path> as_paths(const std::vector<std::string>& names) {
  return {names.begin(), names.end()};
}

ProblemInstance load_problem(const ProblemOptions& o) {
  ProblemInstance instance;
  if (!o.synthetic.empty()) {
    if (!o.tasks.empty()) {
      throw Error(ErrorKind::InvalidArgument, "--tasks and --synthetic are mutually exclusive");
    }
    instance.tasks = generate_synthetic(parse_synthetic_spec(o.synthetic)).tasks;
  } else {
    if (o.tasks.empty()) throw Error(ErrorKind::InvalidArgument, "no --tasks given");
    instance.tasks = load_tasks_csv(as_paths(o.tasks));
  }
  const Eigen::Index d = instance.tasks.front().dim();
  instance.prior = o.prior.empty() ? PriorMatrix::empty(d) : load_prior_csv(o.prior, d);
  instance.params = {o.lambda, o.theta, o.epsilon};
  return validate_instance(instance);
}

SolverConfig make_config(const SolverOptions& o) {
  SolverConfig c;
  c.algorithm = parse_algorithm(o.algorithm);
  c.objective_tolerance = o.tolerance;
  c.max_iterations = o.max_iterations;
  c.beta_shrink = o.beta_shrink;
  c.beta_grow = o.beta_grow;
  c.constants_source = parse_constants_source(o.constants);
  c.search_cap = o.search_cap;
  if (o.eta0 > 0.0) c.backtracking_eta0 = o.eta0;
  validate_config(c);
  return c;
}

json certify(const ProblemInstance& instance, const SmoothnessConstants& constants,
             const SolverConfig& config, const SolverResult& result,
             const ReferenceOptimum& reference) {
  const double L = constants.lipschitz(config.constants_source);
  json j;
  j["algorithm"] = std::string(to_string(result.algorithm));
  switch (result.algorithm) {
    case Algorithm::GdConstant:
    case Algorithm::IstaModified:
      j["bound"] = "sublinear";
      j["certificate"] = to_json(check_sublinear_bound(result, reference, L));
      break;
    case Algorithm::LinearMomentum:
      j["bound"] = "linear";
      j["certificate"] = to_json(
          check_linear_bound(result, reference, L, constants.strong_convexity(config.constants_source)));
      break;
    default:
      j["bound"] = nullptr;
      j["final_gap"] = result.objective_trace.back() - reference.F;
      break;
  }
  (void)instance;
  return j;
}

json regression_metrics(const ProblemInstance& instance, const CoefficientMatrix& P) {
  std::vector<Vector> truth;
  std::vector<Vector> predicted;
  for (std::size_t i = 0; i < instance.tasks.size(); ++i) {
    truth.push_back(instance.tasks[i].responses);
    predicted.push_back(instance.tasks[i].features * P.col(static_cast<Eigen::Index>(i)));
  }
  json j;
  try {
    const double error = nmse(truth, predicted);
    j["train_nmse"] = error;
    j["train_ve"] = 1.0 - error;
  } catch (const Error&) {
    j["train_nmse"] = nullptr;
    j["train_ve"] = nullptr;
  }
  return j;
}

int cmd_solve(const ProblemOptions& po, SolverOptions so, const std::string& out_dir,
              std::ostream& out) {
  const ProblemInstance instance = load_problem(po);
  SolverConfig config = make_config(so);
  if (so.certify && config.algorithm == Algorithm::LinearMomentum) config.record_iterates = true;
  const SmoothnessConstants constants = compute_constants(instance);
  const SolverResult result = solve(instance, config);

  const fs::path dir(out_dir);
  write_trace_csv({result}, dir / "trace.csv");
  write_matrix_csv(dir / "coefficients.csv", result.final_P);

  json certificates = json::array();
  if (so.certify) {
    const ReferenceOptimum reference = estimate_optimum(instance, so.reference_iterations);
    certificates.push_back(certify(instance, constants, config, result, reference));
  }
  json metrics = regression_metrics(instance, result.final_P);
  metrics["solver"] = summary_json(result);
  json cfg = problem_json(po);
  cfg["solver"] = to_json(config);
  cfg["certify"] = so.certify;
  cfg["reference_iterations"] = so.reference_iterations;
  cfg["out"] = out_dir;
  write_report_json(dir / "report.json", certificates, metrics, cfg, to_json(constants));
  out << to_string(result.algorithm) << ": " << result.iterations << " iterations, F = "
      << format_double(result.objective_trace.back()) << " (" << to_string(result.termination)
      << ")\n";
  return 0;
}

int cmd_compare(const ProblemOptions& po, SolverOptions so, const std::string& out_dir,
                std::ostream& out, std::ostream& err) {
  const ProblemInstance instance = load_problem(po);
  SolverConfig base = make_config(so);
  base.record_iterates = so.certify;
  const SmoothnessConstants constants = compute_constants(instance);
  const auto entries = run_comparison(instance, comparison_configs(base));

  std::vector<SolverResult> results;
  json summaries = json::array();
  bool failed = false;
  for (const auto& e : entries) {
    if (e.result) {
      results.push_back(*e.result);
      summaries.push_back(summary_json(*e.result));
      out << to_string(e.algorithm) << ": " << e.result->iterations << " iterations, F = "
          << format_double(e.result->objective_trace.back()) << '\n';
    } else {
      failed = true;
      json j;
      j["algorithm"] = std::string(to_string(e.algorithm));
      j["error"] = e.error;
      summaries.push_back(j);
      err << to_string(e.algorithm) << " failed: " << e.error << '\n';
    }
  }
  const fs::path dir(out_dir);
  write_trace_csv(results, dir / "trace.csv");

  json certificates = json::array();
  if (so.certify) {
    const ReferenceOptimum reference = estimate_optimum(instance, so.reference_iterations);
    for (const auto& r : results) {
      SolverConfig c = base;
      c.algorithm = r.algorithm;
      certificates.push_back(certify(instance, constants, c, r, reference));
    }
  }
  json metrics;
  metrics["solvers"] = summaries;
  json cfg = problem_json(po);
  json solver = to_json(base);
  solver.erase("algorithm");
  cfg["solver"] = solver;
  cfg["certify"] = so.certify;
  cfg["reference_iterations"] = so.reference_iterations;
  cfg["out"] = out_dir;
  write_report_json(dir / "report.json", certificates, metrics, cfg, to_json(constants));
  return failed ? 1 : 0;
}

struct GenOptions {
  std::string synthetic;
  long long d = 20, m = 5, n = 40, k = 5;
  double drift = 0.1, noise = 0.1, cond = 0.0;
  unsigned long long seed = 0;
};

int cmd_gen(const GenOptions& g, const std::string& out_dir, std::ostream& out) {
  SyntheticSpec spec;
  if (!g.synthetic.empty()) {
    spec = parse_synthetic_spec(g.synthetic);
  } else {
    spec.d = g.d;
    spec.m = g.m;
    spec.n_per_task = g.n;
    spec.active_rows = g.k;
    spec.smoothness_drift = g.drift;
    spec.noise_std = g.noise;
    spec.condition = g.cond;
    spec.seed = g.seed;
  }
  const SyntheticData data = generate_synthetic(spec);
  const fs::path dir(out_dir);
  json files = json::array();
  for (std::size_t i = 0; i < data.tasks.size(); ++i) {
    const std::string name = "task_" + std::to_string(i + 1) + ".csv";
    write_task_csv(dir / name, data.tasks[i]);
    files.push_back(name);
  }
  write_matrix_csv(dir / "true_P.csv", data.true_P);
  json cfg;
  cfg["d"] = spec.d;
  cfg["m"] = spec.m;
  cfg["n"] = spec.n_per_task;
  cfg["k"] = spec.active_rows;
  cfg["drift"] = spec.smoothness_drift;
  cfg["noise"] = spec.noise_std;
  cfg["cond"] = spec.condition;
  cfg["seed"] = spec.seed;
  cfg["out"] = out_dir;
  json metrics;
  metrics["task_files"] = files;
  metrics["active_rows"] = data.active;
  write_report_json(dir / "report.json", json::array(), metrics, cfg, json::object());
  out << "wrote " << data.tasks.size() << " tasks to " << out_dir << '\n';
  return 0;
}

struct SplitOptions {
  std::vector<std::string> tasks;
  double train = 0.6;
  unsigned long long seed = 0;
};

int cmd_split(const SplitOptions& s, const std::string& out_dir, std::ostream& out) {
  const auto tasks = load_tasks_csv(as_paths(s.tasks));
  TrainSize size = s.train;
  if (s.train >= 1.0) {
    if (s.train != std::floor(s.train)) {
      throw Error(ErrorKind::InvalidArgument, "--train must be a fraction in (0,1) or a count");
    }
    size = static_cast<std::size_t>(s.train);
  }
  const HoldoutSplit split = split_holdout(tasks, size, s.seed);
  const fs::path dir(out_dir);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const fs::path name = fs::path(s.tasks[i]).filename();
    write_task_csv(dir / "train" / name, split.train[i]);
    write_task_csv(dir / "test" / name, split.test[i]);
  }
  json cfg;
  cfg["tasks"] = s.tasks;
  cfg["train"] = s.train;
  cfg["seed"] = s.seed;
  cfg["out"] = out_dir;
  write_report_json(dir / "report.json", json::array(), json::object(), cfg, json::object());
  out << "split " << tasks.size() << " tasks into " << out_dir << '\n';
  return 0;
}

struct PriorOptions {
  std::string mode = "natural";
  std::vector<std::string> tasks;
  double threshold = 0.9;
  long long max_constraints = -1;
  bool include_negative = false;
  double fraction = 0.05;
  unsigned long long seed = 0;
};

int cmd_prior(const PriorOptions& p, const std::string& out_dir, std::ostream& out,
              std::ostream& err) {
  const auto tasks = load_tasks_csv(as_paths(p.tasks));
  PriorBuildConfig config;
  config.mode = p.mode == "artificial" ? PriorMode::Artificial : PriorMode::Natural;
  config.correlation_threshold = p.threshold;
  if (p.max_constraints >= 0) config.max_constraints = static_cast<std::size_t>(p.max_constraints);
  config.include_negative = p.include_negative;
  config.duplicate_fraction = p.fraction;
  config.seed = p.seed;

  const fs::path dir(out_dir);
  PriorMatrix prior;
  json metrics;
  if (config.mode == PriorMode::Natural) {
    NaturalPrior built = build_natural(tasks, config);
    for (std::size_t j : built.zero_variance_features) {
      err << "warning: feature " << j << " has zero variance and was not paired\n";
    }
    metrics["zero_variance_features"] = built.zero_variance_features;
    prior = std::move(built.prior);
  } else {
    ArtificialPrior built = build_artificial(tasks, config);
    json files = json::array();
    for (std::size_t i = 0; i < built.tasks.size(); ++i) {
      const fs::path name = fs::path(p.tasks[i]).filename();
      write_task_csv(dir / name, built.tasks[i]);
      files.push_back(name.string());
    }
    metrics["augmented_task_files"] = files;
    metrics["augmented_d"] = built.tasks.front().dim();
    prior = std::move(built.prior);
  }
  write_prior_csv(dir / "D.csv", prior);
  metrics["constraints"] = prior.constraints();
  json cfg;
  cfg["mode"] = p.mode;
  cfg["tasks"] = p.tasks;
  cfg["threshold"] = p.threshold;
  cfg["max_constraints"] = p.max_constraints >= 0 ? json(p.max_constraints) : json(nullptr);
  cfg["include_negative"] = p.include_negative;
  cfg["fraction"] = p.fraction;
  cfg["seed"] = p.seed;
  cfg["out"] = out_dir;
  write_report_json(dir / "report.json", json::array(), metrics, cfg, json::object());
  out << "D has " << prior.constraints() << " rows and " << prior.rows.cols() << " columns\n";
  return 0;
}

struct EvalOptions {
  std::string kind = "regression";
  std::vector<std::string> truth;
  std::vector<std::string> pred;
  std::string coefficients;
  std::vector<std::string> tasks;
};

int cmd_eval(const EvalOptions& e, const std::string& out_dir, std::ostream& out) {
  std::vector<Vector> truth;
  std::vector<Vector> predicted;
  if (!e.coefficients.empty()) {
    const auto tasks = load_tasks_csv(as_paths(e.tasks));
    if (tasks.empty()) throw Error(ErrorKind::InvalidArgument, "no --tasks given");
    const Matrix P = read_matrix_csv(e.coefficients);
    if (P.rows() != tasks.front().dim() || P.cols() != static_cast<Eigen::Index>(tasks.size())) {
      throw Error(ErrorKind::DimensionMismatch, "coefficients do not match the task files");
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      truth.push_back(tasks[i].responses);
      predicted.push_back(tasks[i].features * P.col(static_cast<Eigen::Index>(i)));
    }
  } else {
    if (e.truth.size() != e.pred.size() || e.truth.empty()) {
      throw Error(ErrorKind::InvalidArgument,
                  "give matching --truth and --pred lists, or --coefficients with --tasks");
    }
    for (std::size_t i = 0; i < e.truth.size(); ++i) {
      truth.push_back(read_task_csv(e.truth[i], static_cast<int>(i)).responses);
      const Matrix p = read_matrix_csv(e.pred[i], 1);
      predicted.push_back(p.col(0));
    }
  }

  json metrics;
  if (e.kind == "regression") {
    const double error = nmse(truth, predicted);
    metrics["nmse"] = error;
    metrics["ve"] = 1.0 - error;
    out << "nMSE = " << format_double(error) << ", VE = " << format_double(1.0 - error) << '\n';
  } else {
    std::vector<RocCurve> curves;
    json per_task = json::array();
    for (std::size_t i = 0; i < truth.size(); ++i) {
      std::vector<double> scores(predicted[i].data(), predicted[i].data() + predicted[i].size());
      std::vector<int> labels;
      for (Eigen::Index r = 0; r < truth[i].size(); ++r) {
        const double y = truth[i](r);
        if (y != 0.0 && y != 1.0) {
          throw Error(ErrorKind::InvalidArgument, "classification labels must be 0 or 1");
        }
        labels.push_back(static_cast<int>(y));
      }
      curves.push_back(roc_auc(scores, labels));
      per_task.push_back(curves.back().auc);
    }
    const MacroRoc macro = macro_roc(curves);
    metrics["auc"] = per_task;
    metrics["mean_auc"] = macro.mean_auc;
    metrics["std_auc"] = macro.std_auc;
    metrics["fpr_grid"] = macro.grid;
    metrics["mean_tpr"] = macro.mean_tpr;
    metrics["std_tpr"] = macro.std_tpr;
    out << "mean AUC = " << format_double(macro.mean_auc) << " +- "
        << format_double(macro.std_auc) << '\n';
  }
  json cfg;
  cfg["kind"] = e.kind;
  cfg["truth"] = e.truth;
  cfg["pred"] = e.pred;
  cfg["coefficients"] = e.coefficients.empty() ? json(nullptr) : json(e.coefficients);
  cfg["tasks"] = e.tasks;
  cfg["out"] = out_dir;
  write_report_json(fs::path(out_dir) / "report.json", json::array(), metrics, cfg,
                    json::object());
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-task regression with feature-relation priors"};
  app.name("mtlprior");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "",
                 "TOML/INI file mirroring the flags, one [section] per subcommand");

  ProblemOptions problem;
  SolverOptions solver;
  std::string out_dir;

  auto* solve_cmd = app.add_subcommand("solve", "Solve one instance with one algorithm");
  add_problem_options(*solve_cmd, problem);
  add_solver_options(*solve_cmd, solver);
  solve_cmd->add_option("--algo", solver.algorithm, "Algorithm")
      ->check(CLI::IsMember({"gd-constant", "ista-modified", "ista-backtracking",
                             "fista-backtracking", "linear-momentum"}))
      ->capture_default_str();
  solve_cmd->add_option("--out", out_dir, "Output directory")->required();

  auto* compare_cmd = app.add_subcommand("compare", "Run all five algorithms from the same start");
  add_problem_options(*compare_cmd, problem);
  add_solver_options(*compare_cmd, solver);
  compare_cmd->add_option("--out", out_dir, "Output directory")->required();

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate synthetic tasks with a known P");
  gen_cmd->add_option("--synthetic", gen.synthetic, "Spec string, e.g. d=50,m=10,n=100,k=10");
  gen_cmd->add_option("--d", gen.d, "Features")->capture_default_str();
  gen_cmd->add_option("--m", gen.m, "Tasks")->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "Samples per task")->capture_default_str();
  gen_cmd->add_option("--k", gen.k, "Nonzero coefficient rows")->capture_default_str();
  gen_cmd->add_option("--drift", gen.drift, "Column random-walk scale")->capture_default_str();
  gen_cmd->add_option("--noise", gen.noise, "Response noise std")->capture_default_str();
  gen_cmd->add_option("--cond", gen.cond, "Condition number of X_i^T X_i (0: Gaussian X)")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--out", out_dir, "Output directory")->required();

  SplitOptions split;
  auto* split_cmd = app.add_subcommand("split", "Random train/test split per task");
  split_cmd->add_option("--tasks", split.tasks, "Task CSV files")->required();
  split_cmd->add_option("--train", split.train, "Train fraction in (0,1) or per-task count")
      ->capture_default_str();
  split_cmd->add_option("--seed", split.seed, "Random seed")->capture_default_str();
  split_cmd->add_option("--out", out_dir, "Output directory")->required();

  PriorOptions prior;
  auto* prior_cmd = app.add_subcommand("prior", "Build the prior matrix D");
  prior_cmd->add_option("--mode", prior.mode, "natural|artificial")
      ->check(CLI::IsMember({"natural", "artificial"}))
      ->capture_default_str();
  prior_cmd->add_option("--tasks", prior.tasks, "Task CSV files")->required();
  prior_cmd->add_option("--threshold", prior.threshold, "Minimum |correlation|")
      ->capture_default_str();
  prior_cmd->add_option("--max-constraints", prior.max_constraints,
                        "Cap on D rows (default: d)");
  prior_cmd->add_flag("--include-negative", prior.include_negative,
                      "Also pair negatively correlated features");
  prior_cmd->add_option("--fraction", prior.fraction, "Fraction of features to duplicate")
      ->capture_default_str();
  prior_cmd->add_option("--seed", prior.seed, "Random seed")->capture_default_str();
  prior_cmd->add_option("--out", out_dir, "Output directory")->required();

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Compute VE/nMSE or ROC/AUC");
  eval_cmd->add_option("--kind", eval.kind, "regression|classification")
      ->check(CLI::IsMember({"regression", "classification"}))
      ->capture_default_str();
  eval_cmd->add_option("--truth", eval.truth, "Task CSVs holding the true responses");
  eval_cmd->add_option("--pred", eval.pred, "One-column prediction files, one per task");
  eval_cmd->add_option("--coefficients", eval.coefficients, "Coefficient matrix CSV");
  eval_cmd->add_option("--tasks", eval.tasks, "Test task CSVs used with --coefficients");
  eval_cmd->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(problem, solver, out_dir, out);
    if (compare_cmd->parsed()) return cmd_compare(problem, solver, out_dir, out, err);
    if (gen_cmd->parsed()) return cmd_gen(gen, out_dir, out);
    if (split_cmd->parsed()) return cmd_split(split, out_dir, out);
    if (prior_cmd->parsed()) return cmd_prior(prior, out_dir, out, err);
    if (eval_cmd->parsed()) return cmd_eval(eval, out_dir, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace mtlprior

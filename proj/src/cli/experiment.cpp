#include "sgda/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#include "sgda/diagnostics.hpp"
#include "sgda/errors.hpp"
#include "sgda/log.hpp"
#include "sgda/problems.hpp"
#include "sgda/smoothing.hpp"

namespace fs = std::filesystem;

namespace sgda {

namespace {

void allow_keys(const Json& j, const std::set<std::string>& keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

double get_number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + " must be finite");
  return v;
}

double positive(const Json& j, const std::string& where) {
  const double v = get_number(j, where);
  if (!(v > 0.0)) throw ConfigError(where + " must be positive");
  return v;
}

double nonnegative(const Json& j, const std::string& where) {
  const double v = get_number(j, where);
  if (!(v >= 0.0)) throw ConfigError(where + " must be nonnegative");
  return v;
}

std::size_t count(const Json& j, const std::string& where, bool allow_zero = false) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) throw ConfigError(where + " must be an integer");
  if (j.is_number_integer() && j.get<std::int64_t>() < 0) throw ConfigError(where + " must be nonnegative");
  const auto v = j.get<std::uint64_t>();
  if (v == 0 && !allow_zero) throw ConfigError(where + " must be positive");
  return static_cast<std::size_t>(v);
}

std::uint64_t seed_value(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw ConfigError(where + " must be a nonnegative integer");
  return j.get<std::uint64_t>();
}

Vector vector_of(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of numbers");
  Vector v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(get_number(j[i], where));
  return v;
}

Eigen::MatrixXd matrix_of(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + " must be a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ConfigError(where + " rows must be nonempty arrays");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = vector_of(j[r], where);
    if (row.size() != cols) throw ConfigError(where + " is ragged");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return m;
}

Loss loss_of(const Json& j) {
  const std::string s = j.get<std::string>();
  if (s == "squared") return Loss::squared;
  if (s == "absolute") return Loss::absolute;
  if (s == "hinge") return Loss::hinge;
  throw ConfigError("unknown loss '" + s + "'");
}

// ---------------------------------------------------------------------------

void validate_params(const std::string& name, const Json& p) {
  if (name == "kl-example") {
    allow_keys(p, {"dim_x"}, "problem.params");
    if (p.contains("dim_x")) count(p["dim_x"], "dim_x");
  } else if (name == "quadratic") {
    allow_keys(p, {"A", "B", "C", "a", "b", "N", "heterogeneity", "offset_noise", "instance_seed",
                   "box_x", "box_y"},
               "problem.params");
    for (const char* k : {"A", "B", "C"})
      if (!p.contains(k)) throw ConfigError(std::string("quadratic needs matrix ") + k);
  } else if (name == "group-dro" || name == "phi-div-dro") {
    std::set<std::string> keys = {"dataset", "synthetic", "loss", "box", "delta_tilde", "lambda"};
    if (name == "group-dro") keys.insert({"mu", "theta"});
    else keys.insert({"divergence", "lambda_pen"});
    allow_keys(p, keys, "problem.params");
    if (p.contains("dataset") == p.contains("synthetic"))
      throw ConfigError(name + " needs exactly one of 'dataset' or 'synthetic'");
    if (p.contains("synthetic"))
      allow_keys(p["synthetic"], {"dim", "n", "minority_fraction", "noise", "noise_ratio", "shift", "seed"},
                 "problem.params.synthetic");
    if (p.contains("loss")) loss_of(p["loss"]);
    if (p.contains("lambda")) positive(p["lambda"], "lambda");
    if (p.contains("lambda_pen")) nonnegative(p["lambda_pen"], "lambda_pen");
    if (p.contains("box")) positive(p["box"], "box");
  } else {
    throw ConfigError("unknown problem '" + name + "'");
  }
}

Dataset dataset_for(const Json& p, const std::string& base_dir) {
  if (p.contains("dataset")) {
    fs::path path = p["dataset"].get<std::string>();
    if (path.is_relative()) path = fs::path(base_dir) / path;
    return read_dataset_csv(path.string());
  }
  const Json& s = p["synthetic"];
  SyntheticGroupRegression g;
  if (s.contains("dim")) g.dim = count(s["dim"], "synthetic.dim");
  if (s.contains("n")) g.n = count(s["n"], "synthetic.n");
  if (s.contains("minority_fraction")) g.minority_fraction = positive(s["minority_fraction"], "minority_fraction");
  if (s.contains("noise")) g.noise = nonnegative(s["noise"], "noise");
  if (s.contains("noise_ratio")) g.noise_ratio = nonnegative(s["noise_ratio"], "noise_ratio");
  if (s.contains("shift")) g.shift = nonnegative(s["shift"], "shift");
  if (s.contains("seed")) g.seed = seed_value(s["seed"], "synthetic.seed");
  return make_synthetic_group_regression(g);
}

struct Built {
  ProblemInstance problem;
  std::optional<MoreauComposite> composite;
  std::optional<double> lambda;  // requested smoothing parameter
};

Built build_problem(const ExperimentConfig& c) {
  const Json& p = c.params;
  Built b;
  if (c.problem == "kl-example") {
    b.problem = make_kl_example(p.contains("dim_x") ? count(p["dim_x"], "dim_x") : 1);
  } else if (c.problem == "quadratic") {
    QuadraticSaddleSpec s;
    s.A = matrix_of(p["A"], "A");
    s.B = matrix_of(p["B"], "B");
    s.C = matrix_of(p["C"], "C");
    if (p.contains("a")) {
      const Vector a = vector_of(p["a"], "a");
      s.a = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
    }
    if (p.contains("b")) {
      const Vector v = vector_of(p["b"], "b");
      s.b = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    if (p.contains("N")) s.N = count(p["N"], "N");
    if (p.contains("heterogeneity")) s.heterogeneity = nonnegative(p["heterogeneity"], "heterogeneity");
    if (p.contains("offset_noise")) s.offset_noise = nonnegative(p["offset_noise"], "offset_noise");
    if (p.contains("instance_seed")) s.seed = seed_value(p["instance_seed"], "instance_seed");
    const double bx = p.contains("box_x") ? positive(p["box_x"], "box_x") : 10.0;
    const double by = p.contains("box_y") ? positive(p["box_y"], "box_y") : 10.0;
    s.set_x = ConstraintSet::box(static_cast<std::size_t>(s.A.rows()), -bx, bx);
    s.set_y = ConstraintSet::box(static_cast<std::size_t>(s.C.rows()), -by, by);
    b.problem = make_quadratic_saddle(s).problem;
  } else {
    const Dataset data = dataset_for(p, c.base_dir);
    const Loss loss = p.contains("loss") ? loss_of(p["loss"]) : Loss::squared;
    const double box = p.contains("box") ? positive(p["box"], "box") : 10.0;
    const auto set_x = ConstraintSet::box(static_cast<std::size_t>(data.features.cols()), -box, box);
    const double delta = p.contains("delta_tilde") ? positive(p["delta_tilde"], "delta_tilde") : 1.0;
    if (p.contains("lambda")) b.lambda = positive(p["lambda"], "lambda");
    if (c.problem == "group-dro") {
      GroupDroSpec spec = group_spec_from_dataset(data, loss);
      spec.set_x = set_x;
      spec.delta_tilde = delta;
      if (p.contains("mu")) spec.mu = positive(p["mu"], "mu");
      if (p.contains("theta")) spec.theta = nonnegative(p["theta"], "theta");
      if (loss == Loss::squared) b.problem = make_group_dro_problem(spec);
      else b.composite = make_group_dro(spec);
    } else {
      PhiDivDroSpec spec;
      spec.features = data.features;
      spec.targets = data.targets;
      spec.loss = loss;
      spec.set_x = set_x;
      spec.delta_tilde = delta;
      if (p.contains("lambda_pen")) spec.lambda_pen = nonnegative(p["lambda_pen"], "lambda_pen");
      if (p.contains("divergence")) {
        const std::string d = p["divergence"].get<std::string>();
        if (d == "chi_square") spec.psi = Divergence::chi_square;
        else if (d == "kl") spec.psi = Divergence::kl;
        else throw ConfigError("unknown divergence '" + d + "'");
      }
      if (loss == Loss::squared) b.problem = make_phi_div_dro(spec);
      else b.composite = make_phi_div_dro_composite(spec);
    }
  }
  return b;
}

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number_to_json(x));
  return a;
}

TunerInput tuner_input(const ExperimentConfig& c, const ProblemInstance& problem) {
  TunerInput in = tuner_input_for(problem, c.tuner.epsilon, c.tuner.delta_phi);
  if (c.tuner.theta) in.meta.theta = *c.tuner.theta;
  if (c.tuner.mu) in.meta.mu = *c.tuner.mu;
  in.asymptotic_constant = c.tuner.asymptotic_constant;
  in.sample_cap = c.tuner.sample_cap;
  in.overrides = c.tuner.overrides;
  // Hand-set counts also size the sample budget the tuner checks.
  TunerOverrides& ov = in.overrides;
  if (!ov.K) ov.K = c.solver.K;
  if (!ov.T) ov.T = c.solver.T;
  if (!ov.M) ov.M = c.solver.M;
  if (!ov.B) ov.B = c.solver.B;
  in.seed = c.seeds.front();
  return in;
}

Residuals residuals_for(const ProblemInstance& p, const Vector& x, const Vector& y, std::uint64_t seed) {
  if (is_finite_sum(p.regime())) return gs_residuals(p, x, y);
  return gs_residuals_mc(p, x, y, 10000, seed).value;
}

}  // namespace

ExperimentConfig parse_config(const Json& j, std::string base_dir) {
  allow_keys(j, {"problem", "tuner", "solver", "output", "seeds"}, "config");
  ExperimentConfig c;
  c.base_dir = std::move(base_dir);

  if (!j.contains("problem")) throw ConfigError("config needs a 'problem' section");
  const Json& p = j["problem"];
  allow_keys(p, {"name", "params"}, "problem");
  if (!p.contains("name") || !p["name"].is_string()) throw ConfigError("problem.name must be a string");
  c.problem = p["name"].get<std::string>();
  if (p.contains("params")) c.params = p["params"];
  validate_params(c.problem, c.params);

  if (!j.contains("tuner")) throw ConfigError("config needs a 'tuner' section");
  const Json& t = j["tuner"];
  allow_keys(t, {"epsilon", "delta_phi", "theta", "mu", "asymptotic_constant", "sample_cap", "overrides"},
             "tuner");
  if (!t.contains("epsilon")) throw ConfigError("tuner.epsilon is required");
  c.tuner.epsilon = positive(t["epsilon"], "tuner.epsilon");
  if (t.contains("delta_phi")) c.tuner.delta_phi = positive(t["delta_phi"], "tuner.delta_phi");
  if (t.contains("theta")) {
    const double th = get_number(t["theta"], "tuner.theta");
    if (th < 0.0 || th > 1.0) throw ConfigError("tuner.theta must lie in [0, 1]");
    c.tuner.theta = th;
  }
  if (t.contains("mu")) c.tuner.mu = positive(t["mu"], "tuner.mu");
  if (t.contains("asymptotic_constant"))
    c.tuner.asymptotic_constant = positive(t["asymptotic_constant"], "tuner.asymptotic_constant");
  if (t.contains("sample_cap")) c.tuner.sample_cap = positive(t["sample_cap"], "tuner.sample_cap");
  if (t.contains("overrides")) {
    const Json& o = t["overrides"];
    allow_keys(o, {"r", "alpha_x", "alpha_y", "beta", "K", "T", "M", "B"}, "tuner.overrides");
    TunerOverrides& ov = c.tuner.overrides;
    if (o.contains("r")) ov.r = positive(o["r"], "overrides.r");
    if (o.contains("alpha_x")) ov.alpha_x = positive(o["alpha_x"], "overrides.alpha_x");
    if (o.contains("alpha_y")) ov.alpha_y = positive(o["alpha_y"], "overrides.alpha_y");
    if (o.contains("beta")) ov.beta = positive(o["beta"], "overrides.beta");
    if (o.contains("K")) ov.K = count(o["K"], "overrides.K");
    if (o.contains("T")) ov.T = count(o["T"], "overrides.T");
    if (o.contains("M")) ov.M = count(o["M"], "overrides.M");
    if (o.contains("B")) ov.B = count(o["B"], "overrides.B");
  }

  if (j.contains("solver")) {
    const Json& s = j["solver"];
    allow_keys(s, {"K", "T", "M", "B", "alpha_x", "alpha_y", "beta", "r", "trace_stride",
                   "residual_stride", "lyapunov", "x0", "y0"},
               "solver");
    SolverSection& v = c.solver;
    if (s.contains("K")) v.K = count(s["K"], "solver.K");
    if (s.contains("T")) v.T = count(s["T"], "solver.T");
    if (s.contains("M")) v.M = count(s["M"], "solver.M");
    if (s.contains("B")) v.B = count(s["B"], "solver.B");
    if (s.contains("alpha_x")) v.alpha_x = positive(s["alpha_x"], "solver.alpha_x");
    if (s.contains("alpha_y")) v.alpha_y = positive(s["alpha_y"], "solver.alpha_y");
    if (s.contains("beta")) {
      v.beta = positive(s["beta"], "solver.beta");
      if (*v.beta > 1.0) throw ConfigError("solver.beta must lie in (0, 1]");
    }
    if (s.contains("r")) v.r = positive(s["r"], "solver.r");
    if (s.contains("trace_stride")) v.trace_stride = count(s["trace_stride"], "solver.trace_stride");
    if (s.contains("residual_stride"))
      v.residual_stride = count(s["residual_stride"], "solver.residual_stride", true);
    if (s.contains("lyapunov")) {
      if (!s["lyapunov"].is_boolean()) throw ConfigError("solver.lyapunov must be a boolean");
      v.lyapunov = s["lyapunov"].get<bool>();
    }
    if (s.contains("x0")) v.x0 = vector_of(s["x0"], "solver.x0");
    if (s.contains("y0")) v.y0 = vector_of(s["y0"], "solver.y0");
  }

  if (j.contains("output")) {
    const Json& o = j["output"];
    allow_keys(o, {"directory", "formats"}, "output");
    if (o.contains("directory")) {
      if (!o["directory"].is_string()) throw ConfigError("output.directory must be a string");
      c.output.directory = o["directory"].get<std::string>();
    }
    if (o.contains("formats")) {
      if (!o["formats"].is_array()) throw ConfigError("output.formats must be an array");
      c.output.csv = c.output.json = false;
      for (const Json& f : o["formats"]) {
        const std::string s = f.is_string() ? f.get<std::string>() : "";
        if (s == "csv") c.output.csv = true;
        else if (s == "json") c.output.json = true;
        else throw ConfigError("output.formats entries must be \"csv\" or \"json\"");
      }
    }
  }

  if (j.contains("seeds")) {
    if (!j["seeds"].is_array() || j["seeds"].empty()) throw ConfigError("seeds must be a nonempty array");
    c.seeds.clear();
    std::set<std::uint64_t> seen;
    for (const Json& s : j["seeds"]) {
      const std::uint64_t v = seed_value(s, "seeds");
      if (!seen.insert(v).second) throw ConfigError("seeds must be distinct");
      c.seeds.push_back(v);
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  const fs::path base = fs::path(path).parent_path();
  return parse_config(j, base.empty() ? "." : base.string());
}

int run_experiment(const std::string& config_path, const CliOverrides& cli, std::ostream& err) {
  ExperimentConfig c;
  try {
    c = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
  if (cli.out) c.output.directory = *cli.out;
  if (cli.seed) c.seeds = {*cli.seed};
  if (cli.trace_stride) {
    if (*cli.trace_stride == 0) {
      err << "config error: --trace-stride must be positive\n";
      return 2;
    }
    c.solver.trace_stride = *cli.trace_stride;
  }
  return run_experiment(c, err);
}

int run_experiment(const ExperimentConfig& c, std::ostream& err) {
  try {
    // Everything that can reject the configuration happens before any output.
    Built built = build_problem(c);
    TunedSchedule schedule;
    std::optional<double> lambda;
    if (built.composite) {
      const ProblemInstance probe = as_problem(*built.composite, 1.0);
      const TunerInput in = tuner_input(c, probe);
      NonsmoothSchedule ns = tune_nonsmooth(in, built.composite->constants, LambdaChoice{built.lambda});
      lambda = ns.lambda;
      built.problem = as_problem(*built.composite, ns.lambda);
      built.problem.meta.theta = in.meta.theta;
      built.problem.meta.mu = in.meta.mu;
      schedule = std::move(ns.schedule);
    } else {
      schedule = tune_smooth(tuner_input(c, built.problem));
    }
    const ProblemInstance& problem = built.problem;

    SolverConfig base = schedule.config;
    auto manual = [&](const char* name) {
      log_warning(std::string("solver.") + name + " replaces the tuned value without schedule checks");
    };
    const SolverSection& s = c.solver;
    if (s.K) base.K = *s.K, manual("K");
    if (s.T) base.T = *s.T, manual("T");
    if (s.M) base.M = *s.M, manual("M");
    if (s.B) base.B = *s.B, manual("B");
    if (s.alpha_x) base.alpha_x = *s.alpha_x, manual("alpha_x");
    if (s.alpha_y) base.alpha_y = *s.alpha_y, manual("alpha_y");
    if (s.beta) base.beta = *s.beta, manual("beta");
    if (s.r) base.r = *s.r, manual("r");
    base.trace_stride = s.trace_stride;
    base.record_trace = c.output.csv;
    if (s.x0) {
      check_dim(s.x0->size(), problem.dim_x(), "solver.x0");
      base.x0 = *s.x0;
    }
    if (s.y0) {
      check_dim(s.y0->size(), problem.dim_y(), "solver.y0");
      base.y0 = *s.y0;
    }
    base.validate();

    struct SeedRun {
      std::uint64_t seed;
      RunTrace trace;
      Residuals out_res, final_res;
    };
    std::vector<SeedRun> runs;
    for (std::uint64_t seed : c.seeds) {
      SolverConfig cfg = base;
      cfg.seed = seed;
      std::optional<DiagnosticsSink> sink;
      if (s.residual_stride > 0 && c.output.csv) {
        LyapunovConfig lc;
        lc.seed = seed;
        sink.emplace(problem, s.residual_stride, s.lyapunov ? std::optional<double>(cfg.r) : std::nullopt, lc);
      }
      RunTrace t = run(problem, cfg, sink ? &*sink : nullptr);
      SeedRun sr{seed, std::move(t), {}, {}};
      sr.out_res = residuals_for(problem, sr.trace.output_x, sr.trace.output_y, seed);
      sr.final_res = residuals_for(problem, sr.trace.final_x, sr.trace.final_y, seed);
      runs.push_back(std::move(sr));
    }

    fs::create_directories(c.output.directory);
    Json summary;
    summary["problem"] = c.problem;
    summary["problem_name"] = problem.name;
    summary["dim_x"] = problem.dim_x();
    summary["dim_y"] = problem.dim_y();
    const Regime regime = problem.regime();
    if (const auto* f = std::get_if<FiniteSum>(&regime); f)
      summary["regime"] = Json{{"kind", "finite_sum"}, {"n", f->n}};
    else
      summary["regime"] = Json{{"kind", "online"}};
    summary["epsilon"] = c.tuner.epsilon;
    if (lambda) summary["lambda"] = *lambda;
    summary["schedule"] = config_to_json(base);
    summary["audit"] = audit_to_json(schedule.audit);
    Json arr = Json::array();
    for (const SeedRun& r : runs) {
      const std::string trace_name = "trace_seed_" + std::to_string(r.seed) + ".csv";
      if (c.output.csv) {
        std::ofstream out(fs::path(c.output.directory) / trace_name, std::ios::binary);
        if (!out) throw ConfigError("cannot write " + trace_name);
        write_trace_csv(out, r.trace);
      }
      Json e;
      e["seed"] = r.seed;
      if (c.output.csv) e["trace_file"] = trace_name;
      e["steps"] = r.trace.steps;
      e["samples_used"] = r.trace.samples_used;
      e["final_res_x"] = number_to_json(r.final_res.res_x);
      e["final_res_y"] = number_to_json(r.final_res.res_y);
      e["output"] = Json{{"index", r.trace.output_index},
                         {"k", r.trace.output_k},
                         {"tau", r.trace.output_tau},
                         {"res_x", number_to_json(r.out_res.res_x)},
                         {"res_y", number_to_json(r.out_res.res_y)},
                         {"x", vec_json(r.trace.output_x)},
                         {"y", vec_json(r.trace.output_y)},
                         {"z", vec_json(r.trace.output_z)}};
      e["final"] = Json{{"x", vec_json(r.trace.final_x)},
                        {"y", vec_json(r.trace.final_y)},
                        {"z", vec_json(r.trace.final_z)}};
      arr.push_back(std::move(e));
    }
    summary["runs"] = std::move(arr);
    if (c.output.json) {
      std::ofstream out(fs::path(c.output.directory) / "summary.json", std::ios::binary);
      if (!out) throw ConfigError("cannot write summary.json");
      out << summary.dump(2) << '\n';
    }
    return 0;
  } catch (const NonFiniteError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const InfeasibleScheduleError& e) {
    err << "infeasible schedule: " << e.what() << '\n';
    return 4;
  } catch (const OverflowError& e) {
    err << "infeasible schedule: " << e.what() << '\n';
    return 4;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DimError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const EmptyGroupError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const SingularityError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace sgda

#include "rcov/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rcov/adaptive.hpp"
#include "rcov/applications.hpp"
#include "rcov/calibrated.hpp"
#include "rcov/error.hpp"
#include "rcov/harness.hpp"
#include "rcov/io.hpp"
#include "rcov/kernels.hpp"

namespace rcov::cli {

namespace {

using json = nlohmann::json;

struct Options {
  std::string input;
  bool header = false;
  double delta = 0.05;
  double lambda = 0.0;
  std::string upper = "auto";
  std::string theta = "auto";
  double kappa = 0.0;
  double df = 0.0;
  bool center = false;
  std::string output;
  std::string format = "json";
  std::string kernel = "auto";
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  // adaptive
  double theta_min = 0.0;
  double theta_max = 0.0;
  std::string grid;

  // pca
  std::size_t k = 1;
  double tol = 1e-10;
  std::size_t max_iters = 1000;

  // ridge
  std::string responses;
  double theta_bar = 0.0;
  double response_kurtosis = 0.0;
  double response_moment = 0.0;

  // bench
  std::string dist = "t5";
  std::size_t d = 10;
  std::size_t n = 20000;
  std::size_t trials = 200;
  std::string estimators = "alg1,sample";
  double mix_p = 0.05;
  double mix_c = 10.0;

  // replay
  std::string manifest;
};

struct Given {
  CLI::App* sub = nullptr;
  bool has(const std::string& name) const { return sub->count(name) > 0; }
};

double parse_number(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw InvalidConfig(what + ": expected a number, got '" + s + "'");
  }
  return v;
}

std::optional<double> parse_upper(const std::string& s) {
  if (s == "auto") return std::nullopt;
  const double v = parse_number(s, "--upper");
  if (!(v > 0.0)) throw InvalidConfig("--upper must be positive");
  return v;
}

std::optional<double> parse_theta(const std::string& s) {
  if (s == "auto") return std::nullopt;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  const double v = parse_number(s, "--theta");
  if (!(v > 0.0)) throw InvalidConfig("--theta must be positive");
  return v;
}

void apply_kernel(const std::string& k) {
  if (k == "auto") return;
  const auto isa = kernels::parse_isa(k);
  if (!isa) throw InvalidConfig("unknown kernel '" + k + "'");
  kernels::set_active(*isa);
}

struct Loaded {
  SampleMatrix x;
  json input_record;
  std::optional<std::vector<double>> mean;
};

json file_record(const std::string& path, const std::string& bytes) {
  return {{"path", path}, {"digest", io::hex_digest(io::fnv1a64(bytes))}};
}

Loaded load_input(const Options& o, std::vector<std::string>& warnings) {
  if (o.input.empty()) throw InvalidConfig("--input is required");
  const std::string bytes = io::read_file(o.input);
  SampleMatrix x = io::parse_csv(bytes, {o.header, ','});
  json rec = file_record(o.input, bytes);
  rec["rows"] = x.rows();
  rec["cols"] = x.dim();
  Loaded out{std::move(x), std::move(rec), std::nullopt};
  if (o.center) {
    const std::size_t n = out.x.rows();
    const std::size_t d = out.x.dim();
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) mean[j] += out.x(i, j);
    }
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      double* row = out.x.mutable_row(i);
      for (std::size_t j = 0; j < d; ++j) row[j] -= mean[j];
    }
    out.mean = std::move(mean);
    warnings.push_back("data centered by the empirical mean; the error certificate assumes a known zero mean");
  }
  return out;
}

std::optional<KurtosisDfHint> parse_hint(const Options& o, const Given& g) {
  const bool k = g.has("--kappa");
  const bool f = g.has("--df");
  if (k != f) throw InvalidConfig("--kappa and --df must be given together");
  if (!k) return std::nullopt;
  if (!(o.kappa >= 1.0)) throw InvalidConfig("--kappa must be at least 1");
  if (!(o.df > 0.0)) throw InvalidConfig("--df must be positive");
  return KurtosisDfHint{o.kappa, o.df};
}

json plan_json(const BatchPlan& p) {
  json batches = json::array();
  for (const BatchRange& r : p.ranges) batches.push_back({r.begin, r.end});
  return {{"iterations", p.iterations},
          {"levels", p.levels},
          {"batch_size", p.batch_size},
          {"final_size", p.final_size},
          {"n", p.n},
          {"batches", batches}};
}

json calibrated_json(const CalibratedEstimate& r) {
  json j;
  j["epsilon"] = r.epsilon;
  j["theta"] = r.theta_used;
  j["theta_final"] = r.theta_final;
  j["upper"] = r.upper;
  j["pilot_rows"] = r.pilot_rows;
  j["lambda_schedule"] = r.lambda_schedule;
  j["plan"] = plan_json(r.plan);
  j["advisory_min_n"] = r.advisory_min_n;
  j["certificate"] = {{"epsilon", r.epsilon}, {"delta", r.delta}, {"lambda", r.lambda}};
  return j;
}

CalibratedConfig calibrated_config(const Options& o, const Given& g) {
  CalibratedConfig cfg;
  cfg.delta = o.delta;
  cfg.lambda = o.lambda;
  cfg.upper = parse_upper(o.upper);
  cfg.theta = parse_theta(o.theta);
  cfg.hint = parse_hint(o, g);
  cfg.seed = o.seed;
  return cfg;
}

json resolved_calibrated(const CalibratedEstimate& r, const CalibratedConfig& cfg) {
  json j;
  j["delta"] = r.delta;
  j["lambda"] = r.lambda;
  j["upper"] = r.upper;
  j["upper_source"] = r.upper_from_pilot ? "pilot" : "flag";
  j["pilot_rows"] = r.pilot_rows;
  j["theta"] = r.theta_used;
  j["theta_source"] = cfg.theta ? "flag" : (cfg.hint ? "hint" : "estimated");
  j["kappa"] = r.kappa_used ? json(*r.kappa_used) : json(nullptr);
  j["df"] = r.df_used ? json(*r.df_used) : json(nullptr);
  return j;
}

struct Emission {
  std::string command;
  json body;
  json manifest;
  const PsdMatrix* estimate = nullptr;
  json extra;  // fields kept out of the digest (timing)
};

int emit(Emission e, const Options& o, std::ostream& out) {
  if (e.estimate != nullptr) {
    if (o.format == "rcov") {
      if (o.output.empty()) throw InvalidConfig("--format rcov needs -o for the binary matrix");
      const std::string bytes = io::encode_rcov(*e.estimate);
      io::write_file(o.output, bytes);
      e.body["estimate"] = {{"format", "rcov"}, {"digest", io::hex_digest(io::fnv1a64(bytes))}};
    } else {
      e.body["estimate"] = io::matrix_to_json(*e.estimate);
    }
  }
  e.body["command"] = e.command;
  const std::string digest = io::hex_digest(io::fnv1a64(io::dump_json(e.body)));
  json doc = e.body;
  e.manifest["command"] = e.command;
  e.manifest["version"] = kVersion;
  e.manifest["seed"] = o.seed;
  e.manifest["kernel"] = std::string(kernels::name(kernels::active()));
  e.manifest["output"] = {{"path", o.output}, {"format", o.format}};
  doc["manifest"] = e.manifest;
  doc["digest"] = digest;
  for (auto it = e.extra.begin(); it != e.extra.end(); ++it) doc[it.key()] = it.value();
  const std::string text = io::dump_json(doc);
  if (!o.output.empty() && o.format == "json") {
    io::write_file(o.output, text);
  } else {
    out << text;
  }
  return kOk;
}

json base_manifest(const std::vector<std::string>& flags, const Loaded* in) {
  json m;
  m["flags"] = flags;
  m["inputs"] = json::object();
  if (in != nullptr) {
    m["inputs"]["input"] = in->input_record;
    m["center_mean"] = in->mean ? json(*in->mean) : json(nullptr);
  }
  return m;
}

json warnings_json(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

int cmd_estimate(const Options& o, const Given& g, const std::vector<std::string>& flags,
                 std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  Loaded in = load_input(o, warnings);
  const CalibratedConfig cfg = calibrated_config(o, g);
  const CalibratedEstimate r = run_algorithm1(in.x, cfg);

  Emission e{"estimate", calibrated_json(r), base_manifest(flags, &in), &r.estimate, json::object()};
  e.body["warnings"] = warnings_json(warnings, r.warnings);
  e.manifest["resolved"] = resolved_calibrated(r, cfg);
  for (const auto& w : e.body["warnings"]) err << "warning: " << w.get<std::string>() << "\n";
  return emit(std::move(e), o, out);
}

int cmd_adaptive(const Options& o, const Given& g, const std::vector<std::string>& flags,
                 std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  AdaptiveConfig cfg;
  cfg.delta = o.delta;
  cfg.lambda = o.lambda;
  cfg.upper = parse_upper(o.upper);
  cfg.threads = o.threads;
  const bool lo = g.has("--theta-min");
  const bool hi = g.has("--theta-max");
  if (lo != hi) throw InvalidConfig("--theta-min and --theta-max must be given together");
  if (lo && g.has("--grid")) throw InvalidConfig("use either --grid auto or --theta-min/--theta-max");
  if (lo) cfg.grid = ThetaGrid::build(o.theta_min, o.theta_max);
  if (g.has("--grid") && o.grid != "auto") {
    std::vector<double> levels;
    std::stringstream ss(o.grid);
    std::string tok;
    while (std::getline(ss, tok, ',')) levels.push_back(parse_number(tok, "--grid"));
    cfg.grid = ThetaGrid::from_levels(std::move(levels));
  }

  Loaded in = load_input(o, warnings);
  const AdaptiveResult r = run_algorithm2(in.x, cfg);
  const LevelResult& sel = r.per_level.at(r.selected_index);

  json levels = json::array();
  for (std::size_t j = 0; j < r.per_level.size(); ++j) {
    const LevelResult& lr = r.per_level[j];
    json passed = json::array();
    for (std::size_t jp = 0; jp < r.pairwise_test_log.at(j).size(); ++jp) {
      passed.push_back(static_cast<bool>(r.pairwise_test_log[j][jp]));
    }
    levels.push_back({{"index", j},
                      {"theta", lr.theta},
                      {"epsilon", lr.epsilon},
                      {"theta_final", lr.run.theta_final},
                      {"pairwise_pass", passed}});
  }

  Emission e{"adaptive", json::object(), base_manifest(flags, &in), &sel.run.estimate, json::object()};
  e.body["grid"] = {{"theta_min", r.grid.theta_min()},
                    {"theta_max", r.grid.theta_max()},
                    {"levels", r.grid.levels()},
                    {"size", r.grid.size()},
                    {"auto_cardinality", r.auto_cardinality ? json(*r.auto_cardinality) : json(nullptr)}};
  e.body["levels"] = levels;
  e.body["selected_index"] = r.selected_index;
  e.body["theta"] = sel.theta;
  e.body["epsilon"] = sel.epsilon;
  e.body["theta_final"] = sel.run.theta_final;
  e.body["upper"] = r.upper;
  e.body["pilot_rows"] = r.pilot_rows;
  e.body["plan"] = plan_json(sel.run.plan);
  e.body["certificate"] = {{"epsilon", sel.epsilon}, {"delta", o.delta}, {"lambda", o.lambda}};
  e.body["warnings"] = warnings_json(warnings, sel.run.warnings);
  e.manifest["resolved"] = {{"delta", o.delta},
                            {"lambda", o.lambda},
                            {"upper", r.upper},
                            {"upper_source", cfg.upper ? "flag" : "pilot"},
                            {"pilot_rows", r.pilot_rows},
                            {"grid", r.grid.levels()},
                            {"threads", o.threads}};
  for (const auto& w : e.body["warnings"]) err << "warning: " << w.get<std::string>() << "\n";
  return emit(std::move(e), o, out);
}

int cmd_pca(const Options& o, const Given& g, const std::vector<std::string>& flags,
            std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  Loaded in = load_input(o, warnings);
  const CalibratedConfig cfg = calibrated_config(o, g);
  const CalibratedEstimate r = run_algorithm1(in.x, cfg);

  SubspaceOptions so;
  so.max_iters = o.max_iters;
  so.tol = o.tol;
  so.seed = o.seed;
  const SubspaceResult sr = subspace_iteration(r.estimate, o.k, so);

  const DenseMatrix s = r.estimate.dense();
  json components = json::array();
  json values = json::array();
  for (Eigen::Index c = 0; c < sr.basis.cols(); ++c) {
    Vector u = sr.basis.col(c);
    Eigen::Index arg = 0;
    u.cwiseAbs().maxCoeff(&arg);
    if (u(arg) < 0.0) u = -u;
    components.push_back(std::vector<double>(u.data(), u.data() + u.size()));
    values.push_back(u.dot(s * u));
  }
  if (!sr.converged) warnings.push_back("subspace iteration stopped before reaching the tolerance");

  Emission e{"pca", calibrated_json(r), base_manifest(flags, &in), &r.estimate, json::object()};
  e.body["components"] = components;
  e.body["eigenvalues"] = values;
  e.body["residual"] = sr.residual;
  e.body["iterations"] = sr.iterations;
  e.body["converged"] = sr.converged;
  if (r.epsilon < 0.5) {
    const EigenReport rep = eigenvalue_intervals(r.estimate, r.epsilon, o.k);
    json iv = json::array();
    for (const auto& [a, b] : rep.intervals) iv.push_back({a, b});
    e.body["intervals"] = iv;
  } else {
    e.body["intervals"] = nullptr;
    warnings.push_back("epsilon >= 1/2, eigenvalue intervals are vacuous");
  }
  e.body["warnings"] = warnings_json(warnings, r.warnings);
  e.manifest["resolved"] = resolved_calibrated(r, cfg);
  e.manifest["resolved"]["k"] = o.k;
  e.manifest["resolved"]["tol"] = o.tol;
  e.manifest["resolved"]["max_iters"] = o.max_iters;
  for (const auto& w : e.body["warnings"]) err << "warning: " << w.get<std::string>() << "\n";
  return emit(std::move(e), o, out);
}

int cmd_ridge(const Options& o, const Given& g, const std::vector<std::string>& flags,
              std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  Loaded in = load_input(o, warnings);
  const std::string ybytes = io::read_file(o.responses);
  const SampleMatrix ym = io::parse_csv(ybytes, {o.header, ','});
  if (ym.dim() != 1) throw DataError(o.responses + ": expected a single column");
  const std::vector<double>& y = ym.data();
  if (y.size() != in.x.rows()) {
    throw DataError("response count " + std::to_string(y.size()) + " does not match " +
                    std::to_string(in.x.rows()) + " design rows");
  }
  const std::size_t n = in.x.rows() / 2;
  if (n == 0) throw SampleTooSmall("ridge needs at least two rows for the sample split");
  if (in.x.rows() % 2 != 0) warnings.push_back("odd row count, the last row is unused");

  const SampleView reg = in.x.view().slice(0, n);
  const SampleView hold = in.x.view().slice(n, n);
  const std::span<const double> y_reg(y.data(), n);

  const CalibratedConfig cfg = calibrated_config(o, g);
  const CalibratedEstimate cov = run_algorithm1(hold, cfg);

  RidgeMoments mom = estimate_ridge_moments(reg, y_reg, o.seed);
  if (g.has("--kappa")) mom.kappa = o.kappa;
  if (g.has("--response-kurtosis")) mom.response_kurtosis = o.response_kurtosis;
  if (g.has("--response-moment")) mom.response_second_moment = o.response_moment;

  RidgeConfig rc;
  rc.lambda = o.lambda;
  rc.delta = o.delta;
  rc.kappa = mom.kappa;
  rc.response_kurtosis = mom.response_kurtosis;
  rc.response_second_moment = mom.response_second_moment;
  if (g.has("--theta-bar")) rc.theta_bar = o.theta_bar;
  if (g.has("--df")) rc.df_lambda = o.df;
  const RidgeEstimate re = robust_ridge(reg, y_reg, cov.estimate, rc);

  std::size_t clipped = 0;
  for (double w : re.truncation_weights) clipped += w < 1.0 ? 1 : 0;

  Emission e{"ridge", json::object(), base_manifest(flags, &in), &cov.estimate, json::object()};
  e.body["weights"] = std::vector<double>(re.weights.data(), re.weights.data() + re.weights.size());
  e.body["theta_bar"] = re.theta_bar;
  e.body["truncated_fraction"] = static_cast<double>(clipped) / static_cast<double>(n);
  e.body["covariance"] = calibrated_json(cov);
  e.body["epsilon"] = cov.epsilon;
  e.body["theta"] = cov.theta_used;
  e.body["plan"] = plan_json(cov.plan);
  e.body["split"] = {{"regression_rows", {0, n}}, {"covariance_rows", {n, 2 * n}}};
  e.body["moments"] = {{"kappa", mom.kappa},
                       {"response_kurtosis", mom.response_kurtosis},
                       {"response_second_moment", mom.response_second_moment}};
  e.body["warnings"] = warnings_json(warnings, cov.warnings);
  e.manifest["inputs"]["responses"] = file_record(o.responses, ybytes);
  e.manifest["resolved"] = resolved_calibrated(cov, cfg);
  e.manifest["resolved"]["theta_bar"] = re.theta_bar;
  for (const auto& w : e.body["warnings"]) err << "warning: " << w.get<std::string>() << "\n";
  return emit(std::move(e), o, out);
}

DistributionSpec parse_dist(const Options& o) {
  const PsdMatrix sigma = harmonic_spectrum(o.d);
  if (o.dist == "gaussian") return DistributionSpec::gaussian(sigma, o.seed);
  if (o.dist == "mixture") return DistributionSpec::scale_mixture(o.mix_p, o.mix_c, sigma, o.seed);
  if (o.dist.size() > 1 && o.dist[0] == 't') {
    const double nu = parse_number(o.dist.substr(1), "--dist");
    return DistributionSpec::student_t(nu, sigma, o.seed);
  }
  throw InvalidConfig("unknown distribution '" + o.dist + "' (gaussian, tN, mixture)");
}

std::vector<EstimatorConfig> parse_estimators(const Options& o) {
  std::vector<EstimatorConfig> out;
  std::stringstream ss(o.estimators);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    EstimatorConfig c;
    c.delta = o.delta;
    c.lambda = o.lambda;
    c.upper = parse_upper(o.upper);
    c.theta = parse_theta(o.theta);
    if (tok == "alg1") {
      c.kind = EstimatorKind::algorithm1;
    } else if (tok == "alg2") {
      c.kind = EstimatorKind::algorithm2;
    } else if (tok == "sample") {
      c.kind = EstimatorKind::sample_covariance;
    } else if (tok == "wm") {
      c.kind = EstimatorKind::wei_minsker;
    } else {
      throw InvalidConfig("unknown estimator '" + tok + "' (alg1, alg2, sample, wm)");
    }
    out.push_back(std::move(c));
  }
  if (out.empty()) throw InvalidConfig("--estimators is empty");
  return out;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

int cmd_bench(const Options& o, const Given&, const std::vector<std::string>& flags,
              std::ostream& out, std::ostream&) {
  if (o.format != "json") throw InvalidConfig("bench writes JSON only");
  const DistributionSpec spec = parse_dist(o);
  const std::vector<EstimatorConfig> ests = parse_estimators(o);
  const std::vector<TrialReport> reports = run_campaign(spec, o.n, ests, o.trials, o.threads);
  const std::vector<CoverageSummary> summary = coverage_report(reports);

  json trials = json::array();
  for (const TrialReport& r : reports) {
    trials.push_back({{"trial", r.trial},
                      {"seed", r.seed},
                      {"estimator", r.estimator},
                      {"ok", r.ok},
                      {"error", r.error},
                      {"calibrated_error", r.calibrated_error},
                      {"epsilon", opt_json(r.epsilon)},
                      {"certificate_pass", r.certificate_pass},
                      {"sandwich_pass", r.sandwich_pass},
                      {"eigen_bounds_pass", r.eigen_bounds_pass},
                      {"eigen_relative_errors", r.eigen_relative_errors},
                      {"selected_theta", opt_json(r.selected_theta)}});
  }
  json sum = json::array();
  json timing = json::array();
  for (const CoverageSummary& s : summary) {
    sum.push_back({{"estimator", s.estimator},
                   {"trials", s.trials},
                   {"failures", s.failures},
                   {"pass_fraction", s.pass_fraction},
                   {"sandwich_fraction", s.sandwich_fraction},
                   {"eigen_fraction", s.eigen_fraction},
                   {"error_q50", s.error_q50},
                   {"error_q90", s.error_q90},
                   {"error_q95", s.error_q95}});
    timing.push_back({{"estimator", s.estimator},
                      {"sample_ns", s.mean_timing.sample_ns},
                      {"estimate_ns", s.mean_timing.estimate_ns},
                      {"metrics_ns", s.mean_timing.metrics_ns}});
  }

  Emission e{"bench", json::object(), base_manifest(flags, nullptr), nullptr, json::object()};
  e.body["config"] = {{"dist", o.dist},
                      {"kurtosis", kurtosis(spec)},
                      {"d", o.d},
                      {"n", o.n},
                      {"trials", o.trials},
                      {"seed", o.seed},
                      {"delta", o.delta},
                      {"lambda", o.lambda},
                      {"upper", o.upper},
                      {"theta", o.theta},
                      {"estimators", o.estimators}};
  e.body["summary"] = sum;
  e.body["trials"] = trials;
  e.manifest["resolved"] = e.body["config"];
  e.manifest["resolved"]["threads"] = o.threads;
  e.extra["timing"] = timing;
  return emit(std::move(e), o, out);
}

std::vector<std::string> strip_output(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "-o" || a == "--output") {
      ++i;
      continue;
    }
    if (a.rfind("--output=", 0) == 0) continue;
    out.push_back(a);
  }
  return out;
}

int cmd_replay(const Options& o, std::ostream& out, std::ostream& err) {
  const json doc = json::parse(io::read_file(o.manifest), nullptr, true);
  if (!doc.contains("manifest") || !doc.contains("digest")) {
    throw DataError(o.manifest + ": no manifest or digest field");
  }
  const json& m = doc["manifest"];
  if (m.value("version", "") != kVersion) {
    err << "warning: manifest written by version " << m.value("version", "?") << "\n";
  }
  for (auto it = m["inputs"].begin(); it != m["inputs"].end(); ++it) {
    const std::string path = it.value()["path"];
    const std::string want = it.value()["digest"];
    const std::string got = io::hex_digest(io::fnv1a64(io::read_file(path)));
    if (got != want) throw DataError(path + ": input digest " + got + " does not match manifest " + want);
  }
  std::vector<std::string> args{m["command"].get<std::string>()};
  for (const auto& f : m["flags"]) args.push_back(f.get<std::string>());
  const std::string format = m["output"].value("format", "json");
  if (format == "rcov") {
    if (o.output.empty()) throw InvalidConfig("replaying an rcov run needs -o for the binary matrix");
    args.push_back("-o");
    args.push_back(o.output);
  }
  std::ostringstream captured;
  const int code = run(args, captured, err);
  if (code != kOk) return code;
  const json fresh = json::parse(captured.str());
  const std::string expected = doc["digest"];
  const std::string got = fresh["digest"];
  const json result = {{"command", args[0]}, {"expected", expected}, {"digest", got},
                       {"match", expected == got}};
  out << io::dump_json(result);
  return expected == got ? kOk : kDataError;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SampleTooSmall*>(&e)) return kSampleTooSmall;
  if (dynamic_cast<const FactorizationFailure*>(&e)) return kNumerical;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const DegenerateInput*>(&e)) return kDataError;
  if (dynamic_cast<const Error*>(&e)) return kUsage;
  if (dynamic_cast<const json::exception*>(&e)) return kDataError;
  return kDataError;
}

namespace {

void add_io(CLI::App* sub, Options& o) {
  sub->add_option("--input", o.input, "CSV file, one observation per row")->required();
  sub->add_flag("--header", o.header, "first CSV line is a header");
  sub->add_flag("--center", o.center, "subtract the empirical mean first");
  sub->add_option("-o,--output", o.output, "output file (stdout if omitted)");
  sub->add_option("--format", o.format, "json or rcov")->check(CLI::IsMember({"json", "rcov"}));
}

void add_shared(CLI::App* sub, Options& o) {
  sub->add_option("--delta", o.delta, "failure probability")->capture_default_str();
  sub->add_option("--kernel", o.kernel, "auto, scalar, avx2 or neon")->capture_default_str();
  sub->add_option("--seed", o.seed, "random seed")->capture_default_str();
  sub->add_option("--threads", o.threads, "worker threads")->capture_default_str()
      ->check(CLI::PositiveNumber);
}

void add_calibrated(CLI::App* sub, Options& o) {
  sub->add_option("--lambda", o.lambda, "regularization level")->required();
  sub->add_option("--upper", o.upper, "bound L on ||Sigma||, or auto")->capture_default_str();
  sub->add_option("--theta", o.theta, "truncation level: auto, inf or a number")->capture_default_str();
  sub->add_option("--kappa", o.kappa, "kurtosis for the auto truncation level");
  sub->add_option("--df", o.df, "degrees of freedom df_lambda for the auto truncation level");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Robust calibrated covariance estimation", "rcov"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CLI::App* est = app.add_subcommand("estimate", "iterative calibrated estimator");
  add_io(est, o);
  add_shared(est, o);
  add_calibrated(est, o);

  CLI::App* ada = app.add_subcommand("adaptive", "calibrated estimator with adaptive truncation");
  add_io(ada, o);
  add_shared(ada, o);
  ada->add_option("--lambda", o.lambda, "regularization level")->required();
  ada->add_option("--upper", o.upper, "bound L on ||Sigma||, or auto")->capture_default_str();
  ada->add_option("--theta-min", o.theta_min, "smallest grid level");
  ada->add_option("--theta-max", o.theta_max, "largest grid level");
  ada->add_option("--grid", o.grid, "auto, or explicit doubling levels such as 2,4,8");

  CLI::App* pca = app.add_subcommand("pca", "principal subspace of the calibrated estimate");
  add_io(pca, o);
  add_shared(pca, o);
  add_calibrated(pca, o);
  pca->add_option("--k", o.k, "number of components")->required();
  pca->add_option("--tol", o.tol, "residual tolerance")->capture_default_str();
  pca->add_option("--max-iters", o.max_iters, "iteration cap")->capture_default_str();

  CLI::App* ridge = app.add_subcommand("ridge", "robust ridge regression with a hold-out covariance");
  add_io(ridge, o);
  add_shared(ridge, o);
  add_calibrated(ridge, o);
  ridge->add_option("--responses", o.responses, "CSV with one response per row")->required();
  ridge->add_option("--theta-bar", o.theta_bar, "truncation level for the gradient mean");
  ridge->add_option("--response-kurtosis", o.response_kurtosis, "kurtosis of the responses");
  ridge->add_option("--response-moment", o.response_moment, "second moment of the responses");

  Options b;
  b.seed = 7;
  b.delta = 0.1;
  b.lambda = 0.1;
  CLI::App* bench = app.add_subcommand("bench", "Monte Carlo coverage campaign");
  add_shared(bench, b);
  bench->add_option("--dist", b.dist, "gaussian, tN (e.g. t5) or mixture")->capture_default_str();
  bench->add_option("--d", b.d, "dimension")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--n", b.n, "sample size")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--trials", b.trials, "number of trials")->capture_default_str();
  bench->add_option("--estimators", b.estimators, "comma list of alg1, alg2, sample, wm")
      ->capture_default_str();
  bench->add_option("--lambda", b.lambda, "regularization level")->capture_default_str();
  bench->add_option("--upper", b.upper, "bound L on ||Sigma||, or auto")->capture_default_str();
  bench->add_option("--theta", b.theta, "truncation level: auto, inf or a number")->capture_default_str();
  bench->add_option("--mix-p", b.mix_p, "mixture probability")->capture_default_str();
  bench->add_option("--mix-c", b.mix_c, "mixture scale")->capture_default_str();
  bench->add_option("-o,--output", b.output, "output file (stdout if omitted)");

  CLI::App* replay = app.add_subcommand("replay", "re-run a manifest and compare digests");
  replay->add_option("--manifest", o.manifest, "JSON report containing a manifest")->required();
  replay->add_option("-o,--output", o.output, "binary output path for rcov runs");

  std::vector<const char*> argv{"rcov"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      const auto subs = app.get_subcommands();
      if (dynamic_cast<const CLI::CallForVersion*>(&e)) {
        out << kVersion << "\n";
      } else {
        out << (subs.empty() ? app.help() : subs.front()->help());
      }
      return kOk;
    }
    const auto subs = app.get_subcommands();
    err << "error: " << e.what() << "\n" << (subs.empty() ? app.help() : subs.front()->help());
    return kUsage;
  }

  try {
    apply_kernel(bench->parsed() ? b.kernel : o.kernel);
    const std::vector<std::string> flags =
        strip_output(std::vector<std::string>(args.begin() + 1, args.end()));
    if (est->parsed()) return cmd_estimate(o, {est}, flags, out, err);
    if (ada->parsed()) return cmd_adaptive(o, {ada}, flags, out, err);
    if (pca->parsed()) return cmd_pca(o, {pca}, flags, out, err);
    if (ridge->parsed()) return cmd_ridge(o, {ridge}, flags, out, err);
    if (bench->parsed()) return cmd_bench(b, {bench}, flags, out, err);
    if (replay->parsed()) return cmd_replay(o, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kUsage;
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace rcov::cli

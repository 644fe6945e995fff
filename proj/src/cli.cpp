#include "rdgof/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "rdgof/calibration.hpp"
#include "rdgof/kernels.hpp"
#include "rdgof/numeric.hpp"
#include "rdgof/rd_solver.hpp"
#include "rdgof/report.hpp"
#include "rdgof/sampling.hpp"
#include "rdgof/statistics.hpp"

namespace rdgof {

using Json = nlohmann::ordered_json;

namespace {

constexpr double kMaxBeta = 1e6;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Calls fn(token, line_number) for the content of every non-comment line.
template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (!view.empty()) fn(view, number);
  }
}

std::optional<double> parse_double(std::string_view token) {
  double v = 0.0;
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void bad_line(std::size_t number, std::string_view text, const char* what) {
  throw InputError("line " + std::to_string(number) + ": " + what + " '" + std::string(text) + "'");
}

// ---- configuration access ---------------------------------------------------

bool has(const Json& c, const char* key) { return c.contains(key) && !c.at(key).is_null(); }

double get_double(const Json& c, const char* key) {
  const Json& v = c.at(key);
  if (!v.is_number()) throw InputError(std::string("config field '") + key + "' must be a number");
  return v.get<double>();
}

std::size_t get_size(const Json& c, const char* key) {
  const Json& v = c.at(key);
  if (!v.is_number_unsigned()) {
    throw InputError(std::string("config field '") + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::string get_string(const Json& c, const char* key) {
  if (!has(c, key)) throw InputError(std::string("config field '") + key + "' is missing");
  const Json& v = c.at(key);
  if (!v.is_string()) throw InputError(std::string("config field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::unique_ptr<std::istream> open_input(const std::string& path, std::istream& in,
                                         std::istream*& stream) {
  if (path == "-") {
    stream = &in;
    return nullptr;
  }
  auto file = std::make_unique<std::ifstream>(path);
  if (!*file) throw InputError("cannot open '" + path + "'");
  stream = file.get();
  return file;
}

// ---- statistic selection ----------------------------------------------------

struct Setup {
  NullModel null;
  StatisticSpec statistic;
  std::string kernel;
};

QuadratureConfig quadrature_of(const Json& c) {
  QuadratureConfig q;
  if (has(c, "grid")) q.grid_points = get_size(c, "grid");
  if (has(c, "truncation")) q.truncation_sigmas = get_double(c, "truncation");
  try {
    q.validate();
  } catch (const Error& e) {
    throw InputError(e.what());
  }
  return q;
}

Setup resolve(const Json& c) {
  const std::string null = get_string(c, "null");
  const std::string kind = has(c, "statistic") ? get_string(c, "statistic") : "rd";
  const int given = int{has(c, "alpha")} + int{has(c, "kappa")} + int{has(c, "d0")};
  if (kind == "rd" && given != 1) {
    throw InputError("give exactly one of --alpha/--kappa or --d0");
  }
  if (kind != "rd" && given != 0) {
    throw InputError("--alpha, --kappa and --d0 apply to the rd statistic only");
  }

  Setup s;
  if (null == "uniform") {
    if (!has(c, "l")) throw InputError("the uniform null needs --l");
    const std::size_t l = get_size(c, "l");
    if (l < 1) throw InputError("--l must be at least 1");
    s.null = UniformDiscreteModel{l};
    if (kind == "rd") {
      if (has(c, "kappa")) throw InputError("the uniform test takes --alpha or --d0");
      const double alpha = has(c, "alpha") ? get_double(c, "alpha")
                                           : hamming_alpha_from_distortion(get_double(c, "d0"), l);
      const HammingMixture kernel(alpha, l);
      s.statistic = HammingStatistic{alpha};
      s.kernel = describe(SmoothingKernel{kernel});
    } else if (kind == "lr") {
      s.statistic = LikelihoodRatioStatistic{};
      s.kernel = "identity";
    } else {
      throw InputError("statistic '" + kind + "' does not apply to the uniform null");
    }
  } else if (null == "normal") {
    s.null = StandardNormalModel{};
    if (kind == "rd") {
      if (has(c, "kappa")) throw InputError("the normal test takes --alpha or --d0");
      const double alpha =
          has(c, "alpha") ? get_double(c, "alpha") : gaussian_alpha_from_distortion(get_double(c, "d0"));
      if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw InputError("alpha must be < 1 for the normal test (and >= 0)");
      }
      s.statistic = GaussianStatistic{alpha, quadrature_of(c)};
      s.kernel = describe(SmoothingKernel{GaussianChannel(alpha)});
    } else if (kind == "binned") {
      if (!has(c, "bins")) throw InputError("the binned statistic needs --bins");
      const std::size_t bins = get_size(c, "bins");
      if (bins < 2) throw InputError("--bins must be at least 2");
      s.statistic = BinnedNormalStatistic{bins};
      s.kernel = "quantile-bins(k=" + std::to_string(bins) + ")";
    } else {
      throw InputError("statistic '" + kind + "' does not apply to the normal null");
    }
  } else if (null == "circular") {
    s.null = UniformCircleModel{};
    if (kind == "rd") {
      if (has(c, "alpha")) throw InputError("the circular test takes --kappa or --d0");
      const double kappa =
          has(c, "kappa") ? get_double(c, "kappa") : vonmises_kappa_from_distortion(get_double(c, "d0"));
      const VonMisesSmoother kernel(kappa);
      s.statistic = CircularStatistic{kappa, quadrature_of(c)};
      s.kernel = describe(SmoothingKernel{kernel});
    } else if (kind == "rayleigh") {
      s.statistic = RayleighStatistic{};
      s.kernel = "identity";
    } else {
      throw InputError("statistic '" + kind + "' does not apply to the circular null");
    }
  } else {
    throw InputError("unknown null '" + null + "' (expected uniform, normal or circular)");
  }
  return s;
}

double significance_of(const Json& c) {
  const double sig = has(c, "sig") ? get_double(c, "sig") : 0.05;
  if (!(sig > 0.0 && sig < 1.0)) throw InputError("--sig must lie in (0, 1)");
  return sig;
}

std::size_t replications_of(const Json& c) {
  const std::size_t reps = has(c, "reps") ? get_size(c, "reps") : 1000;
  if (reps < 1) throw InputError("--reps must be at least 1");
  return reps;
}

std::size_t sample_size_of(const Json& c) {
  if (!has(c, "n")) throw InputError("--n is required");
  const std::size_t n = get_size(c, "n");
  if (n < 1) throw InputError("--n must be at least 1");
  return n;
}

std::uint64_t seed_of(const Json& c) { return has(c, "seed") ? c.at("seed").get<std::uint64_t>() : 0; }

std::vector<double> split_numbers(std::string_view text, char sep, const char* what) {
  std::vector<double> out;
  std::size_t start = 0;
  for (;;) {
    const auto end = text.find(sep, start);
    const auto piece = text.substr(start, end == std::string_view::npos ? end : end - start);
    const auto v = parse_double(trim(piece));
    if (!v) throw InputError(std::string("cannot parse ") + what + " '" + std::string(text) + "'");
    out.push_back(*v);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

SamplingModel parse_alternative(const std::string& spec, const NullModel& null) {
  const auto colon = spec.find(':');
  const std::string family = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (family == "null" && colon == std::string::npos) return as_sampling_model(null);
  if (family == "vonmises" || family == "normal") {
    const auto params = split_numbers(rest, ':', "alternative parameters");
    if (params.size() != 2) throw InputError("alternative '" + spec + "' needs two parameters");
    if (family == "vonmises") {
      if (!std::holds_alternative<UniformCircleModel>(null)) {
        throw InputError("a von Mises alternative needs the circular null");
      }
      if (!(params[1] >= 0.0) || !std::isfinite(params[1])) {
        throw InputError("von Mises concentration must be finite and >= 0");
      }
      return VonMisesModel{wrap_angle(params[0]), params[1]};
    }
    if (!std::holds_alternative<StandardNormalModel>(null)) {
      throw InputError("a normal alternative needs the normal null");
    }
    if (!(params[1] > 0.0) || !std::isfinite(params[1]) || !std::isfinite(params[0])) {
      throw InputError("normal alternative needs a finite mean and a positive sd");
    }
    return NormalModel{params[0], params[1]};
  }
  if (family == "discrete") {
    const auto* u = std::get_if<UniformDiscreteModel>(&null);
    if (u == nullptr) throw InputError("a discrete alternative needs the uniform null");
    auto probs = split_numbers(rest, ',', "alternative probabilities");
    if (probs.size() != u->l) {
      throw InputError("discrete alternative has " + std::to_string(probs.size()) +
                       " probabilities, expected " + std::to_string(u->l));
    }
    return CategoricalModel{DiscreteDistribution(std::move(probs))};
  }
  throw InputError("unknown alternative '" + spec +
                   "' (expected vonmises:MU:K, normal:MU:SD, discrete:P1,... or null)");
}

Json mean_and_sd(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = compensated_total(xs) / n;
  CompensatedSum ss;
  for (double x : xs) ss.add((x - mean) * (x - mean));
  Json j;
  j["null_mean"] = json_number(mean);
  j["null_sd"] = json_number(xs.size() > 1 ? std::sqrt(ss.value() / (n - 1.0)) : 0.0);
  return j;
}

// ---- commands -----------------------------------------------------------------

CommandOutcome cmd_test(const Json& c, std::istream& in, std::size_t threads) {
  const Setup setup = resolve(c);
  std::istream* stream = nullptr;
  const auto holder = open_input(get_string(c, "input"), in, stream);
  const bool degrees = has(c, "degrees") && c.at("degrees").get<bool>();

  std::optional<EmpiricalSample> sample;
  if (const auto* u = std::get_if<UniformDiscreteModel>(&setup.null)) {
    if (degrees) throw InputError("--degrees applies to the circular test only");
    sample = EmpiricalSample::categorical(read_labels(*stream, u->l), u->l);
  } else {
    auto values = read_observations(*stream);
    if (values.empty()) throw InputError("no observations in input");
    if (std::holds_alternative<UniformCircleModel>(setup.null)) {
      if (degrees) {
        for (double& v : values) v *= kTwoPi / 360.0;
      }
      sample = EmpiricalSample::circular(std::move(values));
    } else {
      if (degrees) throw InputError("--degrees applies to the circular test only");
      sample = EmpiricalSample::real(std::move(values));
    }
  }

  TestReport report;
  report.config = c;
  report.kernel = setup.kernel;
  report.n = sample->size();
  report.seed = seed_of(c);
  report.statistic = evaluate_statistic(setup.statistic, *sample);

  const bool calibrate_now = has(c, "calibrate") && c.at("calibrate").get<bool>();
  if (calibrate_now && has(c, "critical")) {
    throw InputError("--calibrate and --critical are mutually exclusive");
  }
  if (calibrate_now) {
    const auto cal = calibrate(setup.null, setup.statistic, report.n, replications_of(c),
                               significance_of(c), report.seed, threads);
    report.critical_value = cal.critical_value;
    report.p_value = p_value(report.statistic, cal.null_samples);
  } else if (has(c, "critical")) {
    report.critical_value = get_double(c, "critical");
  }

  CommandOutcome outcome;
  outcome.report = report_json(report, "test");
  outcome.exit_code = decision_of(report) == "reject" ? kExitReject : kExitAccept;
  return outcome;
}

CommandOutcome cmd_rd_solve(const Json& c, std::istream& in) {
  DistortionSpec distortion = HammingDistortion{2};
  std::size_t source_size = 0;
  if (has(c, "matrix") == has(c, "hamming")) {
    throw InputError("give exactly one of --matrix or --hamming");
  }
  if (has(c, "matrix")) {
    std::istream* stream = nullptr;
    const auto holder = open_input(get_string(c, "matrix"), in, stream);
    DenseMatrix m = read_matrix(*stream);
    source_size = m.rows();
    distortion = DistortionMatrix(std::move(m));
  } else {
    const std::size_t l = get_size(c, "hamming");
    if (l < 1) throw InputError("--hamming needs an alphabet size of at least 1");
    distortion = HammingDistortion{l};
    source_size = l;
  }

  DiscreteDistribution source = DiscreteDistribution::uniform(source_size);
  if (has(c, "source")) {
    std::istream* stream = nullptr;
    const auto holder = open_input(get_string(c, "source"), in, stream);
    source = DiscreteDistribution(read_probabilities(*stream));
    if (source.size() != source_size) {
      throw InputError("source has " + std::to_string(source.size()) + " symbols, matrix has " +
                       std::to_string(source_size) + " rows");
    }
  }

  SolverConfig config;
  if (has(c, "tol")) config.tol = get_double(c, "tol");
  if (has(c, "max_iter")) config.max_iter = get_size(c, "max_iter");
  if (!(config.tol > 0.0)) throw InputError("--tol must be positive");
  if (has(c, "beta") == has(c, "d0")) throw InputError("give exactly one of --beta or --d0");

  SolverResult result = [&] {
    if (has(c, "beta")) {
      config.beta = get_double(c, "beta");
      if (!(config.beta >= 0.0 && config.beta <= kMaxBeta)) {
        throw InputError("--beta must lie in [0, 1e6]");
      }
      return blahut_arimoto(source, distortion, config);
    }
    return solve_for_distortion(source, distortion, get_double(c, "d0"), config).result;
  }();

  Json report;
  report["command"] = "rd-solve";
  report["config"] = c;
  report["rate"] = json_number(result.point.rate);
  report["distortion"] = json_number(result.point.distortion);
  report["beta"] = json_number(result.point.beta);
  report["iterations"] = result.iterations;
  Json channel = Json::array();
  const DenseMatrix& w = result.channel.matrix;
  for (std::size_t r = 0; r < w.rows(); ++r) {
    Json row = Json::array();
    for (double v : w.row(r)) row.push_back(json_number(v));
    channel.push_back(std::move(row));
  }
  report["channel"] = std::move(channel);
  Json marginal = Json::array();
  for (double v : result.output_marginal) marginal.push_back(json_number(v));
  report["output_marginal"] = std::move(marginal);
  report["tool_version"] = kToolVersion;
  return {std::move(report), kExitAccept};
}

Json statistic_header(const char* command, const Json& c, const Setup& setup, std::size_t n) {
  Json report;
  report["command"] = command;
  report["config"] = c;
  report["statistic"] = describe(setup.statistic);
  report["kernel"] = setup.kernel;
  report["n"] = n;
  return report;
}

CommandOutcome cmd_calibrate(const Json& c, std::size_t threads) {
  const Setup setup = resolve(c);
  const std::size_t n = sample_size_of(c);
  const auto cal = calibrate(setup.null, setup.statistic, n, replications_of(c), significance_of(c),
                             seed_of(c), threads);
  Json report = statistic_header("calibrate", c, setup, n);
  report["replications"] = cal.replications;
  report["significance"] = json_number(cal.significance);
  report["critical_value"] = json_number(cal.critical_value);
  report.update(mean_and_sd(cal.null_samples));
  if (has(c, "keep_samples") && c.at("keep_samples").get<bool>()) {
    Json samples = Json::array();
    for (double v : cal.null_samples) samples.push_back(json_number(v));
    report["null_samples"] = std::move(samples);
  }
  report["seed"] = cal.seed;
  report["tool_version"] = kToolVersion;
  return {std::move(report), kExitAccept};
}

CommandOutcome cmd_power(const Json& c, std::size_t threads) {
  const Setup setup = resolve(c);
  const std::size_t n = sample_size_of(c);
  const std::size_t reps = replications_of(c);
  const std::uint64_t seed = seed_of(c);
  const SamplingModel alternative = parse_alternative(get_string(c, "alt"), setup.null);

  double critical = 0.0;
  if (has(c, "critical")) {
    critical = get_double(c, "critical");
  } else {
    critical = calibrate(setup.null, setup.statistic, n, reps, significance_of(c), seed, threads)
                   .critical_value;
  }
  // A separate stream so null and alternative draws never coincide.
  const auto est = power_estimate(setup.statistic, critical, alternative, n, reps,
                                  replication_seed(seed, 0x616c74ULL), threads);

  Json report = statistic_header("power", c, setup, n);
  report["alternative"] = describe(alternative);
  report["critical_value"] = json_number(critical);
  report["replications"] = est.replications;
  report["power"] = json_number(est.power);
  report["standard_error"] = json_number(est.standard_error);
  report["seed"] = seed;
  report["tool_version"] = kToolVersion;
  return {std::move(report), kExitAccept};
}

CommandOutcome cmd_diagnose(const Json& c, std::size_t threads) {
  const Setup setup = resolve(c);
  const std::size_t n = sample_size_of(c);
  const std::size_t reps = replications_of(c);
  const auto samples = simulate_null(setup.null, setup.statistic, n, reps, seed_of(c), threads);
  const auto diag = gaussianity_diagnostics(samples);

  Json report = statistic_header("diagnose", c, setup, n);
  report["replications"] = reps;
  report.update(mean_and_sd(samples));
  report["skewness"] = json_number(diag.skewness);
  report["excess_kurtosis"] = json_number(diag.excess_kurtosis);
  report["qq_correlation"] = json_number(diag.qq_correlation);
  report["degenerate"] = diag.degenerate;
  report["seed"] = seed_of(c);
  report["tool_version"] = kToolVersion;
  return {std::move(report), kExitAccept};
}

// ---- flag parsing -------------------------------------------------------------

struct Flags {
  std::string null;
  std::string input;
  std::string statistic = "rd";
  std::string alt;
  std::string matrix;
  std::string source;
  std::string report;
  std::string output;
  std::size_t l = 0;
  std::size_t n = 0;
  std::size_t bins = 0;
  std::size_t reps = 1000;
  std::size_t grid = 4096;
  std::size_t threads = 0;
  std::size_t hamming = 0;
  std::size_t max_iter = 100000;
  double alpha = 0.0;
  double kappa = 0.0;
  double d0 = 0.0;
  double beta = 0.0;
  double sig = 0.05;
  double truncation = 10.0;
  double critical = 0.0;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  bool calibrate = false;
  bool degrees = false;
  bool keep_samples = false;
};

struct Options {
  std::vector<std::pair<const char*, CLI::Option*>> given;

  void track(const char* key, CLI::Option* opt) { given.emplace_back(key, opt); }
  bool count(const char* key) const {
    for (const auto& [k, opt] : given) {
      if (std::string_view(k) == key && opt->count() > 0) return true;
    }
    return false;
  }
};

void add_kernel_flags(CLI::App* app, Flags& f, Options& o) {
  o.track("alpha", app->add_option("--alpha", f.alpha, "Hamming or Gaussian smoothing parameter"));
  o.track("kappa", app->add_option("--kappa", f.kappa, "von Mises concentration"));
  o.track("d0", app->add_option("--d0", f.d0, "distortion level, converted to the kernel parameter"));
  o.track("l", app->add_option("--l", f.l, "alphabet size for the uniform null"));
  o.track("grid", app->add_option("--grid", f.grid, "minimum quadrature nodes"));
  o.track("truncation", app->add_option("--truncation", f.truncation, "quadrature window in sigmas"));
  o.track("seed", app->add_option("--seed", f.seed, "master seed (default: $RDGOF_SEED, else 0)"));
  app->add_option("--threads", f.threads, "worker threads, 0 for all cores");
  app->add_option("--output,-o", f.output, "write the report here instead of stdout");
}

void add_simulation_flags(CLI::App* app, Flags& f, Options& o) {
  app->add_option("null", f.null, "uniform, normal or circular")
      ->required()
      ->check(CLI::IsMember({"uniform", "normal", "circular"}));
  o.track("statistic",
          app->add_option("--statistic", f.statistic, "rd, lr (uniform), rayleigh (circular) or binned (normal)")
              ->check(CLI::IsMember({"rd", "lr", "rayleigh", "binned"})));
  o.track("bins", app->add_option("--bins", f.bins, "bins for the binned statistic"));
  o.track("n", app->add_option("--n", f.n, "sample size")->required());
  o.track("reps", app->add_option("--reps", f.reps, "Monte Carlo replications"));
  o.track("sig", app->add_option("--sig", f.sig, "significance level"));
  add_kernel_flags(app, f, o);
}

std::uint64_t resolve_seed(const Flags& f, const Options& o) {
  if (o.count("seed")) return f.seed;
  if (const char* env = std::getenv("RDGOF_SEED"); env != nullptr && *env != '\0') {
    std::uint64_t v = 0;
    const std::string_view s = env;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw InputError("RDGOF_SEED must be a nonnegative integer");
    }
    return v;
  }
  return 0;
}

void put_kernel(Json& c, const Flags& f, const Options& o) {
  if (o.count("l")) c["l"] = f.l;
  if (o.count("alpha")) c["alpha"] = f.alpha;
  if (o.count("kappa")) c["kappa"] = f.kappa;
  if (o.count("d0")) c["d0"] = f.d0;
  c["grid"] = f.grid;
  c["truncation"] = f.truncation;
}

Json simulation_config(const char* command, const Flags& f, const Options& o) {
  Json c;
  c["command"] = command;
  c["null"] = f.null;
  c["statistic"] = f.statistic;
  if (o.count("bins")) c["bins"] = f.bins;
  put_kernel(c, f, o);
  c["n"] = f.n;
  c["reps"] = f.reps;
  c["sig"] = f.sig;
  c["seed"] = resolve_seed(f, o);
  return c;
}

void write_report(const Json& report, const std::string& path, std::ostream& out) {
  const std::string text = to_json_text(report);
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot write '" + path + "'");
  file << text;
  if (!file) throw InputError("failed writing '" + path + "'");
}

}  // namespace

std::vector<double> read_observations(std::istream& in) {
  std::vector<double> out;
  for_each_line(in, [&out](std::string_view text, std::size_t number) {
    const auto v = parse_double(text);
    if (!v) bad_line(number, text, "cannot parse observation");
    if (!std::isfinite(*v)) bad_line(number, text, "observation is not finite:");
    out.push_back(*v);
  });
  return out;
}

std::vector<std::size_t> read_labels(std::istream& in, std::size_t l) {
  std::vector<std::size_t> out;
  for_each_line(in, [&out, l](std::string_view text, std::size_t number) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      bad_line(number, text, "expected a nonnegative integer label, got");
    }
    if (v >= l) bad_line(number, text, "label outside the alphabet:");
    out.push_back(v);
  });
  if (out.empty()) throw InputError("no observations in input");
  return out;
}

DenseMatrix read_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  for_each_line(in, [&rows](std::string_view text, std::size_t number) {
    std::vector<double> row;
    for (auto token : split_ws(text)) {
      const auto v = parse_double(token);
      if (!v) bad_line(number, token, "cannot parse matrix entry");
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError("line " + std::to_string(number) + ": row has " +
                       std::to_string(row.size()) + " entries, expected " +
                       std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  });
  if (rows.empty()) throw InputError("matrix file is empty");
  return DenseMatrix::from_rows(rows);
}

std::vector<double> read_probabilities(std::istream& in) {
  std::vector<double> out;
  for_each_line(in, [&out](std::string_view text, std::size_t number) {
    for (auto token : split_ws(text)) {
      const auto v = parse_double(token);
      if (!v) bad_line(number, token, "cannot parse probability");
      out.push_back(*v);
    }
  });
  if (out.empty()) throw InputError("source file is empty");
  return out;
}

CommandOutcome execute_config(const Json& config, std::istream& in, std::size_t threads) {
  if (!config.is_object()) throw InputError("config must be a JSON object");
  const std::string command = get_string(config, "command");
  if (command == "test") return cmd_test(config, in, threads);
  if (command == "rd-solve") return cmd_rd_solve(config, in);
  if (command == "calibrate") return cmd_calibrate(config, threads);
  if (command == "power") return cmd_power(config, threads);
  if (command == "diagnose") return cmd_diagnose(config, threads);
  throw InputError("unknown command '" + command + "'");
}

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Rate-distortion goodness-of-fit tests", "rdgof"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  Flags f;
  Options o;

  auto* test = app.add_subcommand("test", "test a sample against a null model");
  test->add_option("null", f.null, "uniform, normal or circular")
      ->required()
      ->check(CLI::IsMember({"uniform", "normal", "circular"}));
  test->add_option("--input,-i", f.input, "observations, one per line; - for stdin")->required();
  add_kernel_flags(test, f, o);
  o.track("calibrate", test->add_flag("--calibrate", f.calibrate, "Monte Carlo critical value and p-value"));
  o.track("reps", test->add_option("--reps", f.reps, "Monte Carlo replications"));
  o.track("sig", test->add_option("--sig", f.sig, "significance level"));
  o.track("critical", test->add_option("--critical", f.critical, "known critical value"));
  o.track("degrees", test->add_flag("--degrees", f.degrees, "angles are in degrees"));

  auto* solve = app.add_subcommand("rd-solve", "solve a finite rate-distortion problem");
  o.track("matrix", solve->add_option("--matrix", f.matrix, "distortion matrix file"));
  o.track("hamming", solve->add_option("--hamming", f.hamming, "Hamming distortion on L symbols"));
  o.track("source", solve->add_option("--source", f.source, "source probabilities (default uniform)"));
  o.track("beta", solve->add_option("--beta", f.beta, "slope parameter"));
  o.track("d0", solve->add_option("--d0", f.d0, "target distortion"));
  o.track("tol", solve->add_option("--tol", f.tol, "convergence tolerance on the rate"));
  o.track("max_iter", solve->add_option("--max-iter", f.max_iter, "iteration budget"));
  solve->add_option("--output,-o", f.output, "write the report here instead of stdout");

  auto* cal = app.add_subcommand("calibrate", "simulate the null distribution of a statistic");
  add_simulation_flags(cal, f, o);
  cal->add_flag("--keep-samples", f.keep_samples, "include the simulated values in the report");

  auto* power = app.add_subcommand("power", "estimate power against an alternative");
  add_simulation_flags(power, f, o);
  power->add_option("--alt", f.alt, "vonmises:MU:K, normal:MU:SD, discrete:P1,P2,... or null")
      ->required();
  o.track("critical", power->add_option("--critical", f.critical, "critical value (default: calibrate)"));

  auto* diagnose = app.add_subcommand("diagnose", "normality diagnostics of the null distribution");
  add_simulation_flags(diagnose, f, o);

  auto* replay = app.add_subcommand("replay", "re-run the configuration embedded in a report");
  replay->add_option("--report", f.report, "report file; - for stdin")->required();
  replay->add_option("--threads", f.threads, "worker threads, 0 for all cores");
  replay->add_option("--output,-o", f.output, "write the report here instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitAccept : kExitInput;
  }

  try {
    Json config;
    std::istream* config_input = &in;
    std::unique_ptr<std::istream> holder;
    if (test->parsed()) {
      config["command"] = "test";
      config["null"] = f.null;
      config["input"] = f.input;
      put_kernel(config, f, o);
      config["degrees"] = f.degrees;
      config["calibrate"] = f.calibrate;
      config["reps"] = f.reps;
      config["sig"] = f.sig;
      if (o.count("critical")) config["critical"] = f.critical;
      config["seed"] = resolve_seed(f, o);
    } else if (solve->parsed()) {
      config["command"] = "rd-solve";
      if (o.count("matrix")) config["matrix"] = f.matrix;
      if (o.count("hamming")) config["hamming"] = f.hamming;
      if (o.count("source")) config["source"] = f.source;
      if (o.count("beta")) config["beta"] = f.beta;
      if (o.count("d0")) config["d0"] = f.d0;
      config["tol"] = f.tol;
      config["max_iter"] = f.max_iter;
    } else if (cal->parsed()) {
      config = simulation_config("calibrate", f, o);
      if (f.keep_samples) config["keep_samples"] = true;
    } else if (power->parsed()) {
      config = simulation_config("power", f, o);
      config["alt"] = f.alt;
      if (o.count("critical")) config["critical"] = f.critical;
    } else if (diagnose->parsed()) {
      config = simulation_config("diagnose", f, o);
    } else {
      std::istream* stream = nullptr;
      holder = open_input(f.report, in, stream);
      Json report;
      try {
        report = Json::parse(*stream);
      } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("report is not valid JSON: ") + e.what());
      }
      if (!report.is_object() || !report.contains("config")) {
        throw InputError("report has no embedded config");
      }
      config = report.at("config");
      // A replayed test reading stdin cannot also take the report from it.
      if (f.report == "-") config_input = nullptr;
    }

    std::istringstream empty;
    const CommandOutcome outcome =
        execute_config(config, config_input ? *config_input : empty, f.threads);
    write_report(outcome.report, f.output, out);
    return outcome.exit_code;
  } catch (const ConvergenceError& e) {
    const auto& last = e.last_iterate();
    err << "error: " << e.what() << "\n"
        << "last iterate: iterations=" << last.iterations
        << " rate=" << format_double(last.point.rate)
        << " distortion=" << format_double(last.point.distortion)
        << " beta=" << format_double(last.point.beta) << "\n";
    return kExitNumeric;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const RangeError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    err << "error: bad config: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace rdgof

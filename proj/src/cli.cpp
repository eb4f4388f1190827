#include "pdphase/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pdphase/bayes.hpp"
#include "pdphase/corr.hpp"
#include "pdphase/error.hpp"
#include "pdphase/kernel.hpp"
#include "pdphase/parallel.hpp"
#include "pdphase/spectral.hpp"
#include "pdphase/urnsim.hpp"

namespace pdphase::cli {

namespace {

using nlohmann::ordered_json;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

ordered_json finite_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

/// Data sink: a file, or standard output for "-".
class Sink {
public:
  explicit Sink(const std::string& path) : path_(path) {
    if (path_ != "-") {
      file_ = std::make_unique<std::ofstream>(path_, std::ios::binary);
      if (!*file_) throw ValidationError("cannot open '" + path_ + "' for writing");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  bool is_stdout() const { return !file_; }

  void close() {
    stream().flush();
    if (!stream()) throw std::runtime_error("write to '" + path_ + "' failed");
  }

private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
};

/// Everything a subcommand needs besides its own flags.
struct Common {
  std::string out = "-";
  bool meta_on_stdout = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out,-o", c.out, "Output file, '-' for standard output");
  sub->add_flag("--meta", c.meta_on_stdout,
                "Write stdout.meta.json alongside when the output goes to standard output");
}

/// Resolved flag values of a subcommand (defaults included).
ordered_json resolved_config(const CLI::App& sub) {
  ordered_json flags = ordered_json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help") continue;
    if (opt->get_expected_max() == 0) {
      flags[name] = opt->count() > 0;
      continue;
    }
    if (opt->count() > 0) {
      const auto& res = opt->results();
      if (res.size() == 1) {
        flags[name] = res.front();
      } else {
        flags[name] = res;
      }
    } else if (!opt->get_default_str().empty()) {
      flags[name] = opt->get_default_str();
    } else {
      flags[name] = nullptr;
    }
  }
  return flags;
}

void write_meta(const CLI::App& sub, const Common& c, const ordered_json& extra) {
  std::string path;
  if (c.out != "-") {
    path = c.out + ".meta.json";
  } else if (c.meta_on_stdout) {
    path = "stdout.meta.json";
  } else {
    return;
  }
  ordered_json meta;
  meta["tool"] = "pd-phaselab";
  meta["version"] = kVersion;
  meta["subcommand"] = sub.get_name();
  meta["config"] = resolved_config(sub);
  meta["threads"] = worker_count();
  if (!extra.is_null()) meta["summary"] = extra;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open '" + path + "' for writing");
  f << meta.dump(2) << '\n';
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw ValidationError(std::string(what) + ": empty list");
  return out;
}

/// `lo:hi:logN` or `lo:hi:linN`.
std::vector<double> parse_range(const std::string& text) {
  const auto bad = [&] {
    return ValidationError("range '" + text + "' must look like lo:hi:logN or lo:hi:linN");
  };
  const auto c1 = text.find(':');
  const auto c2 = text.find(':', c1 == std::string::npos ? 0 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) throw bad();
  double lo = 0.0, hi = 0.0;
  long count = 0;
  std::string mode;
  try {
    lo = std::stod(text.substr(0, c1));
    hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    const std::string tail = text.substr(c2 + 1);
    if (tail.rfind("log", 0) == 0 || tail.rfind("lin", 0) == 0) {
      mode = tail.substr(0, 3);
      count = std::stol(tail.substr(3));
    } else {
      throw bad();
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    throw bad();
  }
  if (count < 1 || !(hi >= lo)) throw bad();
  if (mode == "log") {
    if (!(lo > 0.0)) throw ValidationError("log range needs lo > 0");
    return log_grid(lo, hi, static_cast<std::size_t>(count));
  }
  return linear_grid(lo, hi, static_cast<std::size_t>(count));
}

KernelFamily parse_family(const std::string& s) {
  if (s == "exp") return KernelFamily::Exponential;
  if (s == "pow") return KernelFamily::Power;
  throw ValidationError("--kernel must be 'exp' or 'pow' (got '" + s + "')");
}

ordered_json kernel_json(const DecayKernel& k) {
  ordered_json j;
  j["family"] = k.family() == KernelFamily::Exponential ? "exp"
                : k.family() == KernelFamily::Power     ? "pow"
                                                        : "custom";
  j["param"] = finite_or_null(k.parameter());
  return j;
}

ordered_json convergence_json(const ConvergenceClass& c) {
  ordered_json j;
  j["phase"] = to_string(c.phase);
  j["t_hat"] = finite_or_null(c.t_hat);
  return j;
}

// --- estimate --------------------------------------------------------------

struct EstimateArgs {
  Common common;
  std::string input;
  std::string kernel = "pow";
  std::optional<double> fix_rho;
  std::string grid_out;
  std::size_t theta_nodes = 200;
  std::size_t rho_nodes = 200;
  std::size_t kernel_nodes = 100;
  double tolerance = 1e-5;
};

int run_estimate(const CLI::App& sub, const EstimateArgs& a) {
  const auto history = ingest_history_csv(a.input);
  SearchConfig search;
  search.theta_nodes = a.theta_nodes;
  search.rho_nodes = a.rho_nodes;
  search.kernel_nodes = a.kernel_nodes;
  search.tolerance = a.tolerance;
  search.fixed_rho = a.fix_rho;
  search.keep_grid = !a.grid_out.empty();
  const auto result = map_estimate(history, parse_family(a.kernel), search);

  ordered_json out;
  out["theta"] = result.theta_hat;
  out["rho_d"] = result.rho_hat;
  out["kernel"] = kernel_json(result.kernel_hat);
  out["log_posterior"] = result.log_posterior_at_map;
  out["at_boundary"] = result.at_boundary;
  out["kernel_estimated"] = result.kernel_estimated;
  out["convergence"] = convergence_json(result.convergence);

  if (result.at_boundary) warn("MAP estimate lies on the boundary of the search range");
  if (!result.kernel_estimated)
    warn("single-period history: kernel parameter is not identifiable and was not estimated");
  if (result.convergence.phase == Phase::NonConvergent)
    warn("MAP kernel " + result.kernel_hat.to_string() +
         " is NonConvergent (T-hat criterion: T-hat = sum of d_i is infinite); the PD "
         "estimate does not converge as the history grows");

  Sink sink(a.common.out);
  sink.stream() << out.dump(2) << '\n';
  sink.close();

  if (result.grid) {
    const auto& g = *result.grid;
    ordered_json grid;
    grid["theta"] = g.theta;
    grid["rho_d"] = g.rho_d;
    grid["kernel_param"] = g.kernel_param;
    grid["layout"] = "row-major [theta][rho_d][kernel_param]";
    ordered_json values = ordered_json::array();
    for (const double v : g.log_density) values.push_back(finite_or_null(v));
    grid["log_density"] = std::move(values);
    std::ofstream f(a.grid_out, std::ios::binary);
    if (!f) throw ValidationError("cannot open '" + a.grid_out + "' for writing");
    f << grid.dump() << '\n';
  }
  write_meta(sub, a.common, out);
  return 0;
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
  Common common;
  double alpha = 1.0;
  double beta = 1.0;
  std::string kernel = "exp:0.9";
  std::size_t t = 20000;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  std::size_t checkpoints = 32;
};

int run_simulate(const CLI::App& sub, const SimulateArgs& a) {
  UrnConfig config;
  config.alpha = a.alpha;
  config.beta = a.beta;
  config.kernel = DecayKernel::parse(a.kernel);
  config.horizon = a.t;
  config.validate();
  if (a.checkpoints < 1) throw ValidationError("--checkpoints must be >= 1");
  const auto trace =
      variance_trace(config, a.samples, default_checkpoints(a.t, a.checkpoints), a.seed);

  Sink sink(a.common.out);
  auto& os = sink.stream();
  os << "t,mean_z,var_z\n";
  for (std::size_t i = 0; i < trace.checkpoints.size(); ++i)
    os << trace.checkpoints[i] << ',' << fmt(trace.mean_z[i]) << ',' << fmt(trace.var_z[i])
       << '\n';
  sink.close();
  write_meta(sub, a.common, nullptr);
  return 0;
}

// --- corr ------------------------------------------------------------------

struct CorrArgs {
  Common common;
  double alpha = 1.0;
  double beta = 1.0;
  std::string kernel = "exp:0.9";
  std::size_t t = 1000;
  std::string method = "auto";
};

int run_corr(const CLI::App& sub, const CorrArgs& a) {
  const auto kernel = DecayKernel::parse(a.kernel);
  if (a.t < 1) throw ValidationError("--t must be >= 1");
  CorrMethod method = CorrMethod::Auto;
  if (a.method == "direct") method = CorrMethod::Direct;
  else if (a.method == "fft") method = CorrMethod::Fft;
  else if (a.method != "auto") throw ValidationError("--method must be auto, direct or fft");

  const auto trace = corr_recursion(a.alpha, a.beta, kernel, a.t, method);
  if (trace.first_increase)
    warn("C(t) increases at t = " + std::to_string(*trace.first_increase) +
         "; monotone decay is expected for non-increasing kernels");

  Sink sink(a.common.out);
  auto& os = sink.stream();
  os << "t,c,tau,xi\n";
  for (std::size_t t = 0; t <= trace.horizon(); ++t)
    os << t << ',' << fmt(trace.c[t]) << ',' << fmt(trace.tau[t]) << ',' << fmt(trace.xi[t])
       << '\n';
  sink.close();
  write_meta(sub, a.common, nullptr);
  return 0;
}

// --- fss -------------------------------------------------------------------

struct FssArgs {
  Common common;
  double alpha = 1.0;
  double beta = 1.0;
  std::string gammas = "0.1,0.5,1,1.5,2,3";
  std::size_t t = 200000;
  bool no_critical = false;
  double horizon_tol = 0.05;
};

int run_fss(const CLI::App& sub, const FssArgs& a) {
  const auto gammas = parse_list(a.gammas, "--gammas");
  FssOptions options;
  options.locate_critical = !a.no_critical;
  options.horizon_tol = a.horizon_tol;
  const auto report = fss_analysis(a.alpha, a.beta, gammas, a.t, options);

  ordered_json out;
  out["alpha"] = report.alpha;
  out["beta"] = report.beta;
  out["t"] = report.horizon;
  ordered_json points = ordered_json::array();
  for (const auto& p : report.points) {
    ordered_json j;
    j["gamma"] = p.gamma;
    j["xi_over_t"] = p.xi_over_t;
    j["xi_ratio"] = p.xi_ratio;
    j["tau_ratio"] = p.tau_ratio;
    j["local_delta"] = p.local_delta;
    j["regime"] = to_string(p.regime);
    j["fixed_point"] = to_string(p.fixed_point);
    j["log_corrected"] = p.log_corrected;
    points.push_back(std::move(j));
  }
  out["points"] = std::move(points);
  const auto opt = [](const std::optional<double>& v) {
    return v ? finite_or_null(*v) : ordered_json(nullptr);
  };
  ordered_json crit;
  crit["gamma_c"] = opt(report.gamma_c);
  crit["xi_t_c"] = opt(report.xi_t_c);
  crit["tau_ratio_c"] = opt(report.tau_ratio_c);
  crit["delta_from_tau"] = opt(report.delta_from_tau);
  crit["delta_from_xi"] = opt(report.delta_from_xi);
  out["unstable_fixed_point"] = std::move(crit);

  Sink sink(a.common.out);
  sink.stream() << out.dump(2) << '\n';
  sink.close();
  write_meta(sub, a.common, nullptr);
  return 0;
}

// --- delta-critical ---------------------------------------------------------

struct DeltaArgs {
  Common common;
  std::string ab_range = "0.1:100:log50";
  double t_cutoff = 1e8;
};

int run_delta(const CLI::App& sub, const DeltaArgs& a) {
  const auto values = parse_range(a.ab_range);
  std::vector<double> deltas(values.size());
  std::vector<std::string> failures(values.size());
  parallel_for(values.size(), [&](std::size_t i) {
    try {
      deltas[i] = delta_critical(values[i], a.t_cutoff);
    } catch (const NoRoot& e) {
      deltas[i] = std::numeric_limits<double>::quiet_NaN();
      failures[i] = e.what();
    }
  });
  for (const auto& f : failures)
    if (!f.empty()) warn(f);

  Sink sink(a.common.out);
  auto& os = sink.stream();
  os << "alpha_plus_beta,delta\n";
  for (std::size_t i = 0; i < values.size(); ++i) os << fmt(values[i]) << ',' << fmt(deltas[i]) << '\n';
  sink.close();
  write_meta(sub, a.common, nullptr);
  return 0;
}

// --- spectrum / acf --------------------------------------------------------

struct SpectrumArgs {
  Common common;
  std::string input;
  std::string detrend = "mean";
  bool hann = false;
};

int run_spectrum(const CLI::App& sub, const SpectrumArgs& a) {
  const auto series = ingest_rate_csv(a.input);
  PeriodogramOptions options;
  options.detrend = parse_detrend(a.detrend);
  options.hann_window = a.hann;
  const auto spec = periodogram(series, options);
  if (spec.short_series)
    warn("series has " + std::to_string(spec.n) +
         " periods (< 128); the log-log slope rests on few frequency bins");

  Sink sink(a.common.out);
  auto& os = sink.stream();
  os << "freq,power\n";
  for (std::size_t i = 0; i < spec.freqs.size(); ++i)
    os << fmt(spec.freqs[i]) << ',' << fmt(spec.power[i]) << '\n';
  sink.close();
  std::cerr << "loglog_slope = " << fmt(spec.loglog_slope) << " +/- " << fmt(spec.slope_stderr)
            << " (" << spec.fit_points << " bins)\n";

  ordered_json summary;
  summary["n"] = spec.n;
  summary["loglog_slope"] = finite_or_null(spec.loglog_slope);
  summary["slope_stderr"] = finite_or_null(spec.slope_stderr);
  summary["fit_points"] = spec.fit_points;
  write_meta(sub, a.common, summary);
  return 0;
}

struct AcfArgs {
  Common common;
  std::string input;
  std::size_t max_lag = 20;
};

int run_acf(const CLI::App& sub, const AcfArgs& a) {
  const auto series = ingest_rate_csv(a.input);
  const auto rho = autocorrelation(series, a.max_lag);
  Sink sink(a.common.out);
  auto& os = sink.stream();
  os << "lag,acf\n";
  for (std::size_t h = 0; h < rho.size(); ++h) os << h << ',' << fmt(rho[h]) << '\n';
  sink.close();
  write_meta(sub, a.common, nullptr);
  return 0;
}

// --- variance-approx ---------------------------------------------------------

struct VarianceArgs {
  Common common;
  std::string input;
  std::string n_list;
  double theta = 0.01;
  double rho = 0.02;
  std::string kernel = "pow:2";
};

int run_variance(const CLI::App& sub, const VarianceArgs& a) {
  std::vector<Count> n;
  if (!a.input.empty() == !a.n_list.empty())
    throw ValidationError("give exactly one of --input and --n");
  if (!a.input.empty()) {
    for (const auto& p : ingest_history_csv(a.input).periods()) n.push_back(p.n);
  } else {
    for (const double v : parse_list(a.n_list, "--n")) {
      if (!(v >= 1.0) || v != std::floor(v)) throw ValidationError("--n entries must be integers >= 1");
      n.push_back(static_cast<Count>(v));
    }
  }
  const auto kernel = DecayKernel::parse(a.kernel);
  const double v = approx_total_variance(n, a.theta, a.rho, kernel);

  ordered_json out;
  out["periods"] = n.size();
  out["total_obligors"] = std::accumulate(n.begin(), n.end(), Count{0});
  out["variance"] = v;
  Sink sink(a.common.out);
  sink.stream() << out.dump(2) << '\n';
  sink.close();
  write_meta(sub, a.common, nullptr);
  return 0;
}

} // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Default-probability estimation and discounted Polya urn analysis", "pd-phaselab"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.footer("Environment: PD_PHASELAB_THREADS caps worker threads (default: all cores).");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "MAP estimate of (theta, rho_d, kernel parameter)");
  estimate->add_option("--input,-i", est.input, "History CSV: label,n,k or label,n,rate")
      ->required()
      ->check(CLI::ExistingFile);
  estimate->add_option("--kernel", est.kernel, "Kernel family: exp or pow");
  estimate->add_option("--fix-rho", est.fix_rho, "Hold rho_d fixed at this value");
  estimate->add_option("--grid-out", est.grid_out, "Write the coarse posterior grid as JSON");
  estimate->add_option("--theta-nodes", est.theta_nodes, "Logit-spaced theta nodes");
  estimate->add_option("--rho-nodes", est.rho_nodes, "Log-spaced rho_d nodes");
  estimate->add_option("--kernel-nodes", est.kernel_nodes, "Kernel parameter nodes");
  estimate->add_option("--tol", est.tolerance, "Refinement tolerance per coordinate");
  add_common(estimate, est.common);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo mean and variance of Z(t)");
  simulate->add_option("--alpha", sim.alpha, "Urn alpha (> 0)");
  simulate->add_option("--beta", sim.beta, "Urn beta (> 0)");
  simulate->add_option("--kernel", sim.kernel, "Kernel spec: exp:<r>, pow:<gamma>, custom:<d0,d1,...>");
  simulate->add_option("--t", sim.t, "Horizon T");
  simulate->add_option("--samples", sim.samples, "Independent paths");
  simulate->add_option("--seed", sim.seed, "Base seed");
  simulate->add_option("--checkpoints", sim.checkpoints, "Log-spaced checkpoints in [100, T]");
  add_common(simulate, sim.common);

  CorrArgs cor;
  auto* corr = app.add_subcommand("corr", "Correlation function C(t) with tau(t) and xi(t)");
  corr->add_option("--alpha", cor.alpha, "alpha (> 0)");
  corr->add_option("--beta", cor.beta, "beta (> 0)");
  corr->add_option("--kernel", cor.kernel, "Kernel spec: exp:<r>, pow:<gamma>, custom:<d0,d1,...>");
  corr->add_option("--t", cor.t, "Horizon T");
  corr->add_option("--method", cor.method, "auto, direct or fft");
  add_common(corr, cor.common);

  FssArgs fa;
  auto* fss = app.add_subcommand("fss", "Finite-size scaling over power-law exponents");
  fss->add_option("--alpha", fa.alpha, "alpha (> 0)");
  fss->add_option("--beta", fa.beta, "beta (> 0)");
  fss->add_option("--gammas", fa.gammas, "Comma-separated exponents");
  fss->add_option("--t", fa.t, "Horizon T");
  fss->add_option("--horizon-tol", fa.horizon_tol,
                  "Largest accepted relative change of xi(2t)/xi(t) over the last two doublings");
  fss->add_flag("--no-critical", fa.no_critical, "Skip the bisection for the unstable fixed point");
  add_common(fss, fa.common);

  DeltaArgs da;
  auto* delta = app.add_subcommand("delta-critical", "Decay exponent at gamma = 1 versus alpha + beta");
  delta->add_option("--ab-range", da.ab_range, "alpha + beta values as lo:hi:logN or lo:hi:linN");
  delta->add_option("--t-cutoff", da.t_cutoff, "Upper time cutoff of the integral (>= 1e6)");
  add_common(delta, da.common);

  SpectrumArgs sa;
  auto* spectrum = app.add_subcommand("spectrum", "Periodogram and log-log slope of a rate series");
  spectrum->add_option("--input,-i", sa.input, "Rate CSV: label,rate or label,n,k")
      ->required()
      ->check(CLI::ExistingFile);
  spectrum->add_option("--detrend", sa.detrend, "none, mean or linear");
  spectrum->add_flag("--hann", sa.hann, "Apply a Hann taper before the transform");
  add_common(spectrum, sa.common);

  AcfArgs aa;
  auto* acf = app.add_subcommand("acf", "Sample autocorrelation of a rate series");
  acf->add_option("--input,-i", aa.input, "Rate CSV: label,rate or label,n,k")
      ->required()
      ->check(CLI::ExistingFile);
  acf->add_option("--max-lag", aa.max_lag, "Largest lag (<= length / 2)");
  add_common(acf, aa.common);

  VarianceArgs va;
  auto* variance = app.add_subcommand("variance-approx", "Closed-form variance of the total default count");
  variance->add_option("--input,-i", va.input, "History CSV supplying n_i");
  variance->add_option("--n", va.n_list, "Comma-separated n_i instead of --input");
  variance->add_option("--theta", va.theta, "Long-run PD");
  variance->add_option("--rho", va.rho, "Default correlation rho_d");
  variance->add_option("--kernel", va.kernel, "Kernel spec: exp:<r>, pow:<gamma>, custom:<d0,d1,...>");
  add_common(variance, va.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*estimate) return run_estimate(*estimate, est);
    if (*simulate) return run_simulate(*simulate, sim);
    if (*corr) return run_corr(*corr, cor);
    if (*fss) return run_fss(*fss, fa);
    if (*delta) return run_delta(*delta, da);
    if (*spectrum) return run_spectrum(*spectrum, sa);
    if (*acf) return run_acf(*acf, aa);
    if (*variance) return run_variance(*variance, va);
  } catch (const InvariantViolation& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

} // namespace pdphase::cli

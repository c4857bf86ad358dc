#include "relaysec/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "relaysec/analytic.hpp"
#include "relaysec/channel.hpp"
#include "relaysec/montecarlo.hpp"
#include "relaysec/optimizer.hpp"

namespace relaysec::cli {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line;
}

// ---------------------------------------------------------------------------
// flags shared by all subcommands

struct Flags {
  double gamma_p_db = 30.0;
  std::vector<double> eta;
  bool epa = false;
  double rs = 1.0;
  double rt = 1.0;
  std::vector<double> theta;
  double d = 0.5;
  double alpha = 4.0;
  double omega_sr = 0.0;
  double omega_rd = 0.0;
  double gamma_min = 0.5;
  std::string problem = "opa1";
  double mc_samples = 0.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string config;
  std::string objective = "asymptotic";
  int particles = 2000;
  int iterations = 100;
  unsigned jobs = 0;
  // sweep
  std::string axis;
  std::vector<double> values;
  std::vector<std::string> metrics;
  std::string allocation = "epa";
  // preset
  std::string preset;
};

struct Given {
  CLI::Option* eta = nullptr;
  CLI::Option* rt = nullptr;
  CLI::Option* d = nullptr;
  CLI::Option* omega_sr = nullptr;
  CLI::Option* omega_rd = nullptr;
  CLI::Option* mc_samples = nullptr;
  CLI::Option* gamma_p_db = nullptr;
  CLI::Option* rs = nullptr;
  CLI::Option* gamma_min = nullptr;
  CLI::Option* objective = nullptr;

  static bool set(const CLI::Option* o) { return o != nullptr && o->count() > 0; }
};

void add_system_flags(CLI::App* sub, Flags& f, Given& g) {
  g.gamma_p_db = sub->add_option("--gamma-p-db", f.gamma_p_db, "total transmit SNR in dB")->capture_default_str();
  g.eta = sub->add_option("--eta", f.eta, "power split a,b,c (sums to 1)")->delimiter(',');
  sub->add_flag("--epa", f.epa, "equal power allocation (default)");
  g.rs = sub->add_option("--rs", f.rs, "secrecy rate, bits/s/Hz")->capture_default_str();
  g.rt = sub->add_option("--rt", f.rt, "codeword rate, bits/s/Hz (default: rs)");
  g.d = sub->add_option("--d", f.d, "normalized S-R distance in (0,1) (default 0.5)");
  sub->add_option("--alpha", f.alpha, "path-loss exponent")->capture_default_str();
  g.omega_sr = sub->add_option("--omega-sr", f.omega_sr, "mean S-R gain (with --omega-rd, instead of --d)");
  g.omega_rd = sub->add_option("--omega-rd", f.omega_rd, "mean R-D gain");
}

void add_theta(CLI::App* sub, Flags& f) {
  sub->add_option("--theta", f.theta, "equivocation threshold in (0,1]; repeatable")->delimiter(',');
}

void add_output(CLI::App* sub, Flags& f) {
  sub->add_option("--out", f.out, "write CSV here instead of stdout");
  sub->add_option("--config", f.config, "key=value file; command-line flags win");
}

void add_mc(CLI::App* sub, Flags& f, Given& g) {
  g.mc_samples = sub->add_option("--mc-samples", f.mc_samples, "Monte Carlo samples (0 disables)");
  sub->add_option("--seed", f.seed, "RNG seed")->capture_default_str();
}

void add_opt_flags(CLI::App* sub, Flags& f, Given& g) {
  g.gamma_min = sub->add_option("--gamma-min", f.gamma_min, "throughput floor")->capture_default_str();
  sub->add_option("--objective", f.objective, "asymptotic | full")
      ->check(CLI::IsMember({"asymptotic", "full"}))
      ->capture_default_str();
  sub->add_option("--particles", f.particles, "swarm size")->capture_default_str();
  sub->add_option("--iterations", f.iterations, "swarm iterations")->capture_default_str();
}

SystemParams build_params(const Flags& f, const Given& g) {
  SystemParams p;
  p.gamma_p = db_to_linear(f.gamma_p_db);
  if (Given::set(g.eta)) {
    if (f.epa) throw std::invalid_argument("--eta and --epa are mutually exclusive");
    if (f.eta.size() != 3) throw std::invalid_argument("--eta needs exactly three values a,b,c");
    p.eta1 = f.eta[0];
    p.eta2 = f.eta[1];
    p.eta3 = f.eta[2];
  }
  const bool omegas = Given::set(g.omega_sr) || Given::set(g.omega_rd);
  if (omegas) {
    if (Given::set(g.d)) throw std::invalid_argument("use either --d or --omega-sr/--omega-rd, not both");
    if (!Given::set(g.omega_sr) || !Given::set(g.omega_rd)) {
      throw std::invalid_argument("--omega-sr and --omega-rd must be given together");
    }
    p.omega_sr = f.omega_sr;
    p.omega_rd = f.omega_rd;
  } else {
    if (!(f.d > 0.0 && f.d < 1.0)) throw std::invalid_argument("d must lie in (0, 1)");
    p.alpha = f.alpha;
    p.place_relay(f.d);
  }
  p.alpha = f.alpha;
  p.rs = f.rs;
  p.rt = Given::set(g.rt) ? f.rt : f.rs;
  p.validate();
  return p;
}

std::vector<double> thetas_of(const Flags& f) {
  std::vector<double> t = f.theta.empty() ? std::vector<double>{1.0} : f.theta;
  for (double v : t) {
    if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("theta must lie in (0, 1] (got " + fmt(v) + ")");
  }
  return t;
}

std::uint64_t mc_samples_of(const Flags& f, const Given& g, std::uint64_t fallback) {
  if (!Given::set(g.mc_samples)) return fallback;
  const double n = f.mc_samples;
  if (!(n >= 0.0) || n != std::floor(n) || n > 1e15) {
    throw std::invalid_argument("--mc-samples must be a nonnegative integer");
  }
  if (n > 0 && n < 1000) throw std::invalid_argument("--mc-samples must be 0 or >= 1000");
  return static_cast<std::uint64_t>(n);
}

opt::ObjectiveMode mode_of(const Flags& f) {
  return f.objective == "full" ? opt::ObjectiveMode::full : opt::ObjectiveMode::asymptotic;
}

opt::PsoConfig pso_of(const Flags& f) {
  opt::PsoConfig c;
  c.n_particles = f.particles;
  c.n_iterations = f.iterations;
  c.seed = f.seed;
  c.validate();
  return c;
}

unsigned jobs_of(const Flags& f) { return f.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : f.jobs; }

std::vector<std::string> system_cells(const SystemParams& p) {
  return {fmt(linear_to_db(p.gamma_p)), p.d ? fmt(*p.d) : "", fmt(p.omega_sr), fmt(p.omega_rd), fmt(p.eta1),
          fmt(p.eta2),  fmt(p.eta3),  fmt(p.rs), fmt(p.rt)};
}

const std::vector<std::string> kSystemHeader{"gamma_p_db", "d", "omega_sr", "omega_rd", "eta1",
                                             "eta2",       "eta3", "rs",     "rt"};

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw std::range_error(std::string("non-finite ") + what);
  return v;
}

// ---------------------------------------------------------------------------
// eval / mc

void run_eval(const Flags& f, const Given& g, std::ostream& out) {
  const SystemParams p = build_params(f, g);
  const auto thetas = thetas_of(f);
  const std::uint64_t n = mc_samples_of(f, g, 0);

  std::vector<std::string> header = kSystemHeader;
  for (const char* h : {"theta", "gsop", "gsop_asym", "afe", "afe_asym", "ailr", "ailr_asym", "throughput"}) {
    header.emplace_back(h);
  }
  std::optional<mc::McReport> report;
  if (n > 0) {
    for (const char* h : {"mc_samples", "seed", "mc_gsop", "mc_gsop_ci", "mc_afe", "mc_afe_ci", "mc_ailr", "mc_ailr_ci",
                          "mc_throughput", "mc_throughput_ci"}) {
      header.emplace_back(h);
    }
    mc::McConfig cfg;
    cfg.n_samples = n;
    cfg.seed = f.seed;
    cfg.theta_grid = thetas;
    report = mc::simulate(p, cfg);
  }
  out << join(header) << '\n';

  const double afe = checked(analytic::afe(p), "afe");
  const double afe_asym = analytic::afe_asymptotic(p);
  const double thr = checked(analytic::throughput(p), "throughput");
  for (double t : thetas) {
    auto cells = system_cells(p);
    cells.push_back(fmt(t));
    cells.push_back(fmt(checked(analytic::gsop(p, t), "gsop")));
    cells.push_back(fmt(analytic::gsop_asymptotic(p, t)));
    cells.push_back(fmt(afe));
    cells.push_back(fmt(afe_asym));
    cells.push_back(fmt((1.0 - afe) * p.rs));
    cells.push_back(fmt((1.0 - afe_asym) * p.rs));
    cells.push_back(fmt(thr));
    if (report) {
      const auto& gs = report->gsop.at(t);
      for (const auto& v : {std::to_string(n), std::to_string(f.seed), fmt(gs.value), fmt(gs.half_width),
                            fmt(report->afe.value), fmt(report->afe.half_width), fmt(report->ailr.value),
                            fmt(report->ailr.half_width), fmt(report->throughput.value),
                            fmt(report->throughput.half_width)}) {
        cells.push_back(v);
      }
    }
    out << join(cells) << '\n';
  }
}

void run_mc(const Flags& f, const Given& g, std::ostream& out) {
  const SystemParams p = build_params(f, g);
  mc::McConfig cfg;
  cfg.n_samples = mc_samples_of(f, g, 1'000'000);
  if (cfg.n_samples == 0) throw std::invalid_argument("mc needs --mc-samples >= 1000");
  cfg.seed = f.seed;
  cfg.theta_grid = thetas_of(f);
  const auto r = mc::simulate(p, cfg);

  std::vector<std::string> header = kSystemHeader;
  for (const char* h : {"theta", "mc_samples", "seed", "gsop", "gsop_ci", "afe", "afe_ci", "ailr", "ailr_ci",
                        "throughput", "throughput_ci"}) {
    header.emplace_back(h);
  }
  out << join(header) << '\n';
  for (double t : cfg.theta_grid) {
    auto cells = system_cells(p);
    const auto& gs = r.gsop.at(t);
    for (const auto& v : {fmt(t), std::to_string(r.n_samples), std::to_string(r.seed), fmt(gs.value),
                          fmt(gs.half_width), fmt(r.afe.value), fmt(r.afe.half_width), fmt(r.ailr.value),
                          fmt(r.ailr.half_width), fmt(r.throughput.value), fmt(r.throughput.half_width)}) {
      cells.push_back(v);
    }
    out << join(cells) << '\n';
  }
}

// ---------------------------------------------------------------------------
// optimize

int run_optimize(const Flags& f, const Given& g, std::ostream& out, std::ostream& err) {
  opt::OptProblem prob;
  prob.kind = opt::parse_problem(f.problem);
  prob.gamma_min = f.gamma_min;
  const auto thetas = thetas_of(f);
  if (thetas.size() != 1) throw std::invalid_argument("optimize takes a single --theta");
  prob.theta = thetas.front();
  // reuse the system flags for SNR and relay placement only
  const SystemParams p = build_params(f, g);
  prob.gamma_p = p.gamma_p;
  prob.omega_sr = p.omega_sr;
  prob.omega_rd = p.omega_rd;
  prob.mode = mode_of(f);
  const opt::OptResult r = opt::solve(prob, pso_of(f));

  out << "problem,objective_mode,theta,gamma_min,gamma_p_db,omega_sr,omega_rd,eta1,eta2,eta3,rs,rt,objective,"
         "throughput,feasible,iterations,seed\n";
  out << join({std::string(opt::problem_name(prob.kind)), f.objective, fmt(prob.theta), fmt(prob.gamma_min),
               fmt(f.gamma_p_db), fmt(prob.omega_sr), fmt(prob.omega_rd), fmt(r.eta1), fmt(r.eta2), fmt(r.eta3),
               fmt(r.rs), fmt(r.rt), fmt(checked(r.objective, "objective")), fmt(r.throughput),
               r.feasible ? "1" : "0", std::to_string(r.iterations_used), std::to_string(f.seed)})
      << '\n';

  const char* metric = prob.kind == opt::ProblemKind::opa1_min_gsop   ? "GSOP"
                       : prob.kind == opt::ProblemKind::opa2_max_afe ? "AFE"
                                                                     : "AILR";
  err << opt::problem_name(prob.kind) << ": " << metric << " = " << fmt(r.objective) << " at eta = (" << fmt(r.eta1)
      << ", " << fmt(r.eta2) << ", " << fmt(r.eta3) << "), rs = " << fmt(r.rs) << ", rt = " << fmt(r.rt)
      << "; throughput " << fmt(r.throughput) << (r.feasible ? " > " : " <= ") << fmt(prob.gamma_min)
      << (r.feasible ? "" : " (infeasible)") << '\n';
  return r.feasible ? kOk : kInfeasible;
}

// ---------------------------------------------------------------------------
// sweeps

enum class Axis { gamma_p_db, rs, d, gamma_min };
enum class Allocation { epa, fixed, opa1, opa2, opa3 };
enum Metric : unsigned { kGsop = 1, kAfe = 2, kAilr = 4, kThroughput = 8 };

constexpr std::array<std::pair<Metric, const char*>, 4> kMetricNames{
    {{kGsop, "gsop"}, {kAfe, "afe"}, {kAilr, "ailr"}, {kThroughput, "throughput"}}};

Axis parse_axis(const std::string& s) {
  if (s == "gamma_p_db" || s == "gamma-p-db") return Axis::gamma_p_db;
  if (s == "rs") return Axis::rs;
  if (s == "d") return Axis::d;
  if (s == "gamma_min" || s == "gamma-min") return Axis::gamma_min;
  throw std::invalid_argument("unknown axis '" + s + "' (expected gamma_p_db, rs, d or gamma_min)");
}

const char* axis_name(Axis a) {
  switch (a) {
    case Axis::gamma_p_db:
      return "gamma_p_db";
    case Axis::rs:
      return "rs";
    case Axis::d:
      return "d";
    case Axis::gamma_min:
      return "gamma_min";
  }
  return "?";
}

Allocation parse_allocation(const std::string& s) {
  if (s == "epa") return Allocation::epa;
  if (s == "fixed") return Allocation::fixed;
  if (s == "opa1") return Allocation::opa1;
  if (s == "opa2") return Allocation::opa2;
  if (s == "opa3") return Allocation::opa3;
  throw std::invalid_argument("unknown allocation '" + s + "' (expected epa, fixed, opa1, opa2 or opa3)");
}

const char* allocation_name(Allocation a) {
  switch (a) {
    case Allocation::epa:
      return "epa";
    case Allocation::fixed:
      return "fixed";
    case Allocation::opa1:
      return "opa1";
    case Allocation::opa2:
      return "opa2";
    case Allocation::opa3:
      return "opa3";
  }
  return "?";
}

unsigned parse_metrics(const std::vector<std::string>& names) {
  if (names.empty()) return kGsop | kAfe | kAilr | kThroughput;
  unsigned mask = 0;
  for (const auto& n : names) {
    auto it = std::find_if(kMetricNames.begin(), kMetricNames.end(), [&](const auto& e) { return n == e.second; });
    if (it == kMetricNames.end()) throw std::invalid_argument("unknown metric '" + n + "'");
    mask |= it->first;
  }
  return mask;
}

struct SweepSpec {
  std::string series;
  Axis axis = Axis::gamma_p_db;
  std::vector<double> values;
  SystemParams base;
  double gamma_min = 0.5;
  std::vector<double> thetas{1.0};
  Allocation allocation = Allocation::epa;
  unsigned metrics = kGsop | kAfe | kAilr | kThroughput;
  opt::ObjectiveMode mode = opt::ObjectiveMode::asymptotic;
  opt::PsoConfig pso;
  std::uint64_t mc_samples = 0;
  std::uint64_t seed = 1;

  void validate() const {
    if (values.empty()) throw std::invalid_argument("sweep values must not be empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i]) || (i > 0 && !(values[i] > values[i - 1]))) {
        throw std::invalid_argument("sweep values must be finite and strictly increasing");
      }
    }
    if (thetas.empty()) throw std::invalid_argument("theta list must not be empty");
    if (metrics == 0) throw std::invalid_argument("no metrics requested");
  }
};

std::vector<std::string> sweep_header(unsigned metrics, bool with_mc) {
  std::vector<std::string> h{"series", "axis", "value", "allocation", "theta"};
  h.insert(h.end(), kSystemHeader.begin(), kSystemHeader.end());
  h.emplace_back("gamma_min");
  h.emplace_back("feasible");
  for (const auto& [m, name] : kMetricNames) {
    if (metrics & m) h.emplace_back(name);
  }
  if (with_mc) {
    for (const auto& [m, name] : kMetricNames) {
      if (metrics & m) {
        h.push_back(std::string("mc_") + name);
        h.push_back(std::string("mc_") + name + "_ci");
      }
    }
  }
  return h;
}

std::optional<opt::ProblemKind> problem_of(Allocation a) {
  switch (a) {
    case Allocation::opa1:
      return opt::ProblemKind::opa1_min_gsop;
    case Allocation::opa2:
      return opt::ProblemKind::opa2_max_afe;
    case Allocation::opa3:
      return opt::ProblemKind::opa3_min_ailr;
    default:
      return std::nullopt;
  }
}

// One CSV line for (value index, theta index) of a sweep.
std::string sweep_row(const SweepSpec& s, std::size_t vi, std::size_t ti, bool with_mc) {
  const double v = s.values[vi];
  const double theta = s.thetas[ti];
  SystemParams p = s.base;
  double gamma_min = s.gamma_min;
  switch (s.axis) {
    case Axis::gamma_p_db:
      p.gamma_p = db_to_linear(v);
      break;
    case Axis::rs:
      p.rs = v;
      p.rt = v;
      break;
    case Axis::d:
      p.place_relay(v);
      break;
    case Axis::gamma_min:
      gamma_min = v;
      break;
  }

  // Decide the allocation. Outside the gamma_min axis the rate is pinned and
  // only the optimizing allocations look at the throughput floor.
  bool feasible = true;
  bool have_point = true;
  const auto kind = problem_of(s.allocation);
  const bool floor_axis = s.axis == Axis::gamma_min;
  if (kind || floor_axis) {
    opt::OptProblem prob;
    prob.kind = kind.value_or(opt::ProblemKind::opa1_min_gsop);
    prob.gamma_min = gamma_min;
    prob.theta = theta;
    prob.gamma_p = p.gamma_p;
    prob.omega_sr = p.omega_sr;
    prob.omega_rd = p.omega_rd;
    prob.mode = s.mode;
    if (!floor_axis) prob.fixed_rs = p.rs;
    try {
      opt::OptResult r;
      if (kind) {
        r = opt::solve(prob, s.pso);
      } else {
        prob.fixed_eta = std::array<double, 3>{p.eta1, p.eta2, p.eta3};
        r = opt::solve_fixed_allocation(prob);
      }
      p.eta1 = r.eta1;
      p.eta2 = r.eta2;
      p.eta3 = r.eta3;
      p.rs = r.rs;
      p.rt = r.rt;
      feasible = r.feasible;
    } catch (const opt::InfeasibleProblem&) {
      feasible = false;
      have_point = false;
    }
  }

  std::vector<std::string> cells{s.series, axis_name(s.axis), fmt(v), allocation_name(s.allocation), fmt(theta)};
  if (have_point) {
    auto sys = system_cells(p);
    cells.insert(cells.end(), sys.begin(), sys.end());
  } else {
    cells.push_back(fmt(linear_to_db(p.gamma_p)));
    cells.push_back(p.d ? fmt(*p.d) : "");
    cells.push_back(fmt(p.omega_sr));
    cells.push_back(fmt(p.omega_rd));
    for (int i = 0; i < 5; ++i) cells.emplace_back();
  }
  cells.push_back(fmt(gamma_min));
  cells.push_back(feasible ? "1" : "0");

  const auto blanks = [&](int n) {
    for (int i = 0; i < n; ++i) cells.emplace_back();
  };
  if (!have_point) {
    int n = 0;
    for (const auto& e : kMetricNames) n += (s.metrics & e.first) ? 1 : 0;
    blanks(with_mc ? 3 * n : n);
    return join(cells);
  }

  std::optional<double> afe;
  auto afe_of = [&] {
    if (!afe) afe = checked(analytic::afe(p), "afe");
    return *afe;
  };
  if (s.metrics & kGsop) cells.push_back(fmt(checked(analytic::gsop(p, theta), "gsop")));
  if (s.metrics & kAfe) cells.push_back(fmt(afe_of()));
  if (s.metrics & kAilr) cells.push_back(fmt((1.0 - afe_of()) * p.rs));
  if (s.metrics & kThroughput) cells.push_back(fmt(checked(analytic::throughput(p), "throughput")));

  if (with_mc) {
    mc::McConfig cfg;
    cfg.n_samples = s.mc_samples;
    cfg.seed = s.seed ^ static_cast<std::uint64_t>(vi * s.thetas.size() + ti);
    cfg.theta_grid = {theta};
    cfg.workers = 1;
    const auto r = mc::simulate(p, cfg);
    auto push = [&](const mc::Estimate& e) {
      cells.push_back(fmt(e.value));
      cells.push_back(fmt(e.half_width));
    };
    if (s.metrics & kGsop) push(r.gsop.at(theta));
    if (s.metrics & kAfe) push(r.afe);
    if (s.metrics & kAilr) push(r.ailr);
    if (s.metrics & kThroughput) push(r.throughput);
  }
  return join(cells);
}

// Evaluates every row of every spec on a worker pool and writes them in
// spec / axis / theta order.
void run_sweeps(const std::vector<SweepSpec>& specs, unsigned jobs, std::ostream& out) {
  if (specs.empty()) throw std::invalid_argument("nothing to sweep");
  const unsigned metrics = specs.front().metrics;
  const bool with_mc = specs.front().mc_samples > 0;
  struct Task {
    const SweepSpec* spec;
    std::size_t vi, ti;
  };
  std::vector<Task> tasks;
  for (const auto& s : specs) {
    s.validate();
    if (s.metrics != metrics || (s.mc_samples > 0) != with_mc) {
      throw std::logic_error("run_sweeps: specs disagree on columns");
    }
    for (std::size_t vi = 0; vi < s.values.size(); ++vi) {
      for (std::size_t ti = 0; ti < s.thetas.size(); ++ti) tasks.push_back({&s, vi, ti});
    }
  }

  std::vector<std::string> lines(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
      try {
        lines[i] = sweep_row(*tasks[i].spec, tasks[i].vi, tasks[i].ti, with_mc);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size()));
  if (n <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  out << join(sweep_header(metrics, with_mc)) << '\n';
  for (const auto& l : lines) out << l << '\n';
}

void run_sweep(const Flags& f, const Given& g, std::ostream& out) {
  SweepSpec s;
  s.axis = parse_axis(f.axis);
  s.values = f.values;
  s.allocation = parse_allocation(f.allocation);
  if (s.allocation == Allocation::fixed && !Given::set(g.eta)) {
    throw std::invalid_argument("allocation=fixed needs explicit --eta");
  }
  if (s.allocation == Allocation::epa && Given::set(g.eta)) {
    throw std::invalid_argument("--eta needs --allocation fixed");
  }
  if (s.axis == Axis::d && (Given::set(g.omega_sr) || Given::set(g.omega_rd))) {
    throw std::invalid_argument("a d sweep places the relay itself; drop --omega-sr/--omega-rd");
  }
  s.base = build_params(f, g);
  s.series = allocation_name(s.allocation);
  s.gamma_min = f.gamma_min;
  s.thetas = thetas_of(f);
  s.metrics = parse_metrics(f.metrics);
  s.mode = mode_of(f);
  s.pso = pso_of(f);
  s.mc_samples = mc_samples_of(f, g, 0);
  s.seed = f.seed;
  if (s.axis == Axis::d) {
    for (double v : s.values) {
      if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument("d values must lie in (0, 1)");
    }
  }
  if (s.axis == Axis::rs) {
    for (double v : s.values) {
      if (!(v > 0.0)) throw std::invalid_argument("rs values must be > 0");
    }
  }
  if (s.axis == Axis::gamma_min) {
    for (double v : s.values) {
      if (!(v > 0.0)) throw std::invalid_argument("gamma_min values must be > 0");
    }
  }
  run_sweeps({s}, jobs_of(f), out);
}

// ---------------------------------------------------------------------------
// figure presets

std::vector<double> steps(double lo, double hi, double step) {
  std::vector<double> v;
  for (int i = 0;; ++i) {
    const double x = std::round((lo + i * step) * 1e9) / 1e9;
    if (x > hi + 1e-12) break;
    v.push_back(x);
  }
  return v;
}

std::vector<SweepSpec> preset_specs(const std::string& name, const SweepSpec& proto) {
  auto make = [&](Axis axis, std::vector<double> values, Allocation a, std::vector<double> thetas, double gamma_min) {
    SweepSpec s = proto;
    s.axis = axis;
    s.values = std::move(values);
    s.allocation = a;
    s.series = allocation_name(a);
    s.thetas = std::move(thetas);
    s.gamma_min = gamma_min;
    return s;
  };
  const std::vector<Allocation> all{Allocation::epa, Allocation::opa1, Allocation::opa2, Allocation::opa3};
  std::vector<SweepSpec> out;
  auto family = [&](Axis axis, const std::vector<double>& values, std::vector<double> thetas, double gamma_min,
                    unsigned metrics) {
    for (auto a : all) {
      out.push_back(make(axis, values, a, thetas, gamma_min));
      out.back().metrics = metrics;
    }
  };
  if (name == "fig2") {
    out.push_back(make(Axis::gamma_p_db, steps(10, 50, 2.5), Allocation::epa, {0.1, 0.5, 1.0}, 0.5));
    out.back().metrics = kGsop;
  } else if (name == "fig3") {
    family(Axis::rs, steps(0.2, 3.0, 0.2), {0.1, 1.0}, 0.1, kGsop);
  } else if (name == "fig4") {
    family(Axis::rs, steps(0.2, 3.0, 0.2), {0.1, 1.0}, 0.1, kAfe | kAilr);
  } else if (name == "fig5") {
    family(Axis::d, steps(0.1, 0.9, 0.05), {0.1, 0.5, 1.0}, 0.5, kGsop);
  } else if (name == "fig6") {
    family(Axis::d, steps(0.1, 0.9, 0.05), {0.1, 1.0}, 0.5, kAfe | kAilr);
  } else if (name == "fig7") {
    family(Axis::gamma_min, steps(0.25, 3.75, 0.25), {0.1, 1.0}, 0.5, kGsop);
  } else if (name == "fig8") {
    family(Axis::gamma_min, steps(0.25, 3.75, 0.25), {0.1, 1.0}, 0.5, kAfe | kAilr);
  } else if (name == "fig9") {
    for (double d : {0.2, 0.5, 0.8}) {
      SweepSpec s = make(Axis::rs, steps(0.25, 8.0, 0.25), Allocation::epa, {1.0}, 0.5);
      s.base.place_relay(d);
      s.metrics = kThroughput;
      s.series = "epa d=" + fmt(d);
      out.push_back(s);
      for (double eta3 : {0.2, 0.8}) {
        SweepSpec t = s;
        t.allocation = Allocation::fixed;
        const double eta2 = analytic::eta2_throughput_optimal(eta3, t.base.omega_sr, t.base.omega_rd);
        t.base.eta2 = eta2;
        t.base.eta3 = eta3;
        t.base.eta1 = 1.0 - eta2 - eta3;
        t.base.validate();
        t.series = "eta2opt d=" + fmt(d) + " eta3=" + fmt(eta3);
        out.push_back(t);
      }
    }
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return out;
}

void run_preset(const Flags& f, const Given& g, std::ostream& out) {
  SweepSpec proto;
  proto.base = SystemParams::epa(db_to_linear(30.0), 0.5, 1.0);
  proto.mode = Given::set(g.objective) ? mode_of(f) : opt::ObjectiveMode::full;
  proto.pso = pso_of(f);
  proto.mc_samples = mc_samples_of(f, g, 1'000'000);
  proto.seed = f.seed;
  run_sweeps(preset_specs(f.preset, proto), jobs_of(f), out);
}

// ---------------------------------------------------------------------------
// config file: key=value lines, keys are long flag names. A key is applied
// only when the flag is absent from the command line.

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<std::string> config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

bool flag_present(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

std::vector<std::string> apply_config(CLI::App& app, std::vector<std::string> args) {
  const auto path = config_path(args);
  if (!path) return args;
  std::ifstream in(*path);
  if (!in) throw std::invalid_argument("cannot read config file " + *path);
  CLI::App* sub = nullptr;
  for (const auto& a : args) {
    for (auto* s : app.get_subcommands({})) {
      if (s->get_name() == a) sub = s;
    }
    if (sub) break;
  }
  if (!sub) throw std::invalid_argument("--config needs a subcommand");
  std::string line;
  int lineno = 0;
  std::vector<std::string> extra;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(*path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    if (key == "config") throw std::invalid_argument("config files cannot nest");
    const CLI::Option* o = sub->get_option_no_throw(flag);
    if (o == nullptr) throw std::invalid_argument(*path + ": unknown key '" + key + "' for " + sub->get_name());
    if (flag_present(args, flag)) continue;
    if (o->get_expected_min() == 0) {
      if (value == "1" || value == "true") extra.push_back(flag);
    } else {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

int dispatch(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Partial-secrecy metrics for an untrusted AF relay with destination-based jamming", "relaysec"};
  app.require_subcommand(1);

  Given g_eval, g_mc, g_opt, g_sweep, g_preset;
  auto* eval = app.add_subcommand("eval", "closed-form and asymptotic metrics at one operating point");
  add_system_flags(eval, f, g_eval);
  add_theta(eval, f);
  add_mc(eval, f, g_eval);
  add_output(eval, f);

  auto* mc = app.add_subcommand("mc", "Monte Carlo estimates at one operating point");
  add_system_flags(mc, f, g_mc);
  add_theta(mc, f);
  add_mc(mc, f, g_mc);
  add_output(mc, f);

  auto* optimize = app.add_subcommand("optimize", "PSO over (eta1, eta2, eta3, rs, rt)");
  add_system_flags(optimize, f, g_opt);
  add_theta(optimize, f);
  add_opt_flags(optimize, f, g_opt);
  optimize->add_option("--problem", f.problem, "opa1 | opa2 | opa3")->capture_default_str();
  optimize->add_option("--seed", f.seed, "RNG seed")->capture_default_str();
  add_output(optimize, f);

  auto* sweep = app.add_subcommand("sweep", "one CSV row per axis value (and theta)");
  add_system_flags(sweep, f, g_sweep);
  add_theta(sweep, f);
  add_mc(sweep, f, g_sweep);
  add_opt_flags(sweep, f, g_sweep);
  sweep->add_option("--axis", f.axis, "gamma_p_db | rs | d | gamma_min")->required();
  sweep->add_option("--values", f.values, "axis values a,b,c (strictly increasing)")->delimiter(',');
  sweep->add_option("--metrics", f.metrics, "subset of gsop,afe,ailr,throughput")->delimiter(',');
  sweep->add_option("--allocation", f.allocation, "epa | fixed | opa1 | opa2 | opa3")->capture_default_str();
  sweep->add_option("--jobs", f.jobs, "worker threads (0 = all cores)");
  add_output(sweep, f);

  auto* preset = app.add_subcommand("preset", "figure reproductions: " + [] {
    std::string s;
    for (const auto& n : preset_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
  }());
  preset->add_option("name", f.preset, "preset name")->required()->check(CLI::IsMember(preset_names()));
  add_mc(preset, f, g_preset);
  g_preset.objective = preset->add_option("--objective", f.objective, "asymptotic | full (presets default to full)")
      ->check(CLI::IsMember({"asymptotic", "full"}));
  preset->add_option("--particles", f.particles, "swarm size")->capture_default_str();
  preset->add_option("--iterations", f.iterations, "swarm iterations")->capture_default_str();
  preset->add_option("--jobs", f.jobs, "worker threads (0 = all cores)");
  add_output(preset, f);

  std::vector<std::string> args;
  try {
    args = apply_config(app, raw);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInvalidInput;
  }

  std::ofstream file;
  std::ostream* sink = &out;
  if (!f.out.empty()) {
    file.open(f.out, std::ios::binary);
    if (!file) {
      err << "error: cannot open " << f.out << " for writing\n";
      return kInvalidInput;
    }
    sink = &file;
  }
  // buffer so a failing command leaves no partial CSV behind
  std::ostringstream buf;
  int code = kOk;
  if (eval->parsed()) {
    run_eval(f, g_eval, buf);
  } else if (mc->parsed()) {
    run_mc(f, g_mc, buf);
  } else if (optimize->parsed()) {
    code = run_optimize(f, g_opt, buf, err);
  } else if (sweep->parsed()) {
    run_sweep(f, g_sweep, buf);
  } else if (preset->parsed()) {
    run_preset(f, g_preset, buf);
  }
  *sink << buf.str();
  sink->flush();
  return code;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const opt::InfeasibleProblem& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace relaysec::cli

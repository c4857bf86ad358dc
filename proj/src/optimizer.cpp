#include "relaysec/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "relaysec/analytic.hpp"
#include "relaysec/numerics.hpp"

namespace relaysec::opt {

namespace {

constexpr double kEtaMin = 1e-3;
constexpr double kEtaMax = 1.0 - 2e-3;
constexpr double kRateFloor = 1e-3;
constexpr double kSumTolerance = 1e-6;
constexpr int kRefinePoints = 9;

Decision normalized(const Decision& x) {
  const double s = x[0] + x[1] + x[2];
  return {x[0] / s, x[1] / s, x[2] / s, x[3], x[4]};
}

OptResult make_result(const OptProblem& prob, const Decision& x) {
  const SystemParams p = params_for(prob, x);
  OptResult r;
  r.eta1 = x[0];
  r.eta2 = x[1];
  r.eta3 = x[2];
  r.rs = x[3];
  r.rt = x[4];
  const double v = base_objective(x, prob);
  r.objective = prob.kind == ProblemKind::opa2_max_afe ? -v : v;
  r.throughput = analytic::throughput(p);
  r.feasible = constraints_hold(x, prob);
  return r;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i)] = i + 1 == n ? hi : lo + (hi - lo) * i / (n - 1);
  }
  return v;
}

// Evaluates f on every particle row, optionally across threads.
void evaluate_all(const Objective& f, const std::vector<double>& pos, std::size_t dim, std::vector<double>& out,
                  unsigned workers) {
  const std::size_t n = out.size();
  auto one = [&](std::size_t i) { out[i] = f(std::span<const double>(pos.data() + i * dim, dim)); };
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) one(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) one(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void PsoConfig::validate() const {
  // a single particle is allowed; it just never moves
  if (n_particles < 1) throw std::invalid_argument("PsoConfig: n_particles must be >= 1");
  if (n_iterations < 1) throw std::invalid_argument("PsoConfig: n_iterations must be >= 1");
  if (!(c1 >= 0.0) || !(c2 >= 0.0)) throw std::invalid_argument("PsoConfig: c1 and c2 must be >= 0");
  if (!(w >= 0.0)) throw std::invalid_argument("PsoConfig: w must be >= 0");
  if (!(w_decay > 0.0 && w_decay <= 1.0)) throw std::invalid_argument("PsoConfig: w_decay must lie in (0, 1]");
  if (!(penalty_value > 0.0)) throw std::invalid_argument("PsoConfig: penalty_value must be > 0");
}

std::string_view problem_name(ProblemKind kind) noexcept {
  switch (kind) {
    case ProblemKind::opa1_min_gsop:
      return "opa1";
    case ProblemKind::opa2_max_afe:
      return "opa2";
    case ProblemKind::opa3_min_ailr:
      return "opa3";
  }
  return "unknown";
}

ProblemKind parse_problem(std::string_view name) {
  if (name == "opa1") return ProblemKind::opa1_min_gsop;
  if (name == "opa2") return ProblemKind::opa2_max_afe;
  if (name == "opa3") return ProblemKind::opa3_min_ailr;
  throw std::invalid_argument("unknown problem '" + std::string(name) + "' (expected opa1, opa2 or opa3)");
}

void OptProblem::validate() const {
  if (!(gamma_min > 0.0) || !std::isfinite(gamma_min)) {
    throw std::invalid_argument("gamma_min must be > 0");
  }
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in (0, 1]");
  if (!(gamma_p > 0.0) || !std::isfinite(gamma_p)) throw std::invalid_argument("gamma_p must be > 0");
  if (!(omega_sr > 0.0) || !(omega_rd > 0.0)) throw std::invalid_argument("omega_sr and omega_rd must be > 0");
  if (fixed_rs && !(*fixed_rs > 0.0 && std::isfinite(*fixed_rs))) throw std::invalid_argument("fixed rs must be > 0");
  if (fixed_eta) {
    const auto& e = *fixed_eta;
    if (!(e[0] > 0.0 && e[1] > 0.0 && e[2] > 0.0) || std::abs(e[0] + e[1] + e[2] - 1.0) > 1e-9) {
      throw std::invalid_argument("fixed eta must be positive with eta sum equal to 1");
    }
  }
}

SystemParams OptProblem::base_params() const {
  SystemParams p;
  p.gamma_p = gamma_p;
  p.omega_sr = omega_sr;
  p.omega_rd = omega_rd;
  return p;
}

SystemParams params_for(const OptProblem& prob, const Decision& x) {
  SystemParams p = prob.base_params();
  p.eta1 = x[0];
  p.eta2 = x[1];
  p.eta3 = x[2];
  p.rs = x[3];
  p.rt = x[4];
  return p;
}

double base_objective(const Decision& x, const OptProblem& prob) {
  const SystemParams p = params_for(prob, x);
  const bool asym = prob.mode == ObjectiveMode::asymptotic;
  switch (prob.kind) {
    case ProblemKind::opa1_min_gsop:
      return asym ? analytic::gsop_asymptotic(p, prob.theta) : analytic::gsop(p, prob.theta);
    case ProblemKind::opa2_max_afe:
      return asym ? -analytic::afe_asymptotic(p) : -analytic::afe(p);
    case ProblemKind::opa3_min_ailr:
      return asym ? analytic::ailr_asymptotic(p) : analytic::ailr(p);
  }
  throw std::logic_error("base_objective: unknown problem kind");
}

namespace {

int violations(const Decision& x, const OptProblem& prob) {
  int k = 0;
  if (!(analytic::throughput(params_for(prob, x)) > prob.gamma_min)) ++k;
  if (std::abs(x[0] + x[1] + x[2] - 1.0) > kSumTolerance) ++k;
  if (x[4] < x[3]) ++k;
  return k;
}

}  // namespace

bool constraints_hold(const Decision& x, const OptProblem& prob) {
  return x[0] > 0.0 && x[1] > 0.0 && x[2] > 0.0 && x[3] > 0.0 && violations(x, prob) == 0;
}

double penalized_objective(const Decision& x, const OptProblem& prob, double penalty_value) {
  const int k = violations(x, prob);
  const double of = base_objective(x, prob);
  if (k == 0) return of;
  double penalty = 1.0;
  for (int i = 0; i < k; ++i) penalty *= penalty_value;
  return of + penalty;
}

PsoResult pso_minimize(const Objective& f, const Box& bounds, const PsoConfig& cfg) {
  cfg.validate();
  const std::size_t dim = bounds.lower.size();
  if (dim == 0 || bounds.upper.size() != dim) {
    throw std::invalid_argument("pso_minimize: bounds must be nonempty and of equal length");
  }
  for (std::size_t j = 0; j < dim; ++j) {
    if (!std::isfinite(bounds.lower[j]) || !std::isfinite(bounds.upper[j]) || !(bounds.lower[j] < bounds.upper[j])) {
      throw std::invalid_argument("pso_minimize: each bound must be finite with lower < upper");
    }
  }
  const auto np = static_cast<std::size_t>(cfg.n_particles);
  numerics::RandomStream rng(cfg.seed, 0);

  std::vector<double> pos(np * dim);
  std::vector<double> vel(np * dim, 0.0);
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      pos[i * dim + j] = (bounds.upper[j] - bounds.lower[j]) * rng.uniform() + bounds.lower[j];
    }
  }
  std::vector<double> fit(np);
  evaluate_all(f, pos, dim, fit, cfg.workers);

  double fgbest = std::numeric_limits<double>::infinity();
  std::vector<double> gbest(dim);
  for (std::size_t i = 0; i < np; ++i) {
    if (fit[i] < fgbest) {
      fgbest = fit[i];
      std::copy_n(pos.begin() + static_cast<std::ptrdiff_t>(i * dim), dim, gbest.begin());
    }
  }
  if (!std::isfinite(fgbest)) {
    // nothing finite yet; keep the first particle so gbest is defined
    std::copy_n(pos.begin(), dim, gbest.begin());
  }
  std::vector<double> pbest = pos;
  std::vector<double> fpbest = fit;

  PsoResult out;
  double w = cfg.w;
  for (int it = 0; it < cfg.n_iterations; ++it) {
    for (std::size_t i = 0; i < np; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        const std::size_t k = i * dim + j;
        const double r1 = rng.uniform();
        const double r2 = rng.uniform();
        vel[k] = w * vel[k] + cfg.c1 * r1 * (pbest[k] - pos[k]) + cfg.c2 * r2 * (gbest[j] - pos[k]);
        pos[k] = std::clamp(pos[k] + vel[k], bounds.lower[j], bounds.upper[j]);
      }
    }
    evaluate_all(f, pos, dim, fit, cfg.workers);
    for (std::size_t i = 0; i < np; ++i) {
      const auto row = pos.begin() + static_cast<std::ptrdiff_t>(i * dim);
      if (fit[i] < fpbest[i]) {
        fpbest[i] = fit[i];
        std::copy_n(row, dim, pbest.begin() + static_cast<std::ptrdiff_t>(i * dim));
      }
      if (fit[i] < fgbest) {
        fgbest = fit[i];
        std::copy_n(row, dim, gbest.begin());
      }
    }
    w *= cfg.w_decay;
    out.history.push_back(fgbest);
    ++out.iterations_used;
  }
  out.x = gbest;
  out.objective = fgbest;
  return out;
}

double rate_ceiling(const OptProblem& prob) {
  return 2.0 * analytic::max_throughput_envelope(prob.base_params()).rs_opt;
}

Box decision_box(const OptProblem& prob) {
  const double hi = rate_ceiling(prob);
  return {{kEtaMin, kEtaMin, kEtaMin, kRateFloor, kRateFloor}, {kEtaMax, kEtaMax, kEtaMax, hi, hi}};
}

namespace {

// The swarm moves in log coordinates (the optimum sits at small eta1 and
// small rates); etas are normalized before evaluation so the sum constraint
// holds for every candidate.
Box search_box(const OptProblem& prob) {
  Box b = decision_box(prob);
  if (prob.fixed_rs) {
    b.lower[4] = *prob.fixed_rs;
    b.upper[4] = std::max(b.upper[4], 2.0 * *prob.fixed_rs);
  }
  for (auto& v : b.lower) v = std::log(v);
  for (auto& v : b.upper) v = std::log(v);
  return b;
}

Decision from_search(std::span<const double> v, const OptProblem& prob) {
  Decision x = normalized({std::exp(v[0]), std::exp(v[1]), std::exp(v[2]), std::exp(v[3]), std::exp(v[4])});
  if (prob.fixed_eta) std::copy(prob.fixed_eta->begin(), prob.fixed_eta->end(), x.begin());
  if (prob.fixed_rs) x[3] = *prob.fixed_rs;
  return x;
}

void require_feasible(const OptProblem& prob) {
  prob.validate();
  const double t_max = analytic::max_throughput_envelope(prob.base_params()).t_max;
  if (!(prob.gamma_min < t_max)) {
    throw InfeasibleProblem("throughput floor " + std::to_string(prob.gamma_min) +
                            " is not below the maximum achievable throughput " + std::to_string(t_max));
  }
}

}  // namespace

OptResult solve(const OptProblem& prob, const PsoConfig& cfg) {
  require_feasible(prob);
  const PsoResult pso = pso_minimize(
      [&](std::span<const double> v) { return penalized_objective(from_search(v, prob), prob, cfg.penalty_value); },
      search_box(prob), cfg);
  const Decision x = from_search(pso.x, prob);
  OptResult r = make_result(prob, x);
  r.iterations_used = pso.iterations_used;
  r.history = pso.history;
  return r;
}

OptResult solve_fixed_allocation(const OptProblem& prob) {
  prob.validate();
  if (!prob.fixed_eta) throw std::invalid_argument("solve_fixed_allocation: fixed_eta is required");
  const auto& e = *prob.fixed_eta;
  SystemParams p = prob.base_params();
  const auto peak = analytic::max_throughput_in_rs(e[1], e[2], p);
  if (prob.fixed_rs) {
    return make_result(prob, {e[0], e[1], e[2], *prob.fixed_rs, *prob.fixed_rs});
  }
  if (!(peak.t_max > prob.gamma_min)) {
    // report the throughput peak, flagged infeasible
    return make_result(prob, {e[0], e[1], e[2], peak.rs_opt, peak.rs_opt});
  }
  // throughput(rs = rt) rises on (0, rs_opt]; bisect for the floor crossing
  double lo = 0.0;
  double hi = peak.rs_opt;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (analytic::throughput(params_for(prob, {e[0], e[1], e[2], mid, mid})) > prob.gamma_min) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return make_result(prob, {e[0], e[1], e[2], hi, hi});
}

OptResult grid_search_oracle(const OptProblem& prob, int resolution, int refine_levels) {
  if (resolution < 5) throw std::invalid_argument("grid_search_oracle: resolution must be >= 5");
  if (refine_levels < 0) throw std::invalid_argument("grid_search_oracle: refine_levels must be >= 0");
  prob.validate();
  // rates are gridded in log space; the interesting region sits near rs ~ gamma_min
  const double log_lo = std::log(kRateFloor);
  const double log_hi = std::log(rate_ceiling(prob));

  bool found = false;
  Decision best{};
  double best_val = std::numeric_limits<double>::infinity();
  auto scan = [&](const std::vector<double>& e2, const std::vector<double>& e3, const std::vector<double>& log_rs,
                  const std::vector<double>& log_rt) {
    for (double a : e2) {
      for (double b : e3) {
        const double e1 = 1.0 - a - b;
        if (e1 < kEtaMin) continue;
        for (double ls : log_rs) {
          for (double lt : log_rt) {
            if (lt < ls) continue;
            const Decision x{e1, a, b, std::exp(ls), std::exp(lt)};
            if (!constraints_hold(x, prob)) continue;
            const double v = base_objective(x, prob);
            if (v < best_val) {
              best_val = v;
              best = x;
              found = true;
            }
          }
        }
      }
    }
  };

  const auto eta_axis = linspace(kEtaMin, kEtaMax, resolution);
  const auto rate_axis = linspace(log_lo, log_hi, resolution);
  scan(eta_axis, eta_axis, rate_axis, rate_axis);
  if (!found) throw InfeasibleProblem("grid_search_oracle: no feasible grid point");

  // Each level rescans a window of +-2 current steps around the incumbent and
  // halves the step.
  double eta_step = (kEtaMax - kEtaMin) / (resolution - 1);
  double rate_step = (log_hi - log_lo) / (resolution - 1);
  for (int level = 0; level < refine_levels; ++level) {
    const Decision c = best;
    auto local = [](double center, double step, double lo, double hi) {
      return linspace(std::max(lo, center - 2.0 * step), std::min(hi, center + 2.0 * step), kRefinePoints);
    };
    scan(local(c[1], eta_step, kEtaMin, kEtaMax), local(c[2], eta_step, kEtaMin, kEtaMax),
         local(std::log(c[3]), rate_step, log_lo, log_hi), local(std::log(c[4]), rate_step, log_lo, log_hi));
    eta_step *= 0.5;
    rate_step *= 0.5;
  }
  return make_result(prob, best);
}

}  // namespace relaysec::opt

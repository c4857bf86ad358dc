#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "relaysec/channel.hpp"

namespace relaysec::opt {

struct PsoConfig {
  int n_particles = 2000;
  int n_iterations = 100;
  double c1 = 0.3;
  double c2 = 0.3;
  double w = 0.3;
  double w_decay = 0.7;
  std::uint64_t seed = 1;
  double penalty_value = 1e3;
  /// Threads for fitness evaluation. Draws are made up front, so the result
  /// is the same for any worker count.
  unsigned workers = 1;

  void validate() const;
};

enum class ProblemKind { opa1_min_gsop, opa2_max_afe, opa3_min_ailr };
enum class ObjectiveMode { asymptotic, full };

std::string_view problem_name(ProblemKind kind) noexcept;
/// Accepts "opa1", "opa2", "opa3".
ProblemKind parse_problem(std::string_view name);

struct OptProblem {
  ProblemKind kind = ProblemKind::opa1_min_gsop;
  double gamma_min = 0.5;  ///< throughput floor
  double theta = 1.0;      ///< only used by opa1
  double gamma_p = 1000.0;
  double omega_sr = 16.0;
  double omega_rd = 16.0;
  ObjectiveMode mode = ObjectiveMode::asymptotic;
  /// Pins rs (rt is still searched, rt >= rs).
  std::optional<double> fixed_rs;
  /// Pins (eta1, eta2, eta3); only the rates are searched.
  std::optional<std::array<double, 3>> fixed_eta;

  void validate() const;
  /// Fixed part of the operating point; the decision vector fills the rest.
  SystemParams base_params() const;
};

/// (eta1, eta2, eta3, rs, rt)
using Decision = std::array<double, 5>;

SystemParams params_for(const OptProblem& prob, const Decision& x);

struct OptResult {
  double eta1 = 0.0, eta2 = 0.0, eta3 = 0.0, rs = 0.0, rt = 0.0;
  /// Metric at the returned point, natural orientation (opa2 reports +AFE).
  double objective = 0.0;
  /// Full closed-form throughput at the returned point.
  double throughput = 0.0;
  bool feasible = false;
  int iterations_used = 0;
  /// Best minimized (penalized) value after each iteration.
  std::vector<double> history;

  Decision decision() const { return {eta1, eta2, eta3, rs, rt}; }
};

class InfeasibleProblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quantity being minimized at x, without penalties: gsop, -afe or ailr in
/// the problem's objective mode.
double base_objective(const Decision& x, const OptProblem& prob);

/// True when T > gamma_min, |sum eta - 1| <= 1e-6 and rt >= rs.
bool constraints_hold(const Decision& x, const OptProblem& prob);

/// base_objective plus, when any constraint fails, penalty_value^k for k
/// violated constraints.
double penalized_objective(const Decision& x, const OptProblem& prob, double penalty_value = 1e3);

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct PsoResult {
  std::vector<double> x;
  double objective = 0.0;
  int iterations_used = 0;
  std::vector<double> history;

  bool operator==(const PsoResult&) const = default;
};

using Objective = std::function<double(std::span<const double>)>;

/// Global-best particle swarm with inertia decay and box clamping.
PsoResult pso_minimize(const Objective& f, const Box& bounds, const PsoConfig& cfg);

/// Box used by solve(): eta in [1e-3, 1 - 2e-3], rs and rt in [rate_floor, rs_max].
Box decision_box(const OptProblem& prob);

/// Upper end of the rate box: twice the throughput-maximizing rs.
double rate_ceiling(const OptProblem& prob);

/// Runs the swarm on the decision vector. The search evaluates each
/// candidate with its eta normalized onto the simplex.
OptResult solve(const OptProblem& prob, const PsoConfig& cfg);

/// Exact optimum when the allocation is pinned by prob.fixed_eta: every
/// objective worsens with rs and the throughput falls with rt, so the answer
/// is rt = rs = smallest rate with throughput > gamma_min. Infeasible
/// problems come back flagged, not thrown.
OptResult solve_fixed_allocation(const OptProblem& prob);

/// Best feasible point on a (eta2, eta3, rs, rt) grid with eta1 = 1 - eta2 - eta3
/// and rt >= rs, optionally refined `refine_levels` times around the incumbent.
OptResult grid_search_oracle(const OptProblem& prob, int resolution, int refine_levels = 0);

}  // namespace relaysec::opt

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hjcell/linsolve.hpp"
#include "hjcell/problem.hpp"

namespace hjcell {

enum class StopRule { StepNorm, ResidualNorm, Either };

std::string to_string(StopRule r);
StopRule stop_rule_from_string(const std::string& name);

struct LineSearch {
  bool enabled = false;
  double shrink = 0.5;       // beta
  double armijo = 1e-4;      // c
  int max_halvings = 30;
  bool reinit_on_stall = true;
};

struct NewtonConfig {
  double epsilon = 1e-6;
  int max_iterations = 500;
  double damping_mu = 1.0;
  LineSearch line_search;
  // Levenberg-Marquardt shift, used only when the QR flags rank deficiency.
  // Starts with a zero gradient (J_U = 0) need a shift of this order; 1e-6
  // throws the first step far out.
  double lm_tau = 0.1;
  StopRule stop_rule = StopRule::Either;
  LsqOptions lsq;
  bool record_history = false;

  /// Throws ConfigError on an out-of-range knob.
  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double residual_sq = 0.0;  // before the step
  double step_sq = 0.0;
  double mu = 1.0;
  bool regularized = false;
  std::vector<double> lambda;  // after the step
};

struct SolveReport {
  std::vector<double> final_state;
  std::vector<double> lambda;
  int iterations = 0;
  double final_residual_sq = 0.0;
  double final_step_sq = 0.0;
  bool converged = false;
  int regularization_activations = 0;
  int line_search_backtracks_total = 0;
  int line_search_stalls = 0;
  std::size_t guard_activations = 0;  // summed over all residual evaluations
  double wall_time_seconds = 0.0;
  std::string failure_reason;  // empty when converged
  std::vector<IterationRecord> history;
};

struct BacktrackResult {
  double mu = 1.0;
  int backtracks = 0;
  bool stalled = false;
  double residual_sq = 0.0;  // ||F(X + mu delta)||^2
};

/// Armijo backtracking on the merit function ||F||^2/2 along delta:
/// the first mu in {1, beta, beta^2, ...} with
/// ||F(X + mu delta)||^2 <= (1 - 2 c mu) ||F(X)||^2. On failure, either the
/// trial with the smallest residual (reinit_on_stall) or the last trial is
/// returned and the result is marked stalled.
BacktrackResult backtracking_step(const Problem& problem, std::span<const double> x,
                                  std::span<const double> delta, double residual_sq,
                                  const LineSearch& config);

/// Generalized Newton iteration X <- X - mu pinv(J_F(X)) F(X).
SolveReport newton_solve(const Problem& problem, std::span<const double> x0,
                         const NewtonConfig& config = {});
SolveReport newton_solve(const Problem& problem, const NewtonConfig& config = {});

}  // namespace hjcell

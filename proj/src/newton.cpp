#include "hjcell/newton.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "hjcell/errors.hpp"

namespace hjcell {
namespace {

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

std::vector<double> read_lambda(const Problem& problem, std::span<const double> x) {
  std::vector<double> out;
  for (std::size_t s : problem.lambda_slots()) out.push_back(x[s]);
  return out;
}

}  // namespace

std::string to_string(StopRule r) {
  switch (r) {
    case StopRule::StepNorm: return "step";
    case StopRule::ResidualNorm: return "residual";
    case StopRule::Either: return "either";
  }
  return "either";
}

StopRule stop_rule_from_string(const std::string& name) {
  if (name == "step") return StopRule::StepNorm;
  if (name == "residual") return StopRule::ResidualNorm;
  if (name == "either") return StopRule::Either;
  throw ConfigError("unknown stop rule '" + name + "' (expected step, residual or either)");
}

void NewtonConfig::validate() const {
  detail::require_config(epsilon > 0.0, "epsilon must be positive");
  detail::require_config(max_iterations >= 1, "max_iterations must be at least 1");
  detail::require_config(damping_mu > 0.0 && damping_mu <= 1.0, "damping mu must lie in (0, 1]");
  detail::require_config(lm_tau > 0.0, "lm_tau must be positive");
  detail::require_config(lsq.rank_tol >= 0.0, "rank_tol must be nonnegative");
  if (line_search.enabled) {
    detail::require_config(line_search.shrink > 0.0 && line_search.shrink < 1.0,
                           "line search shrink factor must lie in (0, 1)");
    detail::require_config(line_search.armijo > 0.0 && line_search.armijo < 1.0,
                           "Armijo constant must lie in (0, 1)");
    detail::require_config(line_search.max_halvings >= 0, "max_halvings must be nonnegative");
  }
}

BacktrackResult backtracking_step(const Problem& problem, std::span<const double> x,
                                  std::span<const double> delta, double residual_sq,
                                  const LineSearch& config) {
  detail::require(x.size() == delta.size(), "backtracking_step: state and step differ in length");
  BacktrackResult best;
  best.residual_sq = std::numeric_limits<double>::infinity();
  BacktrackResult last;
  std::vector<double> trial(x.size());
  double mu = 1.0;
  for (int k = 0; k <= config.max_halvings; ++k) {
    for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + mu * delta[i];
    const double r = squared_norm(problem.residual(trial));
    last = {mu, k, false, r};
    if (std::isfinite(r) && r <= (1.0 - 2.0 * config.armijo * mu) * residual_sq) return last;
    if (std::isfinite(r) && r < best.residual_sq) best = last;
    mu *= config.shrink;
  }
  BacktrackResult out = config.reinit_on_stall && std::isfinite(best.residual_sq) ? best : last;
  out.backtracks = config.max_halvings;
  out.stalled = true;
  return out;
}

SolveReport newton_solve(const Problem& problem, const NewtonConfig& config) {
  const auto x0 = problem.initial_guess();
  return newton_solve(problem, x0, config);
}

SolveReport newton_solve(const Problem& problem, std::span<const double> x0,
                         const NewtonConfig& config) {
  config.validate();
  detail::require(x0.size() == problem.n_unknowns(),
                  "newton_solve: initial state has length " + std::to_string(x0.size()) +
                      ", problem expects " + std::to_string(problem.n_unknowns()));
  const auto start = std::chrono::steady_clock::now();
  const bool use_step = config.stop_rule != StopRule::ResidualNorm;
  const bool use_residual = config.stop_rule != StopRule::StepNorm;

  SolveReport report;
  std::vector<double> x(x0.begin(), x0.end());
  Evaluation eval;
  double step_sq = std::numeric_limits<double>::infinity();

  auto finish = [&](bool converged, std::string reason) {
    report.converged = converged;
    report.failure_reason = std::move(reason);
    report.final_step_sq = step_sq;
    report.lambda = read_lambda(problem, x);
    report.final_state = std::move(x);
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return std::move(report);
  };

  for (;;) {
    problem.evaluate(x, eval, true);
    report.guard_activations += eval.guard_activations;
    const double res_sq = squared_norm(eval.residual);
    report.final_residual_sq = res_sq;
    if (!std::isfinite(res_sq)) return finish(false, "non-finite residual");
    if (use_residual && res_sq < config.epsilon) return finish(true, "");
    if (report.iterations >= config.max_iterations)
      return finish(false, "iteration limit reached");

    LsqSolution sol = qr_least_squares(eval.jacobian, eval.residual, config.lsq);
    bool regularized = false;
    if (sol.rank == RankFlag::Deficient) {
      ++report.regularization_activations;
      regularized = true;
      sol = qr_least_squares(regularize_diagonal(eval.jacobian, config.lm_tau), eval.residual,
                             config.lsq);
      sol.regularized = true;
      if (sol.rank == RankFlag::Deficient)
        return finish(false, "Jacobian rank deficient after regularization");
    }
    if (!all_finite(sol.delta)) return finish(false, "non-finite Newton step");

    double mu = config.damping_mu;
    if (config.line_search.enabled) {
      const BacktrackResult bt = backtracking_step(problem, x, sol.delta, res_sq, config.line_search);
      mu = bt.mu;
      report.line_search_backtracks_total += bt.backtracks;
      report.line_search_stalls += bt.stalled ? 1 : 0;
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += mu * sol.delta[i];
    step_sq = squared_norm(sol.delta);
    ++report.iterations;
    if (config.record_history)
      report.history.push_back({report.iterations, res_sq, step_sq, mu, regularized, read_lambda(problem, x)});

    if (use_step && step_sq < config.epsilon) {
      problem.evaluate(x, eval, false);
      report.guard_activations += eval.guard_activations;
      report.final_residual_sq = squared_norm(eval.residual);
      if (!std::isfinite(report.final_residual_sq)) return finish(false, "non-finite residual");
      return finish(true, "");
    }
  }
}

}  // namespace hjcell

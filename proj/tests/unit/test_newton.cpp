#include <doctest.h>

#include <cmath>

#include "hjcell/errors.hpp"
#include "hjcell/newton.hpp"
#include "hjcell/problems.hpp"
#include "hjcell/reference.hpp"

using namespace hjcell;

namespace {

// x0^2 + x1^2 = 4 and x0 = x1: square, one root in the positive quadrant.
CallbackProblem circle_line() {
  return CallbackProblem(2, 2, {}, [](std::span<const double> x, std::vector<double>& r, SparseMatrix* J) {
    r[0] = x[0] * x[0] + x[1] * x[1] - 4.0;
    r[1] = x[0] - x[1];
    if (!J) return;
    J->add(0, 0, 2.0 * x[0]);
    J->add(0, 1, 2.0 * x[1]);
    J->add(1, 0, 1.0);
    J->add(1, 1, -1.0);
  });
}

}  // namespace

TEST_CASE("quadratic convergence on a square system") {
  const auto p = circle_line();
  NewtonConfig cfg;
  cfg.epsilon = 1e-24;
  cfg.record_history = true;
  const SolveReport r = newton_solve(p, std::vector<double>{1.0, 2.0}, cfg);
  REQUIRE(r.converged);
  CHECK(r.final_state[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(r.final_state[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(r.iterations <= 8);
  REQUIRE(r.history.size() >= 3);
  // Residual decrease accelerates
  const auto& h = r.history;
  CHECK(h[2].residual_sq < 1e-2 * h[1].residual_sq);
}

TEST_CASE("underdetermined step is the minimum-norm one") {
  // single equation x0 + x1 - 2 = 0 from the origin: min-norm step lands on (1, 1)
  CallbackProblem p(2, 1, {1}, [](std::span<const double> x, std::vector<double>& r, SparseMatrix* J) {
    r[0] = x[0] + x[1] - 2.0;
    if (!J) return;
    J->add(0, 0, 1.0);
    J->add(0, 1, 1.0);
  });
  const SolveReport r = newton_solve(p, NewtonConfig{});
  REQUIRE(r.converged);
  CHECK(r.final_state[0] == doctest::Approx(1.0));
  CHECK(r.final_state[1] == doctest::Approx(1.0));
  REQUIRE(r.lambda.size() == 1);
  CHECK(r.lambda[0] == doctest::Approx(1.0));
}

TEST_CASE("zero Jacobian triggers the regularized step") {
  // r = x^2 - 1 at x = 0 has J = 0
  CallbackProblem p(1, 1, {}, [](std::span<const double> x, std::vector<double>& r, SparseMatrix* J) {
    r[0] = x[0] * x[0] - 1.0;
    if (J) J->add(0, 0, 2.0 * x[0]);
  });
  NewtonConfig cfg;
  cfg.epsilon = 1e-20;
  const SolveReport r = newton_solve(p, std::vector<double>{0.0}, cfg);
  REQUIRE(r.converged);
  CHECK(r.regularization_activations >= 1);
  CHECK(std::abs(r.final_state[0]) == doctest::Approx(1.0));
}

TEST_CASE("stop rules and failure reasons") {
  const auto p = circle_line();
  NewtonConfig cfg;
  cfg.max_iterations = 1;
  cfg.epsilon = 1e-30;
  SolveReport r = newton_solve(p, std::vector<double>{5.0, -3.0}, cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.failure_reason == "iteration limit reached");
  CHECK(r.iterations == 1);

  // Residual rule only: starting at the root stops before any step.
  cfg.max_iterations = 50;
  cfg.stop_rule = StopRule::ResidualNorm;
  cfg.epsilon = 1e-20;
  r = newton_solve(p, std::vector<double>{std::sqrt(2.0), std::sqrt(2.0)}, cfg);
  CHECK(r.converged);
  CHECK(r.iterations == 0);

  CHECK(stop_rule_from_string(to_string(StopRule::StepNorm)) == StopRule::StepNorm);
  CHECK_THROWS_AS(stop_rule_from_string("sometimes"), ConfigError);
  CHECK_THROWS_AS(newton_solve(p, std::vector<double>{1.0}, NewtonConfig{}), ContractError);
}

TEST_CASE("configuration validation") {
  NewtonConfig c;
  c.damping_mu = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.epsilon = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.line_search.enabled = true;
  c.line_search.shrink = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("damping slows but does not prevent convergence") {
  const auto p = circle_line();
  NewtonConfig full, damped;
  damped.damping_mu = 0.5;
  const auto a = newton_solve(p, std::vector<double>{1.0, 2.0}, full);
  const auto b = newton_solve(p, std::vector<double>{1.0, 2.0}, damped);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(b.iterations > a.iterations);
}

TEST_CASE("Armijo backtracking") {
  const auto p = circle_line();
  const std::vector<double> x{1.0, 2.0};
  const auto F = p.residual(x);
  const double r2 = F[0] * F[0] + F[1] * F[1];
  LineSearch ls;
  ls.enabled = true;
  // 40x the Newton direction (0.5, -0.5) needs five halvings.
  const std::vector<double> delta{20.0, -20.0};
  const BacktrackResult bt = backtracking_step(p, x, delta, r2, ls);
  CHECK_FALSE(bt.stalled);
  CHECK(bt.backtracks == 5);
  CHECK(bt.residual_sq <= (1.0 - 2.0 * ls.armijo * bt.mu) * r2);

  // An ascent direction stalls; the best trial is returned.
  const std::vector<double> up{1.0, 1.0};
  ls.max_halvings = 5;
  const BacktrackResult st = backtracking_step(p, x, up, r2, ls);
  CHECK(st.stalled);
  CHECK(st.mu == doctest::Approx(std::pow(0.5, 5)));
}

TEST_CASE("eikonal solve reaches the closed form outside the plateau") {
  const Grid g(1, 100, Boundary::Periodic);
  const Potential V = potential_by_name("sin");
  const auto p = make_eikonal(g, V, {2.0, 0.0});
  const SolveReport r = newton_solve(*p);
  REQUIRE(r.converged);
  CHECK(r.lambda[0] == doctest::Approx(exact_hbar_eikonal_1d(V, 2.0)).epsilon(1e-3));
  CHECK(r.iterations <= 20);
}

TEST_CASE("second order identity on a flat potential") {
  // V = 0 gives u = 0 and lambda = p^2/2 - alpha |s| s exactly
  const Grid g(1, 32, Boundary::Periodic);
  for (auto [pv, s] : {std::pair{0.7, 0.4}, std::pair{-1.2, -0.9}}) {
    const auto prob = make_second_order(g, potential_by_name("zero"), pv, s, 2.0);
    const SolveReport r = newton_solve(*prob);
    REQUIRE(r.converged);
    CHECK(r.lambda[0] == doctest::Approx(0.5 * pv * pv - 2.0 * std::abs(s) * s).epsilon(1e-10));
  }
}

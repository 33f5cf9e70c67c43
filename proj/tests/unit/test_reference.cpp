#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hjcell/errors.hpp"
#include "hjcell/reference.hpp"

using namespace hjcell;

// Frozen values from an independent adaptive-quadrature + Brent computation
// of the same integrals (scipy.integrate.quad, scipy.optimize.brentq).
namespace frozen {
constexpr double pc_sin = 1.27323954473516;           // 4/pi
constexpr double hbar_sin_p2 = 2.0637954228622;
constexpr double hbar_sin_p15 = 1.24463764062841;
constexpr double pc_sin_q2865 = 1.29629204830869;
constexpr double pc_sin_q50 = 1.06717699982196;
constexpr double pc_sin_q15 = 1.20602767804961;
constexpr double hbar_sin_q3_p2 = 2.72966725025462;
constexpr double pc_nonconvex_sin = 1.49214394724845;
constexpr double hbar_nonconvex_sin_p2 = 4.53828387748804;
}  // namespace frozen

TEST_CASE("eikonal oracle") {
  const Potential V = potential_by_name("sin");
  CHECK(eikonal_plateau_edge(V) == doctest::Approx(4.0 / std::numbers::pi).epsilon(1e-10));
  CHECK(eikonal_plateau_edge(V) == doctest::Approx(frozen::pc_sin).epsilon(1e-10));
  CHECK(exact_hbar_eikonal_1d(V, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact_hbar_eikonal_1d(V, -1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact_hbar_eikonal_1d(V, 2.0) == doctest::Approx(frozen::hbar_sin_p2).epsilon(1e-9));
  CHECK(exact_hbar_eikonal_1d(V, -1.5) == doctest::Approx(frozen::hbar_sin_p15).epsilon(1e-9));
  // Far outside the plateau H tends to p^2/2 + mean V.
  CHECK(exact_hbar_eikonal_1d(V, 50.0) == doctest::Approx(1250.0).epsilon(1e-4));
}

TEST_CASE("q-power oracle") {
  const Potential V = potential_by_name("sin");
  CHECK(qpower_plateau_edge(V, 2.865) == doctest::Approx(frozen::pc_sin_q2865).epsilon(1e-9));
  CHECK(qpower_plateau_edge(V, 50.0) == doctest::Approx(frozen::pc_sin_q50).epsilon(1e-9));
  CHECK(qpower_plateau_edge(V, 1.5) == doctest::Approx(frozen::pc_sin_q15).epsilon(1e-9));
  CHECK(qpower_plateau_edge(V, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact_hbar_qpower_1d(V, 2.0, 3.0) == doctest::Approx(frozen::hbar_sin_q3_p2).epsilon(1e-9));
  CHECK(exact_hbar_qpower_1d(V, 2.0, 2.0) == doctest::Approx(exact_hbar_eikonal_1d(V, 2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(exact_hbar_qpower_1d(V, 1.0, 0.5), ConfigError);
}

TEST_CASE("nonconvex oracle") {
  const Potential V = potential_by_name("sin");
  CHECK(nonconvex_plateau_edge(V) == doctest::Approx(frozen::pc_nonconvex_sin).epsilon(1e-9));
  CHECK(exact_hbar_nonconvex_1d(V, 2.0) == doctest::Approx(frozen::hbar_nonconvex_sin_p2).epsilon(1e-9));
  CHECK(exact_hbar_nonconvex_1d(V, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("separable 2D oracle") {
  const Potential V = potential_by_name("cos");
  CHECK(separable_hbar_2d(V, {0.0, 0.0}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(separable_hbar_2d(V, {2.0, 0.0}) == doctest::Approx(1.0 + frozen::hbar_sin_p2).epsilon(1e-9));
  CHECK(separable_hbar_2d(V, {2.0, 2.0}) == doctest::Approx(2.0 * frozen::hbar_sin_p2).epsilon(1e-9));
}

TEST_CASE("potential minimum and built-ins") {
  CHECK(potential_minimum(potential_by_name("sin")) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(potential_minimum(potential_by_name("two_sin")) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(potential_by_name("cos_triple")(0.0, 0.0) == doctest::Approx(3.0));
  CHECK(potential_by_name("const:2.5")(0.3) == doctest::Approx(2.5));
  CHECK(potential_by_name("coupling_1")(0.25) == doctest::Approx(2.0));
  CHECK_THROWS_AS(potential_by_name("nope"), ConfigError);
  CHECK(builtin_potential_names().size() >= 13);

  OracleConfig bad;
  bad.quadrature_nodes = 2;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

#pragma once

#include <array>

#include "hjcell/potential.hpp"

namespace hjcell {

struct OracleConfig {
  int quadrature_nodes = 100000;  // graded midpoint rule over one period
  double bisection_tol = 1e-12;
  // Initial upper bracket offset above -min V; doubled until it brackets.
  double upper_seed_offset = 100.0;
  int max_doublings = 60;

  void validate() const;
};

/// Minimum over [0, 1) by sampling at the quadrature nodes followed by a
/// golden-section refinement around the best sample.
double potential_minimum(const Potential& V, const OracleConfig& cfg = {});

/// 1D convex cell problem (1/2)|u' + p|^2 - V = lambda:
/// -min V on the plateau |p| <= p_c, otherwise the lambda with
/// |p| = int_0^1 sqrt(2 (V + lambda)).
double exact_hbar_eikonal_1d(const Potential& V, double p, const OracleConfig& cfg = {});

/// Same for (1/q)|u' + p|^q - V = lambda; the integrand becomes
/// (q (V + lambda))^(1/q).
double exact_hbar_qpower_1d(const Potential& V, double p, double q, const OracleConfig& cfg = {});

/// (1/2)(|u' + p|^2 - 1)^2 - V = lambda; the integrand becomes
/// sqrt(1 + sqrt(2 (V + lambda))).
double exact_hbar_nonconvex_1d(const Potential& V, double p, const OracleConfig& cfg = {});

/// Plateau half-widths p_c for the three 1D families above.
double eikonal_plateau_edge(const Potential& V, const OracleConfig& cfg = {});
double qpower_plateau_edge(const Potential& V, double q, const OracleConfig& cfg = {});
double nonconvex_plateau_edge(const Potential& V, const OracleConfig& cfg = {});

/// H(p1) + H(p2) for the 2D potential V1d(x1) + V1d(x2).
double separable_hbar_2d(const Potential& V1d, std::array<double, 2> p, const OracleConfig& cfg = {});

}  // namespace hjcell

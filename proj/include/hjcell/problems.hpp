#pragma once

#include <array>
#include <memory>
#include <vector>

#include "hjcell/grid.hpp"
#include "hjcell/potential.hpp"
#include "hjcell/problem.hpp"

namespace hjcell {

// ---------------------------------------------------------------------------
// Cell problems: X = (U, Lambda), N^dim equations in N^dim + 1 unknowns.
// ---------------------------------------------------------------------------

/// (1/q)|Du + p|^q - V(x) = lambda with the Engquist-Osher gradient.
/// At Du + p = 0 the zero subgradient is used, which matters for q < 2.
std::unique_ptr<Problem> make_eikonal(const Grid& grid, const Potential& V, std::array<double, 2> p,
                                      double q_power = 2.0);

enum class NonconvexScheme { LaxFriedrichs, EngquistOsher };

/// (1/2)(|u' + p|^2 - 1)^2 - V(x) = lambda on a 1D torus. The Lax-Friedrichs
/// discretization needs theta > 0; the Engquist-Osher variant plugs the
/// upwind gradient norm into H and ignores theta.
std::unique_ptr<Problem> make_nonconvex(const Grid& grid, const Potential& V, double p,
                                        NonconvexScheme scheme, double theta);

/// 1 + P (P^2 + 1), a bound on |H_g| used as default Lax-Friedrichs
/// viscosity when sweeping |p| <= p_max.
double default_lf_viscosity(double p_max);

/// -alpha |u'' + s| (u'' + s) + p^2/2 - V(x) = lambda on a 1D torus.
std::unique_ptr<Problem> make_second_order(const Grid& grid, const Potential& V, double p, double s,
                                           double alpha);

/// Two eikonal equations coupled through c1 (u1 - u2) and c2 (u2 - u1),
/// sharing one ergodic constant. X = (U1, U2, Lambda). c1, c2 >= 0 on the grid.
std::unique_ptr<Problem> make_weakly_coupled(const Grid& grid, const Potential& V1,
                                             const Potential& V2, const Potential& c1,
                                             const Potential& c2, std::array<double, 2> p);

// ---------------------------------------------------------------------------
// Dislocation dynamics
// ---------------------------------------------------------------------------

enum class DislocationRegime { Local, Convolution, FullKernel };

/// Odd approximation of the integer part: equal to k + 1/2 on (k, k + 1)
/// away from the integers, linear with slope 1/width on |a - k| <= width/2.
double smoothed_integer_part(double a, double width);
double smoothed_integer_part_slope(double a, double width);

/// Precomputed periodized kernel samples at t = x_j + m, m < density_den,
/// j < N, stored as kernel[m * N + j] and moment[m * N + j] = t * kernel.
struct DislocationKernelTables {
  DislocationRegime regime = DislocationRegime::Local;
  int density_den = 1;
  int truncation = 100;
  int nodes = 0;
  double cap = 1.0 / 16.0;  // min{cap, 1/z^2} integrates to one
  std::vector<double> kernel;
  std::vector<double> moment;
};

DislocationKernelTables make_kernel_tables(const Grid& grid, int density_den, int truncation,
                                           DislocationRegime regime);

struct DislocationParams {
  double stress = 0.0;  // L
  int density_num = 0;  // P, density p = P / density_den
  int density_den = 10;
  DislocationRegime regime = DislocationRegime::Local;
  int truncation = 100;        // N0
  double e_ramp_width = 0.0;   // <= 0 selects 5h
};

/// (c0(x) + L + M_p[u]) |Du + p| = lambda on a 1D torus. The upwind
/// direction at each node follows the sign of the velocity c0 + L + M_p[u]
/// at the evaluation point.
std::unique_ptr<Problem> make_dislocation(const Grid& grid, const Potential& c0,
                                          const DislocationParams& params);
std::unique_ptr<Problem> make_dislocation(const Grid& grid, const Potential& c0,
                                          const DislocationParams& params,
                                          std::shared_ptr<const DislocationKernelTables> tables);

// ---------------------------------------------------------------------------
// Stationary mean field games
// ---------------------------------------------------------------------------

enum class MfgCoupling { Quadratic, NegLog };

/// -nu Lap u + |Du|^2 + f + lambda = V(m), nu Lap m + 2 div(m Du) = 0,
/// h^dim sum U = 0, h^dim sum M = 1. X = (U, M, Lambda): 2 N^dim + 2
/// equations in 2 N^dim + 1 unknowns. V(m) = m^2 or -log(max(m, m_floor)).
std::unique_ptr<Problem> make_mfg(const Grid& grid, double nu, const Potential& f,
                                  MfgCoupling coupling, double m_floor = 1e-10);

/// P populations with linear coupling V_i(m) = sum_j theta[i][j] m_j and no
/// running cost. X = (U_1..U_P, M_1..M_P, Lambda_1..Lambda_P); the initial
/// guess field holds 2P components ordered the same way.
std::unique_ptr<Problem> make_multipop_mfg(const Grid& grid, double nu,
                                           std::vector<std::vector<double>> theta,
                                           const MeshField& initial_guess);

/// Constant guess u_i = 0, m_i = 1.
MeshField constant_population_guess(const Grid& grid, int populations);

/// Piecewise-constant guess on `pieces` equal slabs along x1. Population i
/// occupies the slabs s with s % populations == i: constant density of mass
/// one there, zero elsewhere, and corrector -1/2 there, +1/2 elsewhere,
/// shifted to zero mean.
MeshField piecewise_population_guess(const Grid& grid, int populations, int pieces);

}  // namespace hjcell

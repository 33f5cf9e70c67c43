#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hjcell/sparse.hpp"

namespace hjcell {

enum class Boundary { Periodic, Neumann };

/// Which one-sided difference is upwind. Forward is the usual Engquist-Osher
/// choice (min of the forward difference, max of the backward one); Reversed
/// swaps min and max and is used where the transport speed is negative.
enum class Orientation { Forward, Reversed };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& name);

/// Uniform grid on [0,1]^dim with spacing h = 1/N per axis.
///
/// Nodes are numbered with the first axis fastest: node(i, j) = i + N*j.
class Grid {
 public:
  Grid(int dim, int nodes_per_dim, Boundary boundary);

  int dim() const { return dim_; }
  int nodes_per_dim() const { return n_; }
  double spacing() const { return h_; }
  Boundary boundary() const { return boundary_; }
  std::size_t size() const { return size_; }

  /// Resolves a per-axis index in [-N, 2N) to [0, N). Periodic grids wrap;
  /// Neumann grids mirror about the boundary half-cell so that the ghost
  /// node next to the boundary takes the boundary node's value.
  int wrap_index(int i) const;

  Index node(int i, int j = 0) const;
  std::array<int, 2> axis_indices(Index node) const;
  double coordinate(int i) const { return i * h_; }
  std::array<double, 2> coordinates(Index node) const;

  /// Node reached from `node` by moving `offset` cells along `axis`.
  Index neighbor(Index node, int axis, int offset) const;

  /// Cell measure h^dim used for discrete integrals.
  double cell_volume() const;

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && boundary_ == o.boundary_;
  }

 private:
  int dim_;
  int n_;
  double h_;
  Boundary boundary_;
  std::size_t size_;
};

/// Mesh function with one or more components stored component-major:
/// component c lives in values[c*size, (c+1)*size).
struct MeshField {
  MeshField(Grid g, int n_components);
  MeshField(Grid g, int n_components, std::vector<double> data);

  std::span<double> component(int c);
  std::span<const double> component(int c) const;

  Grid grid;
  int components;
  std::vector<double> values;
};

/// A scalar stencil quantity together with its partial derivatives with
/// respect to the mesh values it reads. nodes[0] is always the centre node;
/// the remaining slots are (minus, plus) pairs per axis. Boundary closures
/// may make several slots refer to the same node.
struct StencilValue {
  double value = 0.0;
  int count = 0;
  std::array<Index, 5> nodes{};
  std::array<double, 5> partials{};
};

/// One-sided differences at a node along one axis, slope offset included,
/// and the upwind-selected parts that enter the gradient norm.
struct AxisUpwind {
  double forward = 0.0;   // (U_{i+1} - U_i)/h + p
  double backward = 0.0;  // (U_i - U_{i-1})/h + p
  double forward_part = 0.0;
  double backward_part = 0.0;
  Index minus_node = 0;
  Index plus_node = 0;
};

std::array<AxisUpwind, 2> upwind_terms(const Grid& grid, std::span<const double> u, Index node,
                                       std::array<double, 2> p, Orientation orientation);

/// Engquist-Osher upwind gradient norm at a node. `value` is the norm; the
/// partials are those of norm^2/2, with zero where a one-sided term sits
/// exactly at zero.
StencilValue eo_gradient(const Grid& grid, std::span<const double> u, Index node,
                         std::array<double, 2> p, Orientation orientation = Orientation::Forward);

/// 1D convenience form: returns (norm, d(norm^2/2)/d(U_{i-1}, U_i, U_{i+1})).
struct Gradient1d {
  double norm;
  std::array<double, 3> partials;
};
Gradient1d eo_gradient_1d(const Grid& grid, std::span<const double> u, int i, double p,
                          Orientation orientation = Orientation::Forward);

/// 2D convenience form; partials ordered (centre, x-, x+, y-, y+).
struct Gradient2d {
  double norm;
  std::array<double, 5> partials;
};
Gradient2d eo_gradient_2d(const Grid& grid, std::span<const double> u, int i, int j,
                          std::array<double, 2> p, Orientation orientation = Orientation::Forward);

/// H(x, g) with its derivative in g.
struct HamiltonianValue {
  double value;
  double slope;
};
using Hamiltonian1d = std::function<HamiltonianValue(double x, double g)>;

/// Global Lax-Friedrichs numerical Hamiltonian on a 1D grid:
/// H(x_i, central difference + p) - theta*(U_{i+1} - 2U_i + U_{i-1})/(2h).
StencilValue lf_hamiltonian_1d(const Grid& grid, const Hamiltonian1d& H, std::span<const double> u,
                               int i, double p, double theta);

/// Second difference, summed over axes.
StencilValue laplacian(const Grid& grid, std::span<const double> u, Index node);

/// Discrete Fokker-Planck operator nu*L*m - B^T m, where B is the Jacobian of
/// U -> drift_scale * (EO gradient norm^2 / 2). Rows are conservative: their
/// h^dim-weighted sum vanishes for every (m, U).
///
/// Values are written to `out`. When `jac` is given, partials are added at
/// rows row0 + node, columns m_col0 + node (density) and u_col0 + node
/// (potential).
void adjoint_divergence(const Grid& grid, std::span<const double> m, std::span<const double> u,
                        double nu, double drift_scale, std::span<double> out,
                        SparseMatrix* jac = nullptr, Index row0 = 0, Index m_col0 = 0,
                        Index u_col0 = 0);

struct FokkerPlanckBlock {
  std::vector<double> values;
  SparseMatrix d_m;
  SparseMatrix d_u;
};
FokkerPlanckBlock adjoint_divergence(const Grid& grid, const MeshField& m, const MeshField& u,
                                     double nu, double drift_scale);

}  // namespace hjcell

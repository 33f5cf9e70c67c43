#include "hjcell/grid.hpp"

#include <cmath>

#include "hjcell/errors.hpp"

namespace hjcell {

std::string to_string(Boundary b) { return b == Boundary::Periodic ? "periodic" : "neumann"; }

Boundary boundary_from_string(const std::string& name) {
  if (name == "periodic") return Boundary::Periodic;
  if (name == "neumann") return Boundary::Neumann;
  throw ConfigError("unknown boundary '" + name + "' (expected periodic or neumann)");
}

Grid::Grid(int dim, int nodes_per_dim, Boundary boundary)
    : dim_(dim), n_(nodes_per_dim), h_(0.0), boundary_(boundary), size_(0) {
  detail::require_config(dim == 1 || dim == 2, "grid dimension must be 1 or 2");
  detail::require_config(nodes_per_dim >= 2, "grid needs at least 2 nodes per axis");
  h_ = 1.0 / static_cast<double>(n_);
  detail::require(std::abs(h_ * n_ - 1.0) < 1e-15, "grid spacing does not tile [0,1]");
  size_ = static_cast<std::size_t>(n_) * (dim_ == 2 ? static_cast<std::size_t>(n_) : 1u);
}

int Grid::wrap_index(int i) const {
  detail::require(i >= -n_ && i < 2 * n_, "wrap_index: index " + std::to_string(i) +
                                              " outside [-N, 2N) for N=" + std::to_string(n_));
  if (boundary_ == Boundary::Periodic) return ((i % n_) + n_) % n_;
  if (i < 0) return -i - 1;
  if (i >= n_) return 2 * n_ - 1 - i;
  return i;
}

Index Grid::node(int i, int j) const {
  const int a = wrap_index(i);
  const int b = dim_ == 2 ? wrap_index(j) : 0;
  return static_cast<Index>(a) + static_cast<Index>(n_) * b;
}

std::array<int, 2> Grid::axis_indices(Index node) const {
  detail::require(node >= 0 && static_cast<std::size_t>(node) < size_, "node index out of range");
  return {static_cast<int>(node % n_), static_cast<int>(node / n_)};
}

std::array<double, 2> Grid::coordinates(Index node) const {
  const auto ij = axis_indices(node);
  return {coordinate(ij[0]), dim_ == 2 ? coordinate(ij[1]) : 0.0};
}

Index Grid::neighbor(Index node, int axis, int offset) const {
  auto ij = axis_indices(node);
  ij[axis] += offset;
  return this->node(ij[0], ij[1]);
}

double Grid::cell_volume() const { return dim_ == 2 ? h_ * h_ : h_; }

MeshField::MeshField(Grid g, int n_components)
    : grid(g), components(n_components), values(g.size() * static_cast<std::size_t>(n_components), 0.0) {
  detail::require_config(n_components >= 1, "MeshField needs at least one component");
}

MeshField::MeshField(Grid g, int n_components, std::vector<double> data)
    : grid(g), components(n_components), values(std::move(data)) {
  detail::require_config(n_components >= 1, "MeshField needs at least one component");
  detail::require(values.size() == grid.size() * static_cast<std::size_t>(components),
                  "MeshField: value count does not match components * nodes");
}

std::span<double> MeshField::component(int c) {
  detail::require(c >= 0 && c < components, "MeshField: component out of range");
  return std::span<double>(values).subspan(static_cast<std::size_t>(c) * grid.size(), grid.size());
}

std::span<const double> MeshField::component(int c) const {
  detail::require(c >= 0 && c < components, "MeshField: component out of range");
  return std::span<const double>(values).subspan(static_cast<std::size_t>(c) * grid.size(),
                                                 grid.size());
}

std::array<AxisUpwind, 2> upwind_terms(const Grid& grid, std::span<const double> u, Index node,
                                       std::array<double, 2> p, Orientation orientation) {
  const double h = grid.spacing();
  std::array<AxisUpwind, 2> out{};
  for (int axis = 0; axis < grid.dim(); ++axis) {
    AxisUpwind& t = out[axis];
    t.minus_node = grid.neighbor(node, axis, -1);
    t.plus_node = grid.neighbor(node, axis, +1);
    t.forward = (u[t.plus_node] - u[node]) / h + p[axis];
    t.backward = (u[node] - u[t.minus_node]) / h + p[axis];
    if (orientation == Orientation::Forward) {
      t.forward_part = std::min(t.forward, 0.0);
      t.backward_part = std::max(t.backward, 0.0);
    } else {
      t.forward_part = std::max(t.forward, 0.0);
      t.backward_part = std::min(t.backward, 0.0);
    }
  }
  return out;
}

StencilValue eo_gradient(const Grid& grid, std::span<const double> u, Index node,
                         std::array<double, 2> p, Orientation orientation) {
  const double h = grid.spacing();
  const auto terms = upwind_terms(grid, u, node, p, orientation);
  StencilValue s;
  s.count = 1 + 2 * grid.dim();
  s.nodes[0] = node;
  double sq = 0.0;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const AxisUpwind& t = terms[axis];
    sq += t.forward_part * t.forward_part + t.backward_part * t.backward_part;
    // d/dU of (fwd^2 + bwd^2)/2 over the three axis nodes.
    s.nodes[1 + 2 * axis] = t.minus_node;
    s.nodes[2 + 2 * axis] = t.plus_node;
    s.partials[1 + 2 * axis] += -t.backward_part / h;
    s.partials[2 + 2 * axis] += t.forward_part / h;
    s.partials[0] += (t.backward_part - t.forward_part) / h;
  }
  s.value = std::sqrt(sq);
  return s;
}

Gradient1d eo_gradient_1d(const Grid& grid, std::span<const double> u, int i, double p,
                          Orientation orientation) {
  detail::require(grid.dim() == 1, "eo_gradient_1d needs a 1D grid");
  const StencilValue s = eo_gradient(grid, u, grid.node(i), {p, 0.0}, orientation);
  return {s.value, {s.partials[1], s.partials[0], s.partials[2]}};
}

Gradient2d eo_gradient_2d(const Grid& grid, std::span<const double> u, int i, int j,
                          std::array<double, 2> p, Orientation orientation) {
  detail::require(grid.dim() == 2, "eo_gradient_2d needs a 2D grid");
  const StencilValue s = eo_gradient(grid, u, grid.node(i, j), p, orientation);
  return {s.value, {s.partials[0], s.partials[1], s.partials[2], s.partials[3], s.partials[4]}};
}

StencilValue lf_hamiltonian_1d(const Grid& grid, const Hamiltonian1d& H, std::span<const double> u,
                               int i, double p, double theta) {
  detail::require(grid.dim() == 1, "lf_hamiltonian_1d needs a 1D grid");
  detail::require_config(theta > 0.0, "Lax-Friedrichs viscosity theta must be positive");
  const double h = grid.spacing();
  const Index c = grid.node(i);
  const Index m = grid.neighbor(c, 0, -1);
  const Index pl = grid.neighbor(c, 0, +1);
  const double central = (u[pl] - u[m]) / (2.0 * h) + p;
  const HamiltonianValue hv = H(grid.coordinate(grid.wrap_index(i)), central);

  StencilValue s;
  s.count = 3;
  s.nodes = {c, m, pl, 0, 0};
  s.value = hv.value - theta * (u[pl] - 2.0 * u[c] + u[m]) / (2.0 * h);
  s.partials[0] = theta / h;
  s.partials[1] = -hv.slope / (2.0 * h) - theta / (2.0 * h);
  s.partials[2] = hv.slope / (2.0 * h) - theta / (2.0 * h);
  return s;
}

StencilValue laplacian(const Grid& grid, std::span<const double> u, Index node) {
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  StencilValue s;
  s.count = 1 + 2 * grid.dim();
  s.nodes[0] = node;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const Index m = grid.neighbor(node, axis, -1);
    const Index p = grid.neighbor(node, axis, +1);
    s.nodes[1 + 2 * axis] = m;
    s.nodes[2 + 2 * axis] = p;
    s.partials[1 + 2 * axis] = inv_h2;
    s.partials[2 + 2 * axis] = inv_h2;
    s.partials[0] -= 2.0 * inv_h2;
    s.value += (u[p] - 2.0 * u[node] + u[m]) * inv_h2;
  }
  return s;
}

namespace {

void fokker_planck_impl(const Grid& grid, std::span<const double> m, std::span<const double> u,
                        double nu, double drift_scale, std::span<double> out, SparseMatrix* jm,
                        Index m_col0, SparseMatrix* ju, Index u_col0, Index row0) {
  const std::size_t n = grid.size();
  detail::require(m.size() == n && u.size() == n && out.size() == n,
                  "adjoint_divergence: density, potential and output must live on the same grid");
  const double h = grid.spacing();

  for (std::size_t j = 0; j < n; ++j) out[j] = 0.0;

  for (std::size_t k = 0; k < n; ++k) {
    const Index node = static_cast<Index>(k);

    const StencilValue lap = laplacian(grid, m, node);
    out[k] += nu * lap.value;
    if (jm)
      for (int s = 0; s < lap.count; ++s) jm->add(row0 + node, m_col0 + lap.nodes[s], nu * lap.partials[s]);

    // Transposed drift: node k's Hamiltonian term spreads m_k * dB_k/dU to
    // the nodes of its active one-sided differences.
    const auto terms = upwind_terms(grid, u, node, {0.0, 0.0}, Orientation::Forward);
    for (int axis = 0; axis < grid.dim(); ++axis) {
      const AxisUpwind& t = terms[axis];
      struct Diff {
        double v;
        Index from, to;
      };
      const Diff diffs[2] = {{t.forward_part, node, t.plus_node}, {t.backward_part, t.minus_node, node}};
      for (const Diff& d : diffs) {
        if (d.v == 0.0) continue;
        const Index idx[2] = {d.from, d.to};
        const double w[2] = {-1.0 / h, 1.0 / h};
        for (int a = 0; a < 2; ++a) {
          out[idx[a]] -= drift_scale * m[k] * d.v * w[a];
          if (jm) jm->add(row0 + idx[a], m_col0 + node, -drift_scale * d.v * w[a]);
          if (ju)
            for (int b = 0; b < 2; ++b)
              ju->add(row0 + idx[a], u_col0 + idx[b], -drift_scale * m[k] * w[a] * w[b]);
        }
      }
    }
  }
}

}  // namespace

void adjoint_divergence(const Grid& grid, std::span<const double> m, std::span<const double> u,
                        double nu, double drift_scale, std::span<double> out, SparseMatrix* jac,
                        Index row0, Index m_col0, Index u_col0) {
  fokker_planck_impl(grid, m, u, nu, drift_scale, out, jac, m_col0, jac, u_col0, row0);
}

FokkerPlanckBlock adjoint_divergence(const Grid& grid, const MeshField& m, const MeshField& u,
                                     double nu, double drift_scale) {
  detail::require(m.grid == grid && u.grid == grid && m.components == 1 && u.components == 1,
                  "adjoint_divergence: grid mismatch between density and potential");
  FokkerPlanckBlock block{std::vector<double>(grid.size()), SparseMatrix(grid.size(), grid.size()),
                          SparseMatrix(grid.size(), grid.size())};
  fokker_planck_impl(grid, m.values, u.values, nu, drift_scale, block.values, &block.d_m, 0,
                     &block.d_u, 0, 0);
  block.d_m.compress();
  block.d_u.compress();
  return block;
}

}  // namespace hjcell

#include "hjcell/problems.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "hjcell/errors.hpp"

namespace hjcell {
namespace {

std::string format_p(std::array<double, 2> p, int dim) {
  std::ostringstream os;
  os << "(" << p[0];
  if (dim == 2) os << "," << p[1];
  os << ")";
  return os.str();
}

// Shared plumbing for problems whose state starts with `blocks` mesh fields.
class MeshProblem : public Problem {
 public:
  MeshProblem(Grid grid, std::vector<std::string> fields) : grid_(grid), fields_(std::move(fields)) {}

  const Grid* grid() const override { return &grid_; }
  std::vector<std::string> field_names() const override { return fields_; }

 protected:
  std::size_t n() const { return grid_.size(); }
  std::span<const double> block(std::span<const double> x, std::size_t b) const {
    return x.subspan(b * n(), n());
  }
  void begin(std::span<const double> x, Evaluation& out, bool with_jacobian) const {
    detail::require(x.size() == n_unknowns(), descriptor() + ": state has length " +
                                                  std::to_string(x.size()) + ", expected " +
                                                  std::to_string(n_unknowns()));
    out.residual.assign(n_equations(), 0.0);
    out.guard_activations = 0;
    if (with_jacobian) out.jacobian = SparseMatrix(n_equations(), n_unknowns());
  }
  std::vector<double> ones_on_blocks(std::size_t count) const {
    std::vector<double> e(n_unknowns(), 0.0);
    std::fill(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(count * n()), 1.0);
    return e;
  }

  Grid grid_;
  std::vector<std::string> fields_;
};

// Cell problem with one corrector block and a single ergodic constant last.
class CellProblem : public MeshProblem {
 public:
  using MeshProblem::MeshProblem;
  std::size_t n_unknowns() const override { return n() + 1; }
  std::size_t n_equations() const override { return n(); }
  std::vector<std::size_t> lambda_slots() const override { return {n()}; }
  std::vector<double> initial_guess() const override { return std::vector<double>(n() + 1, 0.0); }
  std::vector<double> constant_shift_direction() const override { return ones_on_blocks(1); }
};

std::vector<double> sample(const Grid& grid, const Potential& V) {
  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto x = grid.coordinates(static_cast<Index>(k));
    out[k] = V(x[0], x[1]);
  }
  return out;
}

// ---------------------------------------------------------------------------

class EikonalProblem final : public CellProblem {
 public:
  EikonalProblem(const Grid& grid, const Potential& V, std::array<double, 2> p, double q)
      : CellProblem(grid, {"u"}), V_(V), v_(sample(grid, V)), p_(p), q_(q) {
    detail::require_config(q >= 1.0, "q-power Hamiltonian needs q >= 1");
    detail::require_config(grid.boundary() == Boundary::Periodic, "cell problems need a periodic grid");
    if (grid.dim() == 1) p_[1] = 0.0;
  }

  std::string descriptor() const override {
    std::ostringstream os;
    os << "eikonal dim=" << grid_.dim() << " N=" << grid_.nodes_per_dim() << " V=" << V_.name
       << " p=" << format_p(p_, grid_.dim()) << " q=" << q_;
    return os.str();
  }

  void evaluate(std::span<const double> x, Evaluation& out, bool with_jacobian) const override {
    begin(x, out, with_jacobian);
    const auto u = block(x, 0);
    const double lambda = x[n()];
    const bool quadratic = q_ == 2.0;
    for (std::size_t k = 0; k < n(); ++k) {
      const Index node = static_cast<Index>(k);
      const StencilValue g = eo_gradient(grid_, u, node, p_);
      const double h_val = quadratic ? 0.5 * g.value * g.value : std::pow(g.value, q_) / q_;
      out.residual[k] = h_val - v_[k] - lambda;
      if (!with_jacobian) continue;
      // d/dU (g^q/q) = g^(q-2) * d(g^2/2)/dU, zero subgradient at g = 0.
      const double factor = quadratic ? 1.0 : (g.value > 0.0 ? std::pow(g.value, q_ - 2.0) : 0.0);
      for (int s = 0; s < g.count; ++s) out.jacobian.add(node, g.nodes[s], factor * g.partials[s]);
      out.jacobian.add(node, static_cast<Index>(n()), -1.0);
    }
    if (with_jacobian) out.jacobian.compress();
  }

 private:
  Potential V_;
  std::vector<double> v_;
  std::array<double, 2> p_;
  double q_;
};

// ---------------------------------------------------------------------------

class NonconvexProblem final : public CellProblem {
 public:
  NonconvexProblem(const Grid& grid, const Potential& V, double p, NonconvexScheme scheme, double theta)
      : CellProblem(grid, {"u"}), V_(V), v_(sample(grid, V)), p_(p), scheme_(scheme), theta_(theta) {
    detail::require_config(grid.dim() == 1, "nonconvex problem is one-dimensional");
    detail::require_config(grid.boundary() == Boundary::Periodic, "cell problems need a periodic grid");
    if (scheme == NonconvexScheme::LaxFriedrichs)
      detail::require_config(theta > 0.0, "Lax-Friedrichs viscosity theta must be positive");
  }

  std::string descriptor() const override {
    std::ostringstream os;
    os << "nonconvex N=" << grid_.nodes_per_dim() << " V=" << V_.name << " p=" << p_
       << (scheme_ == NonconvexScheme::LaxFriedrichs ? " scheme=lf theta=" : " scheme=eo");
    if (scheme_ == NonconvexScheme::LaxFriedrichs) os << theta_;
    return os.str();
  }

  void evaluate(std::span<const double> x, Evaluation& out, bool with_jacobian) const override {
    begin(x, out, with_jacobian);
    const auto u = block(x, 0);
    const double lambda = x[n()];
    const Hamiltonian1d H = [](double, double g) {
      const double w = g * g - 1.0;
      return HamiltonianValue{0.5 * w * w, 2.0 * g * w};
    };
    for (std::size_t k = 0; k < n(); ++k) {
      const Index node = static_cast<Index>(k);
      StencilValue s;
      if (scheme_ == NonconvexScheme::LaxFriedrichs) {
        s = lf_hamiltonian_1d(grid_, H, u, static_cast<int>(k), p_, theta_);
      } else {
        s = eo_gradient(grid_, u, node, {p_, 0.0});
        const double w = s.value * s.value - 1.0;
        s.value = 0.5 * w * w;
        for (int t = 0; t < s.count; ++t) s.partials[t] *= 2.0 * w;
      }
      out.residual[k] = s.value - v_[k] - lambda;
      if (!with_jacobian) continue;
      for (int t = 0; t < s.count; ++t) out.jacobian.add(node, s.nodes[t], s.partials[t]);
      out.jacobian.add(node, static_cast<Index>(n()), -1.0);
    }
    if (with_jacobian) out.jacobian.compress();
  }

 private:
  Potential V_;
  std::vector<double> v_;
  double p_;
  NonconvexScheme scheme_;
  double theta_;
};

// ---------------------------------------------------------------------------

class SecondOrderProblem final : public CellProblem {
 public:
  SecondOrderProblem(const Grid& grid, const Potential& V, double p, double s, double alpha)
      : CellProblem(grid, {"u"}), V_(V), v_(sample(grid, V)), p_(p), s_(s), alpha_(alpha) {
    detail::require_config(alpha > 0.0, "second order problem needs alpha > 0");
    detail::require_config(grid.dim() == 1, "second order problem is one-dimensional");
    detail::require_config(grid.boundary() == Boundary::Periodic, "cell problems need a periodic grid");
  }

  std::string descriptor() const override {
    std::ostringstream os;
    os << "second_order N=" << grid_.nodes_per_dim() << " V=" << V_.name << " p=" << p_
       << " s=" << s_ << " alpha=" << alpha_;
    return os.str();
  }

  void evaluate(std::span<const double> x, Evaluation& out, bool with_jacobian) const override {
    begin(x, out, with_jacobian);
    const auto u = block(x, 0);
    const double lambda = x[n()];
    for (std::size_t k = 0; k < n(); ++k) {
      const Index node = static_cast<Index>(k);
      const StencilValue lap = laplacian(grid_, u, node);
      const double w = lap.value + s_;
      out.residual[k] = -alpha_ * std::abs(w) * w + 0.5 * p_ * p_ - v_[k] - lambda;
      if (!with_jacobian) continue;
      const double dw = -2.0 * alpha_ * std::abs(w);
      for (int t = 0; t < lap.count; ++t) out.jacobian.add(node, lap.nodes[t], dw * lap.partials[t]);
      out.jacobian.add(node, static_cast<Index>(n()), -1.0);
    }
    if (with_jacobian) out.jacobian.compress();
  }

 private:
  Potential V_;
  std::vector<double> v_;
  double p_, s_, alpha_;
};

// ---------------------------------------------------------------------------

class WeaklyCoupledProblem final : public MeshProblem {
 public:
  WeaklyCoupledProblem(const Grid& grid, const Potential& V1, const Potential& V2,
                       const Potential& c1, const Potential& c2, std::array<double, 2> p)
      : MeshProblem(grid, {"u_1", "u_2"}),
        names_{V1.name, V2.name, c1.name, c2.name},
        v_{sample(grid, V1), sample(grid, V2)},
        c_{sample(grid, c1), sample(grid, c2)},
        p_(p) {
    detail::require_config(grid.boundary() == Boundary::Periodic, "cell problems need a periodic grid");
    if (grid.dim() == 1) p_[1] = 0.0;
    for (const auto& c : c_)
      for (double v : c)
        detail::require_config(v >= 0.0, "weakly coupled system needs nonnegative coupling coefficients");
  }

  std::size_t n_unknowns() const override { return 2 * n() + 1; }
  std::size_t n_equations() const override { return 2 * n(); }
  std::vector<std::size_t> lambda_slots() const override { return {2 * n()}; }
  std::vector<double> initial_guess() const override { return std::vector<double>(2 * n() + 1, 0.0); }
  std::vector<double> constant_shift_direction() const override { return ones_on_blocks(2); }

  std::string descriptor() const override {
    std::ostringstream os;
    os << "weakly_coupled dim=" << grid_.dim() << " N=" << grid_.nodes_per_dim() << " V1=" << names_[0]
       << " V2=" << names_[1] << " c1=" << names_[2] << " c2=" << names_[3]
       << " p=" << format_p(p_, grid_.dim());
    return os.str();
  }

  void evaluate(std::span<const double> x, Evaluation& out, bool with_jacobian) const override {
    begin(x, out, with_jacobian);
    const double lambda = x[2 * n()];
    for (std::size_t eq = 0; eq < 2; ++eq) {
      const std::size_t other = 1 - eq;
      const auto u = block(x, eq);
      const auto w = block(x, other);
      const Index row0 = static_cast<Index>(eq * n());
      const Index col0 = static_cast<Index>(eq * n());
      const Index other0 = static_cast<Index>(other * n());
      for (std::size_t k = 0; k < n(); ++k) {
        const Index node = static_cast<Index>(k);
        const StencilValue g = eo_gradient(grid_, u, node, p_);
        out.residual[row0 + node] =
            0.5 * g.value * g.value - v_[eq][k] + c_[eq][k] * (u[k] - w[k]) - lambda;
        if (!with_jacobian) continue;
        for (int s = 0; s < g.count; ++s) out.jacobian.add(row0 + node, col0 + g.nodes[s], g.partials[s]);
        out.jacobian.add(row0 + node, col0 + node, c_[eq][k]);
        out.jacobian.add(row0 + node, other0 + node, -c_[eq][k]);
        out.jacobian.add(row0 + node, static_cast<Index>(2 * n()), -1.0);
      }
    }
    if (with_jacobian) out.jacobian.compress();
  }

 private:
  std::array<std::string, 4> names_;
  std::array<std::vector<double>, 2> v_;
  std::array<std::vector<double>, 2> c_;
  std::array<double, 2> p_;
};

// ---------------------------------------------------------------------------

class DislocationProblem final : public CellProblem {
 public:
  DislocationProblem(const Grid& grid, const Potential& c0, const DislocationParams& params,
                     std::shared_ptr<const DislocationKernelTables> tables)
      : CellProblem(grid, {"u"}),
        c0_name_(c0.name),
        c0_(sample(grid, c0)),
        params_(params),
        tables_(std::move(tables)) {
    detail::require_config(grid.dim() == 1, "dislocation problem is one-dimensional");
    detail::require_config(grid.boundary() == Boundary::Periodic, "cell problems need a periodic grid");
    detail::require_config(params.density_den > 0, "dislocation density denominator must be positive");
    detail::require_config(params.truncation > 0, "kernel truncation N0 must be positive");
    if (params_.e_ramp_width <= 0.0) params_.e_ramp_width = 5.0 * grid.spacing();
    detail::require_config(params_.e_ramp_width <= 1.0, "integer-part ramp width must not exceed 1");
    p_ = static_cast<double>(params.density_num) / params.density_den;
    if (params.regime != DislocationRegime::Local) {
      detail::require(tables_ && tables_->nodes == grid.nodes_per_dim() &&
                          tables_->density_den == params.density_den && tables_->regime == params.regime,
                      "dislocation kernel tables do not match the problem");
    }
  }

  std::string descriptor() const override {
    static const char* names[] = {"local", "convolution", "full"};
    std::ostringstream os;
    os << "dislocation N=" << grid_.nodes_per_dim() << " c0=" << c0_name_ << " p=" << params_.density_num
       << "/" << params_.density_den << " L=" << params_.stress
       << " regime=" << names[static_cast<int>(params_.regime)];
    return os.str();
  }

  void evaluate(std::span<const double> x, Evaluation& out, bool with_jacobian) const override {
    begin(x, out, with_jacobian);
    const auto u = block(x, 0);
    const double lambda = x[n()];
    const std::size_t N = n();
    const bool nonlocal = params_.regime != DislocationRegime::Local;
    std::vector<double> dm(nonlocal && with_jacobian ? N : 0);

    for (std::size_t i = 0; i < N; ++i) {
      const Index node = static_cast<Index>(i);
      double interaction = 0.0;
      if (nonlocal) {
        std::fill(dm.begin(), dm.end(), 0.0);
        interaction = nonlocal_term(u, i, with_jacobian ? &dm : nullptr);
      }
      const double velocity = c0_[i] + params_.stress + interaction;
      const Orientation o = velocity >= 0.0 ? Orientation::Forward : Orientation::Reversed;
      const StencilValue g = eo_gradient(grid_, u, node, {p_, 0.0}, o);
      out.residual[i] = velocity * g.value - lambda;
      if (!with_jacobian) continue;
      // d|Du+p| = d(g^2/2) / g, zero subgradient at g = 0.
      if (g.value > 0.0)
        for (int s = 0; s < g.count; ++s)
          out.jacobian.add(node, g.nodes[s], velocity * g.partials[s] / g.value);
      if (nonlocal && g.value != 0.0)
        for (std::size_t k = 0; k < N; ++k)
          if (dm[k] != 0.0) out.jacobian.add(node, static_cast<Index>(k), g.value * dm[k]);
      out.jacobian.add(node, static_cast<Index>(N), -1.0);
    }
    if (with_jacobian) out.jacobian.compress();
  }

 private:
  // h sum_m sum_j (J_mj E(u_{i+j} - u_i + p t_mj) - p zeta_mj); the
  // derivative w.r.t. u is accumulated into `grad` when given.
  double nonlocal_term(std::span<const double> u, std::size_t i, std::vector<double>* grad) const {
    const std::size_t N = n();
    const double h = grid_.spacing();
    const auto& t = *tables_;
    const bool linear = params_.regime == DislocationRegime::Convolution;
    double acc = 0.0;
    for (int m = 0; m < t.density_den; ++m) {
      for (std::size_t j = 0; j < N; ++j) {
        const std::size_t idx = static_cast<std::size_t>(m) * N + j;
        const double kern = t.kernel[idx];
        if (kern == 0.0) continue;
        const std::size_t target = (i + j) % N;
        const double tpos = grid_.coordinate(static_cast<int>(j)) + m;
        const double arg = u[target] - u[i] + p_ * tpos;
        const double e = linear ? arg : smoothed_integer_part(arg, params_.e_ramp_width);
        acc += kern * e - p_ * t.moment[idx];
        if (grad) {
          const double slope = linear ? 1.0 : smoothed_integer_part_slope(arg, params_.e_ramp_width);
          if (slope != 0.0 && target != i) {
            (*grad)[target] += h * kern * slope;
            (*grad)[i] -= h * kern * slope;
          }
        }
      }
    }
    return h * acc;
  }

  std::string c0_name_;
  std::vector<double> c0_;
  DislocationParams params_;
  std::shared_ptr<const DislocationKernelTables> tables_;
  double p_ = 0.0;
};

// ---------------------------------------------------------------------------

class MfgProblem final : public MeshProblem {
 public:
  MfgProblem(const Grid& grid, double nu, const Potential& f, MfgCoupling coupling, double m_floor)
      : MeshProblem(grid, {"u", "m"}), f_name_(f.name), f_(sample(grid, f)), nu_(nu),
        coupling_(coupling), m_floor_(m_floor) {
    detail::require_config(nu > 0.0, "MFG needs nu > 0");
    detail::require_config(m_floor > 0.0, "MFG density floor must be positive");
  }

  std::size_t n_unknowns() const override { return 2 * n() + 1; }
  std::size_t n_equations() const override { return 2 * n() + 2; }
  std::vector<std::size_t> lambda_slots() const override { return {2 * n()}; }

  std::vector<double> initial_guess() const override {
    std::vector<double> x(2 * n() + 1, 0.0);
    std::fill(x.begin() + static_cast<std::ptrdiff_t>(n()), x.begin() + static_cast<std::ptrdiff_t>(2 * n()), 1.0);
    return x;
  }

  std::string descriptor() const override {
    std::ostringstream os;
    os << "mfg dim=" << grid_.dim() << " N=" << grid_.nodes_per_dim() << " nu=" << nu_ << " f=" << f_name_
       << " V=" << (coupling_ == MfgCoupling::Quadratic ? "m^2" : "-log(m)");
    return os.str();
  }

  void evaluate(std::span<const double> x, Evaluation& out, bool with_jacobian) const override {
    begin(x, out, with_jacobian);
    const auto u = block(x, 0);
    const auto m = block(x, 1);
    const double lambda = x[2 * n()];
    const Index N = static_cast<Index>(n());
    SparseMatrix* jac = with_jacobian ? &out.jacobian : nullptr;

    for (Index k = 0; k < N; ++k) {
      const StencilValue lap = laplacian(grid_, u, k);
      const StencilValue g = eo_gradient(grid_, u, k, {0.0, 0.0});
      double coupling = 0.0, slope = 0.0;
      if (coupling_ == MfgCoupling::Quadratic) {
        coupling = m[k] * m[k];
        slope = 2.0 * m[k];
      } else if (m[k] > m_floor_) {
        coupling = -std::log(m[k]);
        slope = -1.0 / m[k];
      } else {
        coupling = -std::log(m_floor_);
        ++out.guard_activations;
      }
      out.residual[k] = -nu_ * lap.value + g.value * g.value + f_[k] + lambda - coupling;
      if (!jac) continue;
      for (int s = 0; s < lap.count; ++s) jac->add(k, lap.nodes[s], -nu_ * lap.partials[s]);
      for (int s = 0; s < g.count; ++s) jac->add(k, g.nodes[s], 2.0 * g.partials[s]);
      jac->add(k, N + k, -slope);
      jac->add(k, 2 * N, 1.0);
    }

    adjoint_divergence(grid_, m, u, nu_, 2.0,
                       std::span<double>(out.residual).subspan(n(), n()), jac, N, N, 0);

    const double vol = grid_.cell_volume();
    double su = 0.0, sm = 0.0;
    for (Index k = 0; k < N; ++k) {
      su += u[k];
      sm += m[k];
      if (jac) {
        jac->add(2 * N, k, vol);
        jac->add(2 * N + 1, N + k, vol);
      }
    }
    out.residual[2 * n()] = vol * su;
    out.residual[2 * n() + 1] = vol * sm - 1.0;
    if (jac) jac->compress();
  }

 private:
  std::string f_name_;
  std::vector<double> f_;
  double nu_;
  MfgCoupling coupling_;
  double m_floor_;
};

// ---------------------------------------------------------------------------

class MultiPopulationMfg final : public MeshProblem {
 public:
  MultiPopulationMfg(const Grid& grid, double nu, std::vector<std::vector<double>> theta,
                     const MeshField& guess)
      : MeshProblem(grid, field_names_for(static_cast<int>(theta.size()))),
        nu_(nu),
        theta_(std::move(theta)),
        guess_(guess.values) {
    const std::size_t P = theta_.size();
    detail::require_config(P >= 1, "multi-population MFG needs at least one population");
    for (const auto& row : theta_)
      detail::require_config(row.size() == P, "coupling matrix must be square");
    detail::require_config(nu > 0.0, "MFG needs nu > 0");
    detail::require(guess.grid == grid && guess.components == static_cast<int>(2 * P),
                    "initial guess must hold 2P fields on the problem grid");
  }

  std::size_t pops() const { return theta_.size(); }
  std::size_t n_unknowns() const override { return pops() * (2 * n() + 1); }
  std::size_t n_equations() const override { return pops() * (2 * n() + 2); }
  std::vector<std::size_t> lambda_slots() const override {
    std::vector<std::size_t> s(pops());
    for (std::size_t i = 0; i < pops(); ++i) s[i] = 2 * pops() * n() + i;
    return s;
  }

  std::vector<double> initial_guess() const override {
    std::vector<double> x = guess_;
    x.resize(n_unknowns(), 0.0);
    return x;
  }

  std::string descriptor() const override {
    std::ostringstream os;
    os << "multipop_mfg dim=" << grid_.dim() << " N=" << grid_.nodes_per_dim()
       << " boundary=" << to_string(grid_.boundary()) << " nu=" << nu_ << " P=" << pops() << " theta=[";
    for (std::size_t i = 0; i < pops(); ++i) {
      os << (i ? ";" : "");
      for (std::size_t j = 0; j < pops(); ++j) os << (j ? "," : "") << theta_[i][j];
    }
    os << "]";
    return os.str();
  }

  void evaluate(std::span<const double> x, Evaluation& out, bool with_jacobian) const override {
    begin(x, out, with_jacobian);
    const std::size_t P = pops();
    const Index N = static_cast<Index>(n());
    const Index Pn = static_cast<Index>(P) * N;
    SparseMatrix* jac = with_jacobian ? &out.jacobian : nullptr;
    const double vol = grid_.cell_volume();

    for (std::size_t i = 0; i < P; ++i) {
      const auto u = block(x, i);
      const auto m = block(x, P + i);
      const double lambda = x[2 * Pn + static_cast<Index>(i)];
      const Index hjb0 = static_cast<Index>(i) * N;
      const Index fp0 = Pn + static_cast<Index>(i) * N;
      const Index u0 = static_cast<Index>(i) * N;
      const Index m0 = Pn + static_cast<Index>(i) * N;

      for (Index k = 0; k < N; ++k) {
        const StencilValue lap = laplacian(grid_, u, k);
        const StencilValue g = eo_gradient(grid_, u, k, {0.0, 0.0});
        double coupling = 0.0;
        for (std::size_t j = 0; j < P; ++j) coupling += theta_[i][j] * x[(P + j) * n() + k];
        out.residual[hjb0 + k] = -nu_ * lap.value + g.value * g.value + lambda - coupling;
        if (!jac) continue;
        for (int s = 0; s < lap.count; ++s) jac->add(hjb0 + k, u0 + lap.nodes[s], -nu_ * lap.partials[s]);
        for (int s = 0; s < g.count; ++s) jac->add(hjb0 + k, u0 + g.nodes[s], 2.0 * g.partials[s]);
        for (std::size_t j = 0; j < P; ++j)
          if (theta_[i][j] != 0.0)
            jac->add(hjb0 + k, Pn + static_cast<Index>(j) * N + k, -theta_[i][j]);
        jac->add(hjb0 + k, 2 * Pn + static_cast<Index>(i), 1.0);
      }

      adjoint_divergence(grid_, m, u, nu_, 2.0,
                         std::span<double>(out.residual).subspan(static_cast<std::size_t>(fp0), n()),
                         jac, fp0, m0, u0);

      const Index norm_u = 2 * Pn + static_cast<Index>(i);
      const Index norm_m = 2 * Pn + static_cast<Index>(P + i);
      double su = 0.0, sm = 0.0;
      for (Index k = 0; k < N; ++k) {
        su += u[k];
        sm += m[k];
        if (jac) {
          jac->add(norm_u, u0 + k, vol);
          jac->add(norm_m, m0 + k, vol);
        }
      }
      out.residual[norm_u] = vol * su;
      out.residual[norm_m] = vol * sm - 1.0;
    }
    if (jac) jac->compress();
  }

 private:
  static std::vector<std::string> field_names_for(int P) {
    std::vector<std::string> names;
    for (int i = 1; i <= P; ++i) names.push_back("u_" + std::to_string(i));
    for (int i = 1; i <= P; ++i) names.push_back("m_" + std::to_string(i));
    return names;
  }

  double nu_;
  std::vector<std::vector<double>> theta_;
  std::vector<double> guess_;
};

}  // namespace

// ---------------------------------------------------------------------------

std::unique_ptr<Problem> make_eikonal(const Grid& grid, const Potential& V, std::array<double, 2> p,
                                      double q_power) {
  return std::make_unique<EikonalProblem>(grid, V, p, q_power);
}

std::unique_ptr<Problem> make_nonconvex(const Grid& grid, const Potential& V, double p,
                                        NonconvexScheme scheme, double theta) {
  return std::make_unique<NonconvexProblem>(grid, V, p, scheme, theta);
}

double default_lf_viscosity(double p_max) {
  const double a = std::abs(p_max);
  return 1.0 + a * (a * a + 1.0);
}

std::unique_ptr<Problem> make_second_order(const Grid& grid, const Potential& V, double p, double s,
                                           double alpha) {
  return std::make_unique<SecondOrderProblem>(grid, V, p, s, alpha);
}

std::unique_ptr<Problem> make_weakly_coupled(const Grid& grid, const Potential& V1,
                                             const Potential& V2, const Potential& c1,
                                             const Potential& c2, std::array<double, 2> p) {
  return std::make_unique<WeaklyCoupledProblem>(grid, V1, V2, c1, c2, p);
}

double smoothed_integer_part(double a, double width) {
  const double k = std::round(a);
  const double d = a - k;
  if (std::abs(d) <= 0.5 * width) return k + d / width;
  return std::floor(a) + 0.5;
}

double smoothed_integer_part_slope(double a, double width) {
  const double d = a - std::round(a);
  return std::abs(d) <= 0.5 * width ? 1.0 / width : 0.0;
}

DislocationKernelTables make_kernel_tables(const Grid& grid, int density_den, int truncation,
                                           DislocationRegime regime) {
  detail::require_config(density_den > 0, "dislocation density denominator must be positive");
  detail::require_config(truncation > 0, "kernel truncation N0 must be positive");
  DislocationKernelTables t;
  t.regime = regime;
  t.density_den = density_den;
  t.truncation = truncation;
  t.nodes = grid.nodes_per_dim();
  const std::size_t N = static_cast<std::size_t>(t.nodes);
  const std::size_t count = static_cast<std::size_t>(density_den) * N;
  t.kernel.assign(count, 0.0);
  t.moment.assign(count, 0.0);
  if (regime == DislocationRegime::Local) return t;

  for (int m = 0; m < density_den; ++m) {
    for (std::size_t j = 0; j < N; ++j) {
      const double tpos = grid.coordinate(static_cast<int>(j)) + m;
      double value = 0.0;
      if (regime == DislocationRegime::Convolution) {
        value = 1.0 / density_den;
      } else {
        for (int k = -truncation; k <= truncation; ++k) {
          const double z = tpos + static_cast<double>(k) * density_den;
          value += z * z * t.cap >= 1.0 ? 1.0 / (z * z) : t.cap;
        }
      }
      t.kernel[static_cast<std::size_t>(m) * N + j] = value;
      t.moment[static_cast<std::size_t>(m) * N + j] = tpos * value;
    }
  }
  return t;
}

std::unique_ptr<Problem> make_dislocation(const Grid& grid, const Potential& c0,
                                          const DislocationParams& params) {
  std::shared_ptr<const DislocationKernelTables> tables;
  if (params.regime != DislocationRegime::Local)
    tables = std::make_shared<const DislocationKernelTables>(
        make_kernel_tables(grid, params.density_den, params.truncation, params.regime));
  return make_dislocation(grid, c0, params, std::move(tables));
}

std::unique_ptr<Problem> make_dislocation(const Grid& grid, const Potential& c0,
                                          const DislocationParams& params,
                                          std::shared_ptr<const DislocationKernelTables> tables) {
  return std::make_unique<DislocationProblem>(grid, c0, params, std::move(tables));
}

std::unique_ptr<Problem> make_mfg(const Grid& grid, double nu, const Potential& f,
                                  MfgCoupling coupling, double m_floor) {
  return std::make_unique<MfgProblem>(grid, nu, f, coupling, m_floor);
}

std::unique_ptr<Problem> make_multipop_mfg(const Grid& grid, double nu,
                                           std::vector<std::vector<double>> theta,
                                           const MeshField& initial_guess) {
  return std::make_unique<MultiPopulationMfg>(grid, nu, std::move(theta), initial_guess);
}

MeshField constant_population_guess(const Grid& grid, int populations) {
  detail::require_config(populations >= 1, "need at least one population");
  MeshField f(grid, 2 * populations);
  for (int i = 0; i < populations; ++i) {
    auto m = f.component(populations + i);
    std::fill(m.begin(), m.end(), 1.0);
  }
  return f;
}

MeshField piecewise_population_guess(const Grid& grid, int populations, int pieces) {
  detail::require_config(populations >= 1, "need at least one population");
  detail::require_config(pieces >= populations, "need at least one slab per population");
  MeshField f(grid, 2 * populations);
  const double vol = grid.cell_volume();
  for (int i = 0; i < populations; ++i) {
    auto u = f.component(i);
    auto m = f.component(populations + i);
    double occupied = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double x1 = grid.coordinates(static_cast<Index>(k))[0];
      const int slab = std::min(pieces - 1, static_cast<int>(x1 * pieces));
      const bool mine = slab % populations == i;
      u[k] = mine ? -0.5 : 0.5;
      m[k] = mine ? 1.0 : 0.0;
      occupied += mine ? vol : 0.0;
    }
    detail::require_config(occupied > 0.0, "piecewise guess leaves a population without support");
    const double mean_u = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      u[k] -= mean_u;
      m[k] /= occupied;
    }
  }
  return f;
}

}  // namespace hjcell

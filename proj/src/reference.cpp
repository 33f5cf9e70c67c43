#include "hjcell/reference.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "hjcell/errors.hpp"

namespace hjcell {
namespace {

// Integrand g(V(s) + lambda) of the formula |p| = int_0^1 g(V + lambda) ds.
using Profile = std::function<double(double)>;

struct Minimum {
  double x;
  double v;
};

// Grid search followed by golden section on [x* - h, x* + h]; the potential
// is periodic so the bracket may cross 0 or 1.
Minimum locate_minimum(const Potential& V, const OracleConfig& cfg) {
  cfg.validate();
  const int n = cfg.quadrature_nodes;
  const double h = 1.0 / n;
  int best = 0;
  double vbest = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const double v = V(k * h);
    if (v < vbest) {
      vbest = v;
      best = k;
    }
  }
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = (best - 1) * h, b = (best + 1) * h;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = V(c), fd = V(d);
  while (b - a > 1e-12) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = V(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = V(d);
    }
  }
  Minimum m{best * h, vbest};
  for (double x : {c, d, 0.5 * (a + b)}) {
    const double v = V(x);
    if (v < m.v) m = {x, v};
  }
  return m;
}

// Quadrature over one period starting at the minimizer x*. At lambda = -min V
// the integrand behaves like |x - x*|^(2/q), which limits a uniform rule to
// O(h^(1 + 2/q)); the grading y = t^4 / (t^4 + (1 - t)^4) clusters nodes at
// both ends of the period and restores fast convergence.
struct Sampled {
  std::vector<double> v;
  std::vector<double> w;
  double vmin;
};

Sampled sample(const Potential& V, const OracleConfig& cfg) {
  const Minimum m = locate_minimum(V, cfg);
  const int n = cfg.quadrature_nodes;
  Sampled s;
  s.v.resize(static_cast<std::size_t>(n));
  s.w.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double t = (k + 0.5) / n, u = 1.0 - t;
    const double t4 = t * t * t * t, u4 = u * u * u * u, den = t4 + u4;
    s.v[k] = V(m.x + t4 / den);
    s.w[k] = 4.0 * t * t * t * u * u * u / (den * den) / n;
  }
  s.vmin = m.v;
  return s;
}

double integrate(const Sampled& s, double lambda, const Profile& g) {
  double acc = 0.0;
  for (std::size_t k = 0; k < s.v.size(); ++k) acc += s.w[k] * g(std::max(s.v[k] + lambda, 0.0));
  return acc;
}

double plateau_edge(const Potential& V, const OracleConfig& cfg, const Profile& g) {
  const Sampled s = sample(V, cfg);
  return integrate(s, -s.vmin, g);
}

double solve_hbar(const Potential& V, double p, const OracleConfig& cfg, const Profile& g) {
  const Sampled s = sample(V, cfg);
  const double target = std::abs(p);
  double lo = -s.vmin;
  if (integrate(s, lo, g) >= target) return lo;
  double width = cfg.upper_seed_offset;
  double hi = lo + width;
  int doublings = 0;
  while (integrate(s, hi, g) < target) {
    if (++doublings > cfg.max_doublings)
      throw OracleError("could not bracket the effective Hamiltonian for V=" + V.name +
                        " at |p|=" + std::to_string(target));
    width *= 2.0;
    hi = lo + width;
  }
  while (hi - lo > cfg.bisection_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (integrate(s, mid, g) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

const Profile eikonal_profile = [](double w) { return std::sqrt(2.0 * w); };
const Profile nonconvex_profile = [](double w) { return std::sqrt(1.0 + std::sqrt(2.0 * w)); };

Profile qpower_profile(double q) {
  detail::require_config(q >= 1.0, "q-power Hamiltonian needs q >= 1");
  return [q](double w) { return std::pow(q * w, 1.0 / q); };
}

}  // namespace

void OracleConfig::validate() const {
  detail::require_config(quadrature_nodes >= 1000, "oracle needs at least 1000 quadrature nodes");
  detail::require_config(bisection_tol > 0.0, "oracle bisection tolerance must be positive");
  detail::require_config(upper_seed_offset > 0.0, "oracle bracket seed must be positive");
  detail::require_config(max_doublings >= 0, "oracle doubling limit must be nonnegative");
}

double potential_minimum(const Potential& V, const OracleConfig& cfg) { return locate_minimum(V, cfg).v; }

double exact_hbar_eikonal_1d(const Potential& V, double p, const OracleConfig& cfg) {
  return solve_hbar(V, p, cfg, eikonal_profile);
}

double exact_hbar_qpower_1d(const Potential& V, double p, double q, const OracleConfig& cfg) {
  return solve_hbar(V, p, cfg, qpower_profile(q));
}

double exact_hbar_nonconvex_1d(const Potential& V, double p, const OracleConfig& cfg) {
  return solve_hbar(V, p, cfg, nonconvex_profile);
}

double eikonal_plateau_edge(const Potential& V, const OracleConfig& cfg) {
  return plateau_edge(V, cfg, eikonal_profile);
}

double qpower_plateau_edge(const Potential& V, double q, const OracleConfig& cfg) {
  return plateau_edge(V, cfg, qpower_profile(q));
}

double nonconvex_plateau_edge(const Potential& V, const OracleConfig& cfg) {
  return plateau_edge(V, cfg, nonconvex_profile);
}

double separable_hbar_2d(const Potential& V1d, std::array<double, 2> p, const OracleConfig& cfg) {
  return exact_hbar_eikonal_1d(V1d, p[0], cfg) + exact_hbar_eikonal_1d(V1d, p[1], cfg);
}

}  // namespace hjcell

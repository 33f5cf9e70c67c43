#include "hjcell/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hjcell/errors.hpp"
#include "hjcell/potential.hpp"

namespace hjcell {
namespace {

Potential checked_potential(const std::string& name, int dim) {
  Potential V = potential_by_name(name);
  detail::require_config(V.dim <= dim, "potential '" + name + "' is two-dimensional but the grid is 1D");
  return V;
}

int dislocation_numerator(const ProblemSpec& spec, double p) {
  return static_cast<int>(std::lround(p * spec.density_den));
}

double sweep_p_range(const RunConfig& cfg) {
  double r = std::max(std::abs(cfg.problem.p[0]), std::abs(cfg.problem.p[1]));
  for (const auto& a : cfg.sweep)
    if (a.name == "p1" || a.name == "p2") r = std::max({r, std::abs(a.start), std::abs(a.end)});
  return r;
}

void write_row(std::ostream& os, const HbarRow& row) {
  for (double c : row.coordinates) os << c << ',';
  for (double l : row.lambda) os << l << ',';
  os << row.iterations << ',' << row.residual_sq << ',' << (row.converged ? 1 : 0) << ','
     << row.seconds << '\n';
}

}  // namespace

// ---------------------------------------------------------------------------

ProblemFactory::ProblemFactory(ProblemSpec spec, double p_range) : spec_(std::move(spec)) {
  if (spec_.family == Family::Nonconvex)
    theta_ = spec_.theta > 0.0 ? spec_.theta
                               : default_lf_viscosity(std::max({p_range, std::abs(spec_.p[0])}));
  if (spec_.family == Family::Dislocation && spec_.regime != DislocationRegime::Local) {
    const Grid grid(1, spec_.nodes, Boundary::Periodic);
    tables_ = std::make_shared<const DislocationKernelTables>(
        make_kernel_tables(grid, spec_.density_den, spec_.truncation, spec_.regime));
  }
}

SweepPoint ProblemFactory::base_point() const { return {spec_.p, spec_.stress, spec_.s}; }

std::unique_ptr<Problem> ProblemFactory::make(const SweepPoint& point) const {
  return make_with_q(point, spec_.q);
}

std::unique_ptr<Problem> ProblemFactory::make_with_q(const SweepPoint& pt, double q) const {
  const ProblemSpec& s = spec_;
  switch (s.family) {
    case Family::Eikonal: {
      const Grid grid(s.dim, s.nodes, Boundary::Periodic);
      return make_eikonal(grid, checked_potential(s.potential, s.dim), pt.p, q);
    }
    case Family::Nonconvex: {
      const Grid grid(1, s.nodes, Boundary::Periodic);
      return make_nonconvex(grid, checked_potential(s.potential, 1), pt.p[0], s.scheme, theta_);
    }
    case Family::SecondOrder: {
      const Grid grid(1, s.nodes, Boundary::Periodic);
      return make_second_order(grid, checked_potential(s.potential, 1), pt.p[0], pt.s, s.alpha);
    }
    case Family::WeaklyCoupled: {
      const Grid grid(s.dim, s.nodes, Boundary::Periodic);
      return make_weakly_coupled(grid, checked_potential(s.V1, s.dim), checked_potential(s.V2, s.dim),
                                 checked_potential(s.c1, s.dim), checked_potential(s.c2, s.dim), pt.p);
    }
    case Family::Dislocation: {
      const Grid grid(1, s.nodes, Boundary::Periodic);
      DislocationParams params;
      params.stress = pt.stress;
      params.density_num = dislocation_numerator(s, pt.p[0]);
      params.density_den = s.density_den;
      params.regime = s.regime;
      params.truncation = s.truncation;
      params.e_ramp_width = s.e_ramp_width;
      return make_dislocation(grid, checked_potential(s.c0, 1), params, tables_);
    }
    case Family::Mfg: {
      const Grid grid(s.dim, s.nodes, Boundary::Periodic);
      return make_mfg(grid, s.nu, checked_potential(s.potential, s.dim), s.coupling, s.m_floor);
    }
    case Family::MultiPopMfg: {
      const Grid grid(s.dim, s.nodes, s.boundary);
      const int P = static_cast<int>(s.coupling_matrix.size());
      const MeshField guess = s.guess == "piecewise" ? piecewise_population_guess(grid, P, s.guess_pieces)
                                                     : constant_population_guess(grid, P);
      return make_multipop_mfg(grid, s.nu, s.coupling_matrix, guess);
    }
  }
  throw ConfigError("unsupported family");
}

// ---------------------------------------------------------------------------

bool HbarTable::all_converged() const {
  for (const auto& r : rows)
    if (!r.converged) return false;
  return true;
}

std::string HbarTable::header() const {
  std::ostringstream os;
  for (const auto& c : coordinate_names) os << c << ',';
  if (lambda_count == 1) {
    os << "lambda,";
  } else {
    for (std::size_t i = 1; i <= lambda_count; ++i) os << "lambda_" << i << ',';
  }
  os << "iterations,residual_sq,converged,seconds";
  return os.str();
}

void HbarTable::write_csv(std::ostream& os) const {
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << header() << '\n' << std::setprecision(17);
  for (const auto& r : rows) write_row(os, r);
  os.flags(flags);
  os.precision(precision);
}

void HbarTable::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(out);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<SweepPoint> sweep_points(const RunConfig& cfg) {
  const ProblemSpec& spec = cfg.problem;
  std::vector<SweepPoint> pts;
  pts.reserve(cfg.point_count());
  const std::size_t axes = cfg.sweep.size();
  std::vector<int> idx(axes, 0);
  for (std::size_t k = 0; k < cfg.point_count(); ++k) {
    SweepPoint pt{spec.p, spec.stress, spec.s};
    for (std::size_t a = 0; a < axes; ++a) {
      const double v = cfg.sweep[a].value(idx[a]);
      const std::string& name = cfg.sweep[a].name;
      if (name == "p1") pt.p[0] = v;
      else if (name == "p2") pt.p[1] = v;
      else if (name == "L") pt.stress = v;
      else if (name == "s") pt.s = v;
    }
    pts.push_back(pt);
    // last axis varies fastest
    for (std::size_t a = axes; a-- > 0;) {
      if (++idx[a] < cfg.sweep[a].count) break;
      idx[a] = 0;
    }
  }
  return pts;
}

std::vector<double> point_coordinates(const ProblemSpec& spec, const SweepPoint& pt) {
  std::vector<double> out;
  for (const auto& name : coordinate_names(spec)) {
    if (name == "p1") {
      out.push_back(spec.family == Family::Dislocation
                        ? static_cast<double>(dislocation_numerator(spec, pt.p[0])) / spec.density_den
                        : pt.p[0]);
    } else if (name == "p2") {
      out.push_back(pt.p[1]);
    } else if (name == "L") {
      out.push_back(pt.stress);
    } else if (name == "s") {
      out.push_back(pt.s);
    }
  }
  return out;
}

SweepResult run_sweep(const RunConfig& cfg) {
  cfg.newton.validate();
  const auto start = std::chrono::steady_clock::now();
  const ProblemFactory factory(cfg.problem, sweep_p_range(cfg));
  const auto points = sweep_points(cfg);
  const std::size_t n = points.size();

  SweepResult result;
  result.table.coordinate_names = coordinate_names(cfg.problem);
  // Construct one instance up front so configuration errors surface before
  // any worker starts.
  result.table.lambda_count = factory.make(points.front())->lambda_slots().size();
  result.table.rows.resize(n);
  const bool keep = cfg.record_corrector;
  if (keep) result.reports.resize(n);

  std::vector<char> dump(n, cfg.corrector_points.empty() ? 1 : 0);
  for (int k : cfg.corrector_points) {
    detail::require_config(k >= 0 && static_cast<std::size_t>(k) < n,
                           "corrector point index " + std::to_string(k) + " outside the sweep");
    dump[static_cast<std::size_t>(k)] = 1;
  }
  if (keep && !cfg.corrector_dir.empty()) std::filesystem::create_directories(cfg.corrector_dir);

  std::mutex log_mutex;
  auto solve_point = [&](std::size_t k, const std::vector<double>* warm) {
    const auto problem = factory.make(points[k]);
    SolveReport rep = warm && warm->size() == problem->n_unknowns()
                          ? newton_solve(*problem, *warm, cfg.newton)
                          : newton_solve(*problem, cfg.newton);
    HbarRow& row = result.table.rows[k];
    row.coordinates = point_coordinates(cfg.problem, points[k]);
    row.lambda = rep.lambda;
    row.iterations = rep.iterations;
    row.residual_sq = rep.final_residual_sq;
    row.converged = rep.converged;
    row.seconds = rep.wall_time_seconds;
    row.failure_reason = rep.failure_reason;
    if (keep && dump[k] && !cfg.corrector_dir.empty()) {
      if (rep.converged) {
        dump_corrector(*problem, rep,
                       (std::filesystem::path(cfg.corrector_dir) / ("point_" + std::to_string(k) + ".csv"))
                           .string());
      } else {
        std::lock_guard<std::mutex> lock(log_mutex);
        std::cerr << "hjcell: point " << k << " did not converge; corrector not written\n";
      }
    }
    if (keep) result.reports[k] = rep;
    return rep;
  };

  if (cfg.warm_start || cfg.workers <= 1 || n == 1) {
    // Warm starts chain the points in CSV order, so they run sequentially.
    std::vector<double> previous;
    for (std::size_t k = 0; k < n; ++k) {
      SolveReport rep = solve_point(k, cfg.warm_start && !previous.empty() ? &previous : nullptr);
      if (cfg.warm_start && rep.converged) previous = std::move(rep.final_state);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), n);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < count; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k; (k = next.fetch_add(1)) < n;) {
          try {
            solve_point(k, nullptr);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  SweepSummary& s = result.summary;
  s.points = n;
  for (const auto& r : result.table.rows) {
    s.converged += r.converged ? 1 : 0;
    s.mean_iterations += r.iterations;
    s.mean_seconds += r.seconds;
  }
  s.mean_iterations /= static_cast<double>(n);
  s.mean_seconds /= static_cast<double>(n);
  s.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!cfg.output_csv.empty()) result.table.write_csv(cfg.output_csv);
  return result;
}

void print_summary(std::ostream& os, const SweepSummary& s) {
  const auto flags = os.flags();
  os << "points " << s.points << ", converged " << s.converged << '\n'
     << std::fixed << std::setprecision(4) << "mean iterations " << s.mean_iterations << '\n'
     << "mean seconds per point " << s.mean_seconds << '\n'
     << "total seconds " << s.total_seconds << '\n';
  os.flags(flags);
}

// ---------------------------------------------------------------------------

PlateauResult plateau_edge_bisection(const ProblemFactory& factory, const NewtonConfig& newton,
                                     const PlateauSpec& spec, double q) {
  detail::require_config(spec.lo < spec.hi, "plateau bracket must satisfy lo < hi");
  detail::require_config(spec.tol > 0.0, "plateau tolerance must be positive");
  PlateauResult result;
  auto probe = [&](double p) {
    SweepPoint pt = factory.base_point();
    pt.p = {p, 0.0};
    const auto problem = factory.make_with_q(pt, q);
    PlateauProbe pr;
    pr.p = p;
    pr.report = newton_solve(*problem, newton);
    if (!pr.report.converged) {
      std::ostringstream os;
      os << "plateau probe at p=" << p << " did not converge (" << pr.report.failure_reason << ")";
      throw std::runtime_error(os.str());
    }
    pr.hbar = pr.report.lambda.front();
    pr.outside = pr.hbar - spec.target > spec.threshold;
    result.probes.push_back(pr);
    return pr.outside;
  };

  double lo = spec.lo, hi = spec.hi;
  const bool lo_out = probe(lo);
  const bool hi_out = probe(hi);
  if (lo_out == hi_out) {
    std::ostringstream os;
    os << std::setprecision(10) << "plateau bracket [" << lo << ", " << hi
       << "] has no sign change: H(lo) - target = " << result.probes[0].hbar - spec.target
       << ", H(hi) - target = " << result.probes[1].hbar - spec.target;
    throw ConfigError(os.str());
  }
  // Orient so that lo is inside.
  const bool flipped = lo_out;
  while (std::abs(hi - lo) > spec.tol) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid) != flipped) hi = mid;
    else lo = mid;
  }
  result.lo = std::min(lo, hi);
  result.hi = std::max(lo, hi);
  result.p_c = 0.5 * (lo + hi);
  return result;
}

void dump_corrector(const Problem& problem, const SolveReport& report, std::ostream& os) {
  detail::require(report.converged, "dump_corrector needs a converged report");
  const Grid* grid = problem.grid();
  detail::require(grid != nullptr, "dump_corrector needs a problem defined on a grid");
  const auto fields = problem.field_names();
  const std::size_t n = grid->size();
  detail::require(report.final_state.size() >= fields.size() * n,
                  "dump_corrector: state does not match the problem");
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << "x1";
  if (grid->dim() == 2) os << ",x2";
  for (const auto& f : fields) os << ',' << f;
  os << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < n; ++k) {
    const auto x = grid->coordinates(static_cast<Index>(k));
    os << x[0];
    if (grid->dim() == 2) os << ',' << x[1];
    for (std::size_t f = 0; f < fields.size(); ++f) os << ',' << report.final_state[f * n + k];
    os << '\n';
  }
  os.flags(flags);
  os.precision(precision);
}

void dump_corrector(const Problem& problem, const SolveReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  dump_corrector(problem, report, out);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace hjcell

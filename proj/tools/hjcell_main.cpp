// hjcell command line front end: sweep, solve, plateau, oracle.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hjcell/config.hpp"
#include "hjcell/errors.hpp"
#include "hjcell/reference.hpp"
#include "hjcell/runner.hpp"

using namespace hjcell;

namespace {

struct Options {
  std::string config;
  std::string out;
  int workers = 0;
  bool warm_start = false;
  double theta = 0.0;
  std::string corrector;
};

RunConfig load(const Options& o) {
  RunConfig cfg = load_run_config(o.config);
  if (!o.out.empty()) cfg.output_csv = o.out;
  if (o.workers > 0) cfg.workers = o.workers;
  if (o.warm_start) cfg.warm_start = true;
  if (o.theta > 0.0) cfg.problem.theta = o.theta;
  return cfg;
}

int report_failures(const HbarTable& table) {
  int failed = 0;
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& r = table.rows[k];
    if (r.converged) continue;
    ++failed;
    std::cerr << "row " << k << " (";
    for (std::size_t c = 0; c < r.coordinates.size(); ++c) std::cerr << (c ? "," : "") << r.coordinates[c];
    std::cerr << "): " << r.failure_reason << '\n';
  }
  return failed;
}

int cmd_sweep(const Options& o) {
  const RunConfig cfg = load(o);
  const SweepResult res = run_sweep(cfg);
  if (cfg.output_csv.empty()) res.table.write_csv(std::cout);
  print_summary(std::cerr, res.summary);
  return report_failures(res.table) == 0 ? 0 : 1;
}

int cmd_solve(const Options& o) {
  RunConfig cfg = load(o);
  const ProblemFactory factory(cfg.problem, std::max(std::abs(cfg.problem.p[0]), std::abs(cfg.problem.p[1])));
  const SweepPoint pt = factory.base_point();
  const auto problem = factory.make(pt);
  const SolveReport rep = newton_solve(*problem, cfg.newton);

  HbarTable table;
  table.coordinate_names = coordinate_names(cfg.problem);
  table.lambda_count = rep.lambda.size();
  table.rows.push_back({point_coordinates(cfg.problem, pt), rep.lambda, rep.iterations, rep.final_residual_sq,
                        rep.converged, rep.wall_time_seconds, rep.failure_reason});
  if (cfg.output_csv.empty()) table.write_csv(std::cout);
  else table.write_csv(cfg.output_csv);

  std::cerr << problem->descriptor() << '\n'
            << "iterations " << rep.iterations << ", residual^2 " << rep.final_residual_sq
            << ", regularizations " << rep.regularization_activations;
  if (rep.guard_activations) std::cerr << ", density guard hits " << rep.guard_activations;
  std::cerr << '\n';
  const std::string corrector = !o.corrector.empty() ? o.corrector : cfg.corrector_dir;
  if (!corrector.empty() && rep.converged) dump_corrector(*problem, rep, corrector);
  if (!rep.converged) std::cerr << "not converged: " << rep.failure_reason << '\n';
  return rep.converged ? 0 : 1;
}

int cmd_plateau(const Options& o) {
  const RunConfig cfg = load(o);
  if (!cfg.plateau) throw ConfigError("plateau needs a 'plateau' section in the config");
  const ProblemFactory factory(cfg.problem, cfg.plateau->hi);
  std::vector<double> qs = cfg.plateau->q_values;
  if (qs.empty()) qs.push_back(cfg.problem.q);

  std::ofstream file;
  if (!cfg.output_csv.empty()) {
    file.open(cfg.output_csv);
    if (!file) throw std::runtime_error("cannot open '" + cfg.output_csv + "' for writing");
  }
  std::ostream& os = cfg.output_csv.empty() ? std::cout : file;
  os << "q,p_c,probes\n" << std::setprecision(17);
  for (double q : qs) {
    const PlateauResult r = plateau_edge_bisection(factory, cfg.newton, *cfg.plateau, q);
    os << q << ',' << r.p_c << ',' << r.probes.size() << '\n';
  }
  return 0;
}

int cmd_oracle(const std::string& family, const std::string& potential, const std::vector<double>& ps,
               double q) {
  const Potential V = potential_by_name(potential);
  std::cout << std::setprecision(17);
  if (family == "eikonal") std::cout << "p_c," << qpower_plateau_edge(V, q) << '\n';
  else if (family == "nonconvex") std::cout << "p_c," << nonconvex_plateau_edge(V) << '\n';
  else throw ConfigError("oracle family must be eikonal or nonconvex");
  std::cout << "p,hbar\n";
  for (double p : ps) {
    const double h = family == "eikonal" ? exact_hbar_qpower_1d(V, p, q) : exact_hbar_nonconvex_1d(V, p);
    std::cout << p << ',' << h << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Effective Hamiltonians of ergodic Hamilton-Jacobi problems by generalized Newton"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config,-c", opt.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out,-o", opt.out, "output CSV (overrides output.csv)");
    sub->add_option("--workers,-j", opt.workers, "parallel solves")->check(CLI::PositiveNumber);
    sub->add_option("--theta", opt.theta, "Lax-Friedrichs viscosity for the nonconvex family");
  };

  auto* sweep = app.add_subcommand("sweep", "solve every point of the configured sweep");
  add_common(sweep);
  sweep->add_flag("--warm-start", opt.warm_start, "start each point from the previous solution");

  auto* solve = app.add_subcommand("solve", "solve the configured fixed point");
  add_common(solve);
  solve->add_option("--corrector", opt.corrector, "write the mesh fields of the solution to this CSV");

  auto* plateau = app.add_subcommand("plateau", "bisect for the plateau edge p_c");
  add_common(plateau);

  std::string family = "eikonal", potential = "sin";
  std::vector<double> ps;
  double q = 2.0;
  auto* oracle = app.add_subcommand("oracle", "print closed-form 1D reference values");
  oracle->add_option("--family", family, "eikonal or nonconvex")->check(CLI::IsMember({"eikonal", "nonconvex"}));
  oracle->add_option("--potential", potential, "potential name");
  oracle->add_option("--p", ps, "slopes to evaluate");
  oracle->add_option("--q", q, "power of the convex Hamiltonian");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sweep) return cmd_sweep(opt);
    if (*solve) return cmd_solve(opt);
    if (*plateau) return cmd_plateau(opt);
    if (*oracle) return cmd_oracle(family, potential, ps, q);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

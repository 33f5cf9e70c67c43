#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hjcell/config.hpp"
#include "hjcell/newton.hpp"

namespace hjcell {

/// Swept coordinates of one point; unused entries keep the ProblemSpec values.
struct SweepPoint {
  std::array<double, 2> p{0.0, 0.0};
  double stress = 0.0;
  double s = 0.0;
};

/// Builds problems for a spec, sharing expensive setup (kernel tables,
/// viscosity defaults) across points. Thread safe after construction.
class ProblemFactory {
 public:
  ProblemFactory(ProblemSpec spec, double p_range = 0.0);

  const ProblemSpec& spec() const { return spec_; }
  SweepPoint base_point() const;
  std::unique_ptr<Problem> make(const SweepPoint& point) const;
  std::unique_ptr<Problem> make_with_q(const SweepPoint& point, double q) const;

  /// Lax-Friedrichs viscosity in use (nonconvex family only).
  double theta() const { return theta_; }

 private:
  ProblemSpec spec_;
  double theta_ = 0.0;
  std::shared_ptr<const DislocationKernelTables> tables_;
};

struct HbarRow {
  std::vector<double> coordinates;
  std::vector<double> lambda;
  int iterations = 0;
  double residual_sq = 0.0;
  bool converged = false;
  double seconds = 0.0;
  std::string failure_reason;
};

struct HbarTable {
  std::vector<std::string> coordinate_names;
  std::size_t lambda_count = 1;
  std::vector<HbarRow> rows;

  bool all_converged() const;
  std::string header() const;
  void write_csv(std::ostream& os) const;
  void write_csv(const std::string& path) const;
};

struct SweepSummary {
  std::size_t points = 0;
  std::size_t converged = 0;
  double mean_iterations = 0.0;
  double mean_seconds = 0.0;
  double total_seconds = 0.0;  // wall clock of the whole sweep
};

struct SweepResult {
  HbarTable table;
  SweepSummary summary;
  std::vector<SolveReport> reports;  // kept only when correctors are recorded
};

/// Runs every sweep point (row-major over cfg.sweep) on cfg.workers threads.
/// Failed solves are recorded in their rows. Writes the CSV when
/// cfg.output_csv is set, and corrector files when cfg.record_corrector is.
SweepResult run_sweep(const RunConfig& cfg);

std::vector<SweepPoint> sweep_points(const RunConfig& cfg);
std::vector<double> point_coordinates(const ProblemSpec& spec, const SweepPoint& pt);

void print_summary(std::ostream& os, const SweepSummary& s);

struct PlateauProbe {
  double p = 0.0;
  double hbar = 0.0;
  bool outside = false;
  SolveReport report;
};

struct PlateauResult {
  double p_c = 0.0;
  double lo = 0.0, hi = 0.0;
  std::vector<PlateauProbe> probes;
};

/// Bisection on p in [lo, hi] for the edge of {H(p) <= target + threshold}.
/// lo must be inside and hi outside; otherwise ConfigError with both values.
/// Unconverged probes raise std::runtime_error.
PlateauResult plateau_edge_bisection(const ProblemFactory& factory, const NewtonConfig& newton,
                                     const PlateauSpec& spec, double q);

/// Writes x1[,x2] and every mesh field of the converged state, one row per node.
void dump_corrector(const Problem& problem, const SolveReport& report, std::ostream& os);
void dump_corrector(const Problem& problem, const SolveReport& report, const std::string& path);

}  // namespace hjcell

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hjcell/newton.hpp"
#include "hjcell/problems.hpp"

namespace hjcell {

inline constexpr int kSchemaVersion = 1;

enum class Family { Eikonal, Nonconvex, SecondOrder, WeaklyCoupled, Dislocation, Mfg, MultiPopMfg };

std::string to_string(Family f);
Family family_from_string(const std::string& name);

/// Everything needed to build a problem except the swept coordinates.
struct ProblemSpec {
  Family family = Family::Eikonal;
  int dim = 1;
  int nodes = 100;
  Boundary boundary = Boundary::Periodic;

  // fixed point; swept axes override these
  std::array<double, 2> p{0.0, 0.0};
  double stress = 0.0;  // L
  double s = 0.0;

  std::string potential = "sin";  // V, or f for the MFG family
  double q = 2.0;

  NonconvexScheme scheme = NonconvexScheme::LaxFriedrichs;
  double theta = 0.0;  // <= 0: derived from the p range of the sweep

  double alpha = 1.0;

  std::string V1 = "sin", V2 = "cos", c1 = "coupling_1", c2 = "coupling_2";

  std::string c0 = "two_sin";
  int density_den = 10;
  DislocationRegime regime = DislocationRegime::Local;
  int truncation = 100;
  double e_ramp_width = 0.0;

  double nu = 1.0;
  MfgCoupling coupling = MfgCoupling::Quadratic;
  double m_floor = 1e-10;

  std::vector<std::vector<double>> coupling_matrix;  // multi-population theta
  std::string guess = "constant";                    // constant | piecewise
  int guess_pieces = 4;
};

struct SweepAxis {
  std::string name;  // p1, p2, L, s
  double start = 0.0;
  double end = 0.0;
  int count = 1;

  double value(int k) const;
};

struct PlateauSpec {
  double target = 1.0;
  double lo = 1.0, hi = 1.5;
  double tol = 1e-6;
  // A probe counts as outside the plateau when H(p) - target > threshold.
  double threshold = 1e-6;
  std::vector<double> q_values;  // eikonal only; empty means the problem's q
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  ProblemSpec problem;
  std::vector<SweepAxis> sweep;  // outermost first
  NewtonConfig newton;
  std::string output_csv;
  std::string corrector_dir;
  std::vector<int> corrector_points;  // sweep indices to dump; empty = all
  int workers = 1;
  bool warm_start = false;
  bool record_corrector = false;
  std::optional<PlateauSpec> plateau;

  std::size_t point_count() const;
};

/// Parses the JSON config format; unknown keys and bad values raise ConfigError.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

/// Names of the coordinate columns the family writes, e.g. {"p1", "L"}.
std::vector<std::string> coordinate_names(const ProblemSpec& spec);

}  // namespace hjcell

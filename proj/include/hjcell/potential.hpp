#pragma once

#include <functional>
#include <string>
#include <vector>

namespace hjcell {

/// A 1-periodic closed-form function of one or two variables. One-variable
/// potentials ignore x2, so they can be sampled on either grid.
struct Potential {
  std::string name;
  int dim = 1;
  std::function<double(double, double)> fn;

  double operator()(double x1, double x2 = 0.0) const { return fn(x1, x2); }
};

/// Built-ins:
///   zero, sin, cos, two_sin            1D, sin = sin(2 pi x), two_sin = 2 sin(2 pi x)
///   cos_sum       cos(2 pi x1) + cos(2 pi x2)
///   sin_product   sin(2 pi x1) sin(2 pi x2)
///   cos_product   cos(2 pi x1) cos(2 pi x2)
///   cos_triple    cos(2 pi x1) + cos(2 pi x2) + cos(2 pi (x1 - x2))
///   mfg_cost      sin(2 pi x1) + cos(4 pi x1) + sin(2 pi x2)
///   coupling_1, coupling_2        1 - cos(4 pi x), 1 + sin(4 pi x)
///   coupling_1_2d, coupling_2_2d  1 - cos(4 pi x1) cos(4 pi x2), 1 + sin(4 pi x1) sin(4 pi x2)
///   const:<value>  constant function
Potential potential_by_name(const std::string& name);
std::vector<std::string> builtin_potential_names();

}  // namespace hjcell

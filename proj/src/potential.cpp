#include "hjcell/potential.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "hjcell/errors.hpp"

namespace hjcell {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

struct Builtin {
  int dim;
  double (*fn)(double, double);
};

const std::map<std::string, Builtin>& builtins() {
  static const std::map<std::string, Builtin> table = {
      {"zero", {1, [](double, double) { return 0.0; }}},
      {"sin", {1, [](double x, double) { return std::sin(two_pi * x); }}},
      {"cos", {1, [](double x, double) { return std::cos(two_pi * x); }}},
      {"two_sin", {1, [](double x, double) { return 2.0 * std::sin(two_pi * x); }}},
      {"coupling_1", {1, [](double x, double) { return 1.0 - std::cos(2.0 * two_pi * x); }}},
      {"coupling_2", {1, [](double x, double) { return 1.0 + std::sin(2.0 * two_pi * x); }}},
      {"cos_sum", {2, [](double x, double y) { return std::cos(two_pi * x) + std::cos(two_pi * y); }}},
      {"sin_product",
       {2, [](double x, double y) { return std::sin(two_pi * x) * std::sin(two_pi * y); }}},
      {"cos_product",
       {2, [](double x, double y) { return std::cos(two_pi * x) * std::cos(two_pi * y); }}},
      {"cos_triple",
       {2,
        [](double x, double y) {
          return std::cos(two_pi * x) + std::cos(two_pi * y) + std::cos(two_pi * (x - y));
        }}},
      {"mfg_cost",
       {2,
        [](double x, double y) {
          return std::sin(two_pi * x) + std::cos(2.0 * two_pi * x) + std::sin(two_pi * y);
        }}},
      {"coupling_1_2d",
       {2,
        [](double x, double y) {
          return 1.0 - std::cos(2.0 * two_pi * x) * std::cos(2.0 * two_pi * y);
        }}},
      {"coupling_2_2d",
       {2,
        [](double x, double y) {
          return 1.0 + std::sin(2.0 * two_pi * x) * std::sin(2.0 * two_pi * y);
        }}},
  };
  return table;
}

}  // namespace

Potential potential_by_name(const std::string& name) {
  const std::string prefix = "const:";
  if (name.rfind(prefix, 0) == 0) {
    double c = 0.0;
    try {
      std::size_t used = 0;
      c = std::stod(name.substr(prefix.size()), &used);
      if (used != name.size() - prefix.size()) throw std::invalid_argument(name);
    } catch (const std::exception&) {
      throw ConfigError("malformed constant potential '" + name + "'");
    }
    return {name, 1, [c](double, double) { return c; }};
  }
  const auto& table = builtins();
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown potential '" + name + "'");
  return {name, it->second.dim, it->second.fn};
}

std::vector<std::string> builtin_potential_names() {
  std::vector<std::string> names;
  for (const auto& [name, b] : builtins()) names.push_back(name);
  return names;
}

}  // namespace hjcell

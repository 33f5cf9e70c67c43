#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hjcell/grid.hpp"
#include "hjcell/sparse.hpp"

namespace hjcell {

/// Residual, Jacobian and side-channel counters at one state.
struct Evaluation {
  std::vector<double> residual;
  SparseMatrix jacobian;
  // Number of nodes where a guarded nonlinearity (e.g. -log m near m = 0)
  // was evaluated at its floor.
  std::size_t guard_activations = 0;
};

/// A discretized ergodic problem F: R^N -> R^M. Instances are immutable;
/// evaluate() is safe to call concurrently.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::size_t n_unknowns() const = 0;
  virtual std::size_t n_equations() const = 0;

  /// Positions of the ergodic constants inside the state vector.
  virtual std::vector<std::size_t> lambda_slots() const = 0;

  virtual void evaluate(std::span<const double> x, Evaluation& out, bool with_jacobian) const = 0;

  virtual std::vector<double> initial_guess() const = 0;
  virtual std::string descriptor() const = 0;

  /// Mesh fields stored at the front of the state vector, one grid-sized
  /// block per name (e.g. {"u"} or {"u_1", "u_2", "m_1", "m_2"}).
  virtual const Grid* grid() const { return nullptr; }
  virtual std::vector<std::string> field_names() const { return {}; }

  /// Direction e (ones on the corrector slots) with F(X + c e) = F(X) for
  /// every c; empty when the problem has no such invariance.
  virtual std::vector<double> constant_shift_direction() const { return {}; }

  std::vector<double> residual(std::span<const double> x) const;
  SparseMatrix jacobian(std::span<const double> x) const;
};

/// Problem assembled from user callbacks; mainly for tests and bindings.
class CallbackProblem final : public Problem {
 public:
  using Callback = std::function<void(std::span<const double> x, std::vector<double>& residual,
                                      SparseMatrix* jacobian)>;

  CallbackProblem(std::size_t n_unknowns, std::size_t n_equations,
                  std::vector<std::size_t> lambda_slots, Callback callback,
                  std::string descriptor = "callback");

  std::size_t n_unknowns() const override { return n_unknowns_; }
  std::size_t n_equations() const override { return n_equations_; }
  std::vector<std::size_t> lambda_slots() const override { return lambda_slots_; }
  void evaluate(std::span<const double> x, Evaluation& out, bool with_jacobian) const override;
  std::vector<double> initial_guess() const override {
    return std::vector<double>(n_unknowns_, 0.0);
  }
  std::string descriptor() const override { return descriptor_; }

 private:
  std::size_t n_unknowns_, n_equations_;
  std::vector<std::size_t> lambda_slots_;
  Callback callback_;
  std::string descriptor_;
};

}  // namespace hjcell

#include "hjcell/problem.hpp"

#include "hjcell/errors.hpp"

namespace hjcell {

std::vector<double> Problem::residual(std::span<const double> x) const {
  Evaluation e;
  evaluate(x, e, false);
  return std::move(e.residual);
}

SparseMatrix Problem::jacobian(std::span<const double> x) const {
  Evaluation e;
  evaluate(x, e, true);
  return std::move(e.jacobian);
}

CallbackProblem::CallbackProblem(std::size_t n_unknowns, std::size_t n_equations,
                                 std::vector<std::size_t> lambda_slots, Callback callback,
                                 std::string descriptor)
    : n_unknowns_(n_unknowns),
      n_equations_(n_equations),
      lambda_slots_(std::move(lambda_slots)),
      callback_(std::move(callback)),
      descriptor_(std::move(descriptor)) {
  for (std::size_t s : lambda_slots_)
    detail::require(s < n_unknowns_, "CallbackProblem: lambda slot out of range");
}

void CallbackProblem::evaluate(std::span<const double> x, Evaluation& out,
                               bool with_jacobian) const {
  detail::require(x.size() == n_unknowns_, "CallbackProblem: state has wrong length");
  out.residual.assign(n_equations_, 0.0);
  out.guard_activations = 0;
  if (with_jacobian) {
    out.jacobian = SparseMatrix(n_equations_, n_unknowns_);
    callback_(x, out.residual, &out.jacobian);
    out.jacobian.compress();
  } else {
    callback_(x, out.residual, nullptr);
  }
  detail::require(out.residual.size() == n_equations_, "CallbackProblem: residual has wrong length");
}

}  // namespace hjcell

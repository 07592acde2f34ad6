#pragma once

#include <stdexcept>
#include <string>

namespace teleqcp {

/// Raised when a computed quantity violates an invariant it must satisfy
/// (non-Hermitian input, broken translation invariance, protocol/closed-form
/// mismatch). Distinct from argument errors, which signal caller mistakes.
class NumericalConsistencyError : public std::runtime_error {
public:
  explicit NumericalConsistencyError(const std::string& what) : std::runtime_error(what) {}
};

/// A Bell outcome with vanishing probability was asked for its output state.
class OutcomeImpossibleError : public std::domain_error {
public:
  explicit OutcomeImpossibleError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace teleqcp

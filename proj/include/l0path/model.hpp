#pragma once

#include <cstddef>
#include <stdexcept>

#include "l0path/data.hpp"

namespace l0path {

// Raised when an iterate produces a non-finite objective.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Termination { Converged, MaxSweeps };

// A fitted model at one (lambda, gamma). `beta` never stores zeros.
struct Model {
  double intercept = 0.0;
  SparseVector beta;
  double lambda = 0.0;
  double gamma = 0.0;
  double objective = 0.0;
  std::size_t sweeps = 0;
  Termination termination = Termination::Converged;

  std::size_t support_size() const { return beta.size(); }
  bool same_support(const Model& other) const {
    return beta.indices == other.beta.indices;
  }
};

}  // namespace l0path

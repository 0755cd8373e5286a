#pragma once

#include <stdexcept>

namespace quickflex {

// Linear objective alpha*p1 + beta*q1 over the PCC exchange, minimization
// sense. (0,0) is rejected.
struct DirectionObjective {
  double alpha;
  double beta;

  DirectionObjective(double a, double b) : alpha(a), beta(b) {
    if (a == 0.0 && b == 0.0)
      throw std::invalid_argument("DirectionObjective: (alpha, beta) must be nonzero");
  }
};

}  // namespace quickflex

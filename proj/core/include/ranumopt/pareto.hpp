#pragma once

#include <optional>

#include "ranumopt/net_model.hpp"

namespace ranumopt {

// One point of an energy-utility tradeoff curve. `utility` is -inf only for
// the energy-only endpoint (lambda2 = 0, all probabilities zero).
struct ParetoPoint {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double energy = 0.0;
  double utility = 0.0;
  ProbAssignment assignment;
  std::optional<RateVector> rates;  // present for cross-layer points
};

}  // namespace ranumopt

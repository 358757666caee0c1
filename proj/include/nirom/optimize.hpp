#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nirom/box.hpp"

namespace nirom {

struct TraceEntry {
  std::size_t evaluation = 0;
  Vector point;
  double value = 0.0;
  double best = 0.0;  ///< best value seen so far, non-increasing
};

struct OptimizeResult {
  Vector argmin;
  double value = 0.0;
  std::size_t evaluations = 0;
  std::vector<TraceEntry> trace;
};

/// Box-constrained minimization: a Halton screen of budget/2 points, then
/// Nelder-Mead from the best screened point with the remaining budget.
/// Every query is clamped into the box. Throws NumericError on a non-finite
/// value, naming the point.
OptimizeResult optimize(const std::function<double(const Vector&)>& f, const ParameterBox& box, std::size_t budget,
                        std::uint64_t seed);

}  // namespace nirom

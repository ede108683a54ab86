#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bosonq/types.hpp"

namespace bosonq {

struct LbfgsOptions {
  int max_iterations = 2000;
  double gradient_tolerance = 1e-9;  // on ‖∇f‖∞
  int history = 10;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search_evaluations = 40;
};

enum class LbfgsStatus { GradientTolerance, MaxIterations, StopRequested, LineSearchFailed };
std::string to_string(LbfgsStatus status);

struct LbfgsResult {
  RealVector x;
  double value = 0.0;
  RealVector gradient;
  int iterations = 0;
  int evaluations = 0;
  LbfgsStatus status = LbfgsStatus::MaxIterations;
  std::vector<double> trace;  // objective after each accepted iterate, starting with the initial point
};

/// Returns f(x) and writes ∇f(x) into grad.
using Objective = std::function<double(const RealVector& x, RealVector& grad)>;
/// Called at the initial point and after every accepted iterate; returning
/// true ends the run.
using StopPredicate = std::function<bool(const RealVector& x, double value)>;

/// Limited-memory BFGS with a strong-Wolfe line search (bracketing + cubic
/// zoom). The returned iterate is the best point seen; the trace is
/// monotone non-increasing.
LbfgsResult minimize_lbfgs(const Objective& f, RealVector x0, const LbfgsOptions& options = {},
                           const StopPredicate& stop = {});

}  // namespace bosonq

#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace trajrepair {

enum class StopCriterion {
  kGradientInfNorm,  // ||g||_inf < tolerance
  kCostDelta,        // |f_k - f_{k+1}| < tolerance * max(1, |f_k|)
};

struct LineSearchConfig {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  int max_trials = 40;
};

struct OptimizerConfig {
  int max_iterations = 100;
  double tolerance = 0.01;
  StopCriterion criterion = StopCriterion::kGradientInfNorm;
  int history_size = 8;
  LineSearchConfig line_search;

  void validate() const;
};

enum class Termination { kConverged, kMaxIterations, kLineSearchFailure };

std::string to_string(Termination t);

struct OptimizeOutcome {
  Eigen::VectorXd x;
  double cost = 0.0;
  int iterations = 0;
  Termination termination = Termination::kMaxIterations;
  std::vector<double> cost_trace;  // initial cost followed by one entry per iteration
};

// Returns the cost at x and writes the gradient into `grad` (same size as x).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Limited-memory BFGS with a backtracking Armijo line search.
///
/// Throws OptimizerError if the objective returns a non-finite cost or
/// gradient at the starting point; non-finite trial points inside the line
/// search are treated as failed trials.
OptimizeOutcome minimize(const Objective& objective, Eigen::VectorXd x0,
                         const OptimizerConfig& config = {});

}  // namespace trajrepair

#include "trajrepair/optimizer.hpp"

#include "trajrepair/errors.hpp"

#include <cmath>
#include <deque>

namespace trajrepair {

void OptimizerConfig::validate() const {
  if (max_iterations < 1) throw ContractViolation("max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw ContractViolation("optimizer tolerance must be > 0");
  if (history_size < 1) throw ContractViolation("history_size must be >= 1");
  if (!(line_search.initial_step > 0.0)) throw ContractViolation("initial step must be > 0");
  if (!(line_search.shrink > 0.0 && line_search.shrink < 1.0))
    throw ContractViolation("line search shrink must lie in (0, 1)");
  if (!(line_search.sufficient_decrease > 0.0 && line_search.sufficient_decrease < 1.0))
    throw ContractViolation("sufficient decrease constant must lie in (0, 1)");
  if (line_search.max_trials < 1) throw ContractViolation("line search needs >= 1 trial");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kConverged: return "converged";
    case Termination::kMaxIterations: return "max-iter";
    case Termination::kLineSearchFailure: return "line-search-failure";
  }
  return "unknown";
}

namespace {

struct CurvaturePair {
  Eigen::VectorXd s, y;
  double rho;
};

// Two-loop recursion: returns -H * g.
Eigen::VectorXd search_direction(const Eigen::VectorXd& g, const std::deque<CurvaturePair>& mem) {
  Eigen::VectorXd q = g;
  std::vector<double> alpha(mem.size());
  for (int i = static_cast<int>(mem.size()) - 1; i >= 0; --i) {
    alpha[i] = mem[i].rho * mem[i].s.dot(q);
    q -= alpha[i] * mem[i].y;
  }
  if (!mem.empty()) {
    const auto& last = mem.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < mem.size(); ++i) {
    const double beta = mem[i].rho * mem[i].y.dot(q);
    q += (alpha[i] - beta) * mem[i].s;
  }
  return -q;
}

bool converged(const OptimizerConfig& cfg, const Eigen::VectorXd& g, double f_prev, double f) {
  if (cfg.criterion == StopCriterion::kGradientInfNorm)
    return g.size() == 0 || g.lpNorm<Eigen::Infinity>() < cfg.tolerance;
  return std::abs(f_prev - f) < cfg.tolerance * std::max(1.0, std::abs(f_prev));
}

}  // namespace

OptimizeOutcome minimize(const Objective& objective, Eigen::VectorXd x0,
                         const OptimizerConfig& config) {
  config.validate();
  OptimizeOutcome out;
  out.x = std::move(x0);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(out.x.size());
  out.cost = objective(out.x, g);
  if (!std::isfinite(out.cost) || !g.allFinite())
    throw OptimizerError("objective is not finite at the starting point");
  out.cost_trace.push_back(out.cost);

  if (config.criterion == StopCriterion::kGradientInfNorm && converged(config, g, 0.0, 0.0)) {
    out.termination = Termination::kConverged;
    return out;
  }

  std::deque<CurvaturePair> memory;
  Eigen::VectorXd g_new(out.x.size());
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    Eigen::VectorXd dir = search_direction(g, memory);
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      // Not a descent direction; restart from steepest descent.
      memory.clear();
      dir = -g;
      slope = -g.squaredNorm();
    }
    double step = config.line_search.initial_step;
    if (memory.empty()) step = std::min(step, 1.0 / std::max(1e-12, g.lpNorm<Eigen::Infinity>()));

    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    for (int trial = 0; trial < config.line_search.max_trials; ++trial) {
      x_new = out.x + step * dir;
      f_new = objective(x_new, g_new);
      if (std::isfinite(f_new) && g_new.allFinite() &&
          f_new <= out.cost + config.line_search.sufficient_decrease * step * slope) {
        accepted = true;
        break;
      }
      step *= config.line_search.shrink;
    }
    if (!accepted) {
      out.termination = Termination::kLineSearchFailure;
      return out;
    }

    CurvaturePair pair{x_new - out.x, g_new - g, 0.0};
    const double sy = pair.s.dot(pair.y);
    if (sy > 1e-12 * pair.s.norm() * pair.y.norm()) {
      pair.rho = 1.0 / sy;
      memory.push_back(std::move(pair));
      if (static_cast<int>(memory.size()) > config.history_size) memory.pop_front();
    }

    const double f_prev = out.cost;
    out.x = std::move(x_new);
    out.cost = f_new;
    g = g_new;
    out.iterations = iter + 1;
    out.cost_trace.push_back(out.cost);
    if (converged(config, g, f_prev, out.cost)) {
      out.termination = Termination::kConverged;
      return out;
    }
  }
  out.termination = Termination::kMaxIterations;
  return out;
}

}  // namespace trajrepair

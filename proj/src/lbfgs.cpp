#include "bosonq/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace bosonq {

std::string to_string(LbfgsStatus status) {
  switch (status) {
    case LbfgsStatus::GradientTolerance: return "gradient_tolerance";
    case LbfgsStatus::MaxIterations: return "max_iterations";
    case LbfgsStatus::StopRequested: return "target_reached";
    case LbfgsStatus::LineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

namespace {

struct Sample {
  double alpha = 0.0;
  double value = 0.0;
  double slope = 0.0;
  RealVector grad;
};

// Minimizer of the cubic through (a, fa, da), (b, fb, db), clamped into the
// inner 80% of the interval; bisection when the cubic is degenerate.
double cubic_step(const Sample& a, const Sample& b) {
  const double lo = std::min(a.alpha, b.alpha);
  const double hi = std::max(a.alpha, b.alpha);
  const double width = hi - lo;
  double trial = 0.5 * (lo + hi);
  if (std::isfinite(a.value) && std::isfinite(b.value)) {
    const double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.alpha - b.alpha);
    const double disc = d1 * d1 - a.slope * b.slope;
    if (disc >= 0.0) {
      const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
      const double denom = b.slope - a.slope + 2.0 * d2;
      if (denom != 0.0) {
        const double c = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
        if (std::isfinite(c)) trial = c;
      }
    }
  }
  return std::clamp(trial, lo + 0.1 * width, hi - 0.1 * width);
}

class LineSearch {
 public:
  LineSearch(const Objective& f, const RealVector& x, const RealVector& dir, double f0, double slope0,
             const LbfgsOptions& opt, int& evaluations)
      : f_(f), x_(x), dir_(dir), f0_(f0), slope0_(slope0), opt_(opt), evaluations_(evaluations) {}

  // Returns a sample satisfying the strong Wolfe conditions, or the best
  // sufficient-decrease sample, or nothing (alpha = 0).
  Sample run(double alpha) {
    Sample prev{0.0, f0_, slope0_, {}};
    for (int i = 0; budget_left(); ++i) {
      Sample cur = eval(alpha);
      if (!armijo(cur) || (i > 0 && cur.value >= prev.value)) return zoom(prev, cur);
      if (std::abs(cur.slope) <= -opt_.wolfe_c2 * slope0_) return cur;
      if (cur.slope >= 0.0) return zoom(cur, prev);
      prev = cur;
      alpha *= 2.0;
    }
    return best_;
  }

 private:
  bool budget_left() const { return used_ < opt_.max_line_search_evaluations; }

  bool armijo(const Sample& s) const {
    return std::isfinite(s.value) && s.value <= f0_ + opt_.wolfe_c1 * s.alpha * slope0_;
  }

  Sample eval(double alpha) {
    Sample s;
    s.alpha = alpha;
    s.grad.resize(x_.size());
    s.value = f_(x_ + alpha * dir_, s.grad);
    ++used_;
    ++evaluations_;
    s.slope = std::isfinite(s.value) ? s.grad.dot(dir_) : 0.0;
    if (!std::isfinite(s.value)) s.value = std::numeric_limits<double>::infinity();
    if (armijo(s) && (best_.alpha == 0.0 || s.value < best_.value)) best_ = s;
    return s;
  }

  Sample zoom(Sample lo, Sample hi) {
    while (budget_left()) {
      if (std::abs(hi.alpha - lo.alpha) < 1e-16 * std::max(1.0, lo.alpha)) break;
      Sample cur = eval(cubic_step(lo, hi));
      if (!armijo(cur) || cur.value >= lo.value) {
        hi = cur;
      } else {
        if (std::abs(cur.slope) <= -opt_.wolfe_c2 * slope0_) return cur;
        if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = cur;
      }
    }
    return best_;
  }

  const Objective& f_;
  const RealVector& x_;
  const RealVector& dir_;
  double f0_;
  double slope0_;
  const LbfgsOptions& opt_;
  int& evaluations_;
  int used_ = 0;
  Sample best_;
};

}  // namespace

LbfgsResult minimize_lbfgs(const Objective& f, RealVector x0, const LbfgsOptions& opt, const StopPredicate& stop) {
  LbfgsResult res;
  res.x = std::move(x0);
  res.gradient.resize(res.x.size());
  res.value = f(res.x, res.gradient);
  res.evaluations = 1;
  if (!std::isfinite(res.value)) throw NumericalError("objective is not finite at the initial point");
  res.trace.push_back(res.value);

  if (stop && stop(res.x, res.value)) {
    res.status = LbfgsStatus::StopRequested;
    return res;
  }

  std::deque<RealVector> s_hist, y_hist;
  std::deque<double> rho_hist;
  bool restarted = false;

  while (true) {
    if (res.gradient.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance) {
      res.status = LbfgsStatus::GradientTolerance;
      return res;
    }
    if (res.iterations >= opt.max_iterations) {
      res.status = LbfgsStatus::MaxIterations;
      return res;
    }

    // Two-loop recursion.
    RealVector q = res.gradient;
    std::vector<double> alphas(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alphas[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alphas[i] * y_hist[i];
    }
    if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alphas[i] - beta) * s_hist[i];
    }
    RealVector dir = -q;
    double slope = res.gradient.dot(dir);
    if (!(slope < 0.0)) {
      dir = -res.gradient;
      slope = res.gradient.dot(dir);
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }
    const double alpha0 = s_hist.empty() ? std::min(1.0, 1.0 / res.gradient.norm()) : 1.0;

    LineSearch ls(f, res.x, dir, res.value, slope, opt, res.evaluations);
    Sample step = ls.run(alpha0);
    if (step.alpha == 0.0) {
      if (restarted || s_hist.empty()) {
        res.status = LbfgsStatus::LineSearchFailed;
        return res;
      }
      // Drop the curvature memory and retry along steepest descent once.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      restarted = true;
      continue;
    }
    restarted = false;

    // Same expression as the line search evaluated, so x matches bit for bit.
    RealVector x_new = res.x + step.alpha * dir;
    RealVector s = x_new - res.x;
    RealVector y = step.grad - res.gradient;
    res.x = std::move(x_new);
    res.value = step.value;
    res.gradient = step.grad;
    ++res.iterations;
    res.trace.push_back(res.value);

    const double sy = s.dot(y);
    if (sy > 1e-300) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (stop && stop(res.x, res.value)) {
      res.status = LbfgsStatus::StopRequested;
      return res;
    }
  }
}

}  // namespace bosonq

/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "obsimpact/Lbfgs.h"

#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>

#include "obsimpact/Errors.h"

namespace obsimpact {

namespace {

struct TrialPoint {
  double a = 0.0;
  double f = 0.0;
  double d = 0.0;
  Vector x;
  Vector g;
};

// -----------------------------------------------------------------------------
/// Line search along p from x0: Nocedal & Wright, Algorithms 3.5 and 3.6, with
/// safeguarded cubic interpolation in the zoom phase.
class LineSearch {
 public:
  LineSearch(const Objective & fn, const TrialPoint & start, const Vector & p,
             const LbfgsOptions & opts, int & evaluations)
    : fn_(fn), start_(start), p_(p), opts_(opts), evaluations_(evaluations),
      epsf_(1.0e-10 * std::abs(start.f)) {}

  std::optional<TrialPoint> run(double a1) {
    TrialPoint prev = start_;
    double a = a1;
    for (int i = 0; i < opts_.max_line_search; ++i) {
      TrialPoint cur = eval(a);
      if (!std::isfinite(cur.f) || !sufficient(cur) || (i > 0 && worse(cur, prev))) {
        return zoom(prev, cur);
      }
      if (curvature(cur)) return cur;
      if (cur.d >= 0.0) return zoom(cur, prev);
      prev = std::move(cur);
      a *= 2.0;
    }
    return prev.a > 0.0 ? std::optional<TrialPoint>(prev) : std::nullopt;
  }

 private:
  TrialPoint eval(double a) {
    TrialPoint t;
    t.a = a;
    t.x = start_.x + a * p_;
    t.g = Vector::Zero(t.x.size());
    ++evaluations_;
    try {
      t.f = fn_(t.x, t.g);
      t.d = t.g.dot(p_);
    } catch (const Error &) {
      // Trial step left the model's domain of validity; treat as too long.
      t.f = std::numeric_limits<double>::infinity();
      t.d = std::numeric_limits<double>::quiet_NaN();
    }
    if (!std::isfinite(t.d)) t.f = std::numeric_limits<double>::infinity();
    return t;
  }

  bool roundoff(const TrialPoint & t) const {return std::abs(t.f - start_.f) <= epsf_;}

  bool sufficient(const TrialPoint & t) const {
    if (t.f <= start_.f + opts_.c1 * t.a * start_.d) return true;
    return roundoff(t) && t.d <= (2.0 * opts_.c1 - 1.0) * start_.d;
  }

  bool curvature(const TrialPoint & t) const {return std::abs(t.d) <= -opts_.c2 * start_.d;}

  bool worse(const TrialPoint & t, const TrialPoint & ref) const {
    return t.f >= ref.f && !roundoff(t);
  }

  static double interpolate(const TrialPoint & lo, const TrialPoint & hi) {
    const double lower = std::min(lo.a, hi.a), upper = std::max(lo.a, hi.a);
    const double width = upper - lower;
    const double mid = 0.5 * (lo.a + hi.a);
    if (!std::isfinite(hi.f)) return mid;
    const double d1 = lo.d + hi.d - 3.0 * (lo.f - hi.f) / (lo.a - hi.a);
    const double rad = d1 * d1 - lo.d * hi.d;
    if (!(rad >= 0.0)) return mid;
    const double d2 = std::copysign(std::sqrt(rad), hi.a - lo.a);
    const double a = hi.a - (hi.a - lo.a) * (hi.d + d2 - d1) / (hi.d - lo.d + 2.0 * d2);
    if (!std::isfinite(a) || a < lower + 0.1 * width || a > upper - 0.1 * width) return mid;
    return a;
  }

  std::optional<TrialPoint> zoom(TrialPoint lo, TrialPoint hi) {
    for (int j = 0; j < opts_.max_line_search; ++j) {
      if (std::abs(hi.a - lo.a) <= 1.0e-14 * std::max(lo.a, hi.a)) break;
      TrialPoint cur = eval(interpolate(lo, hi));
      if (!std::isfinite(cur.f) || !sufficient(cur) || worse(cur, lo)) {
        hi = std::move(cur);
      } else {
        if (curvature(cur)) return cur;
        if (cur.d * (hi.a - lo.a) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
    }
    // lo satisfies sufficient decrease when it is not the start point.
    return lo.a > 0.0 ? std::optional<TrialPoint>(lo) : std::nullopt;
  }

  const Objective & fn_;
  const TrialPoint & start_;
  const Vector & p_;
  const LbfgsOptions & opts_;
  int & evaluations_;
  double epsf_;
};

}  // namespace

// -----------------------------------------------------------------------------
Vector lbfgsTwoLoop(const std::vector<CurvaturePair> & pairs, const Vector & v,
                    const std::function<Vector(const Vector &)> & initialInverse) {
  if (pairs.empty()) return initialInverse ? initialInverse(v) : v;
  const int m = static_cast<int>(pairs.size());
  std::vector<double> alpha(m), rho(m);
  Vector q = v;
  for (int i = m - 1; i >= 0; --i) {
    rho[i] = 1.0 / pairs[i].y.dot(pairs[i].s);
    alpha[i] = rho[i] * pairs[i].s.dot(q);
    q -= alpha[i] * pairs[i].y;
  }
  const CurvaturePair & newest = pairs.back();
  Vector r;
  if (initialInverse) {
    const double gamma = newest.s.dot(newest.y) / newest.y.dot(initialInverse(newest.y));
    r = gamma * initialInverse(q);
  } else {
    r = (newest.s.dot(newest.y) / newest.y.squaredNorm()) * q;
  }
  for (int i = 0; i < m; ++i) {
    const double beta = rho[i] * pairs[i].y.dot(r);
    r += (alpha[i] - beta) * pairs[i].s;
  }
  return r;
}

// -----------------------------------------------------------------------------
MinimizerReport minimizeLbfgs(const Objective & fn, const Vector & x0, const LbfgsOptions & opts) {
  if (opts.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (opts.memory < 1) throw ConfigError("L-BFGS memory must be >= 1");
  MinimizerReport rep;
  TrialPoint cur;
  cur.x = x0;
  cur.g = Vector::Zero(x0.size());
  cur.f = fn(cur.x, cur.g);
  rep.evaluations = 1;
  if (!std::isfinite(cur.f) || !cur.g.allFinite()) throw NonFiniteState("objective not finite at the start point");
  rep.cost.push_back(cur.f);
  rep.grad_norm.push_back(cur.g.norm());
  const double tol = std::max(opts.grad_tol_rel * rep.grad_norm.front(), opts.grad_tol_abs);

  std::deque<CurvaturePair> memory;
  rep.converged = rep.grad_norm.back() <= tol;
  while (!rep.converged && rep.iterations < opts.max_iters) {
    std::vector<CurvaturePair> pairs(memory.begin(), memory.end());
    Vector p = -lbfgsTwoLoop(pairs, cur.g, opts.initial_inverse);
    cur.d = cur.g.dot(p);
    if (!(cur.d < 0.0)) {
      memory.clear();
      pairs.clear();
      p = opts.initial_inverse ? Vector(-opts.initial_inverse(cur.g)) : Vector(-cur.g);
      cur.d = cur.g.dot(p);
    }
    const double a1 = pairs.empty() ? 1.0 / p.norm() : 1.0;
    cur.a = 0.0;
    LineSearch ls(fn, cur, p, opts, rep.evaluations);
    std::optional<TrialPoint> next = ls.run(a1);
    if (!next) {
      rep.line_search_failure = true;
      rep.message = "line search failed at iteration " + std::to_string(rep.iterations + 1);
      break;
    }
    CurvaturePair pair{next->x - cur.x, next->g - cur.g};
    if (pair.s.dot(pair.y) > 0.0) {
      memory.push_back(std::move(pair));
      if (static_cast<int>(memory.size()) > opts.memory) memory.pop_front();
    }
    cur = std::move(*next);
    ++rep.iterations;
    rep.cost.push_back(cur.f);
    rep.grad_norm.push_back(cur.g.norm());
    rep.converged = rep.grad_norm.back() <= tol;
  }
  if (rep.message.empty()) {
    rep.message = rep.converged ? "converged" : "iteration limit reached";
  }
  rep.pairs.assign(memory.begin(), memory.end());
  rep.x = std::move(cur.x);
  return rep;
}

// -----------------------------------------------------------------------------
MinimizerReport minimize(const FourDVar & problem, const Vector & xStart, const LbfgsOptions & opts) {
  const Objective fn = [&problem](const Vector & x, Vector & g) {
    CostEvaluation ce = problem.costGrad(x);
    g = std::move(*ce.gradient);
    return ce.j_total;
  };
  if (opts.initial_inverse) return minimizeLbfgs(fn, xStart, opts);
  // Scaling by the background variances balances h against the momenta.
  LbfgsOptions scaled = opts;
  scaled.initial_inverse = [d = problem.covariance().diag()](const Vector & v) {
    return Vector(d.cwiseProduct(v));
  };
  return minimizeLbfgs(fn, xStart, scaled);
}

// -----------------------------------------------------------------------------
void writeMinimizerCsv(std::ostream & os, const MinimizerReport & report) {
  os << "iter,J,grad_norm\n" << std::setprecision(17);
  for (std::size_t k = 0; k < report.cost.size(); ++k) {
    os << k << ',' << report.cost[k] << ',' << report.grad_norm[k] << '\n';
  }
}

}  // namespace obsimpact

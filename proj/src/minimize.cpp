#include "minimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace pc::detail {
namespace {

void require_finite(double f, const Vector& g, int iter) {
  if (!std::isfinite(f) || !g.allFinite()) {
    throw NumericError("non-finite objective or gradient at iteration " + std::to_string(iter));
  }
}

bool converged(const Vector& x, const Vector& g, Eigen::Index boxDim, double fPrev, double f,
               double tolGrad, double tolObj) {
  Vector step = x - g;
  project_flat(step, boxDim);
  const double pgNorm = (x - step).norm();
  if (pgNorm <= tolGrad * std::max(1.0, x.norm())) return true;
  if (tolObj > 0.0 && std::abs(fPrev - f) <= tolObj * std::max(1.0, std::abs(fPrev))) return true;
  return false;
}

struct LsPoint {
  double t = 0.0;
  double f = 0.0;
  double slope = 0.0;
};

struct LineSearchResult {
  bool ok = false;
  double t = 0.0;
  double f = 0.0;
  Vector g;
  ObjectiveTerms terms;
};

// Strong-Wolfe line search (bracket + bisection zoom). The final evaluation is
// always at the returned step, so res.g/res.terms match res.t.
LineSearchResult strong_wolfe(const EvalFn& eval, const Vector& x, const Vector& d, double f0,
                              double slope0, double t0) {
  constexpr double c1 = 1e-4;
  constexpr double c2 = 0.9;
  constexpr int maxEvals = 30;

  LineSearchResult res;
  Vector g(x.size());
  ObjectiveTerms terms;
  int evals = 0;

  auto phi = [&](double t) -> LsPoint {
    const double f = eval(x + t * d, &g, &terms);
    ++evals;
    return {t, f, g.dot(d)};
  };
  auto accept = [&](const LsPoint& p) {
    res.ok = true;
    res.t = p.t;
    res.f = p.f;
    res.g = g;
    res.terms = terms;
  };

  auto zoom = [&](LsPoint lo, LsPoint hi) {
    while (evals < maxEvals) {
      LsPoint mid = phi(0.5 * (lo.t + hi.t));
      if (!std::isfinite(mid.f) || mid.f > f0 + c1 * mid.t * slope0 || mid.f >= lo.f) {
        hi = mid;
      } else {
        if (std::abs(mid.slope) <= -c2 * slope0) {
          accept(mid);
          return;
        }
        if (mid.slope * (hi.t - lo.t) >= 0) hi = lo;
        lo = mid;
      }
      if (std::abs(hi.t - lo.t) < 1e-16 * std::max(1.0, std::abs(lo.t))) break;
    }
    // Interval collapsed or evaluation budget spent: keep the best
    // sufficient-decrease point if one exists.
    if (lo.t > 0.0 && std::isfinite(lo.f) && lo.f <= f0 + c1 * lo.t * slope0) accept(phi(lo.t));
  };

  LsPoint prev{0.0, f0, slope0};
  double t = t0;
  while (evals < maxEvals) {
    LsPoint cur = phi(t);
    if (!std::isfinite(cur.f) || cur.f > f0 + c1 * t * slope0 ||
        (prev.t > 0.0 && cur.f >= prev.f)) {
      zoom(prev, cur);
      return res;
    }
    if (std::abs(cur.slope) <= -c2 * slope0) {
      accept(cur);
      return res;
    }
    if (cur.slope >= 0) {
      zoom(cur, prev);
      return res;
    }
    prev = cur;
    t = std::min(2.0 * t, 1e12);
  }
  return res;
}

struct LbfgsPair {
  Vector s, y;
  double rho = 0.0;
};

Vector two_loop_direction(const std::deque<LbfgsPair>& history, const Vector& g) {
  Vector q = -g;
  if (history.empty()) return q;
  std::vector<double> alpha(history.size());
  for (std::size_t i = history.size(); i-- > 0;) {
    alpha[i] = history[i].rho * history[i].s.dot(q);
    q -= alpha[i] * history[i].y;
  }
  const LbfgsPair& last = history.back();
  q *= last.s.dot(last.y) / last.y.squaredNorm();
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double beta = history[i].rho * history[i].y.dot(q);
    q += (alpha[i] - beta) * history[i].s;
  }
  return q;
}

}  // namespace

std::pair<long, double> project_flat(Vector& x, Eigen::Index boxDim) {
  long changed = 0;
  double maxChange = 0.0;
  for (Eigen::Index i = 0; i < boxDim; ++i) {
    const double clamped = std::clamp(x[i], 0.0, 1.0);
    if (clamped != x[i]) {
      maxChange = std::max(maxChange, std::abs(clamped - x[i]));
      x[i] = clamped;
      ++changed;
    }
  }
  return {changed, maxChange};
}

MinimizeResult minimize_lbfgs(const EvalFn& eval, Vector x, Eigen::Index boxDim, int maxIters,
                              double tolGrad, double tolObj, const IterationHook& hook) {
  constexpr std::size_t historySize = 10;

  const long initClamped = project_flat(x, boxDim).first;
  Vector g(x.size());
  ObjectiveTerms terms;
  double f = eval(x, &g, &terms);
  require_finite(f, g, 0);
  if (hook.onAccept) hook.onAccept(0, f, terms, initClamped);

  // Zeroes active-set entries of the (negated-)gradient: coordinates on a
  // bound whose gradient points outward. The second mask keeps the search
  // direction feasible at the bounds, so projection only fires when an
  // interior coordinate overshoots during the step.
  auto mask_active_gradient = [&](Vector& v) {
    for (Eigen::Index i = 0; i < boxDim; ++i)
      if ((x[i] <= 0.0 && g[i] > 0.0) || (x[i] >= 1.0 && g[i] < 0.0)) v[i] = 0.0;
  };
  auto mask_outward_direction = [&](Vector& d) {
    for (Eigen::Index i = 0; i < boxDim; ++i)
      if ((x[i] <= 0.0 && d[i] < 0.0) || (x[i] >= 1.0 && d[i] > 0.0)) d[i] = 0.0;
  };

  std::deque<LbfgsPair> history;
  for (int iter = 1; iter <= maxIters; ++iter) {
    Vector gm = g;
    mask_active_gradient(gm);
    Vector d = two_loop_direction(history, gm);
    mask_outward_direction(d);
    double slope = g.dot(d);
    if (!d.allFinite() || slope >= 0.0) {
      history.clear();
      d = -gm;
      mask_outward_direction(d);
      slope = g.dot(d);
      if (slope >= 0.0) break;  // projected gradient is zero
    }

    const double t0 = history.empty() ? std::min(1.0, 1.0 / std::max(1e-12, d.norm())) : 1.0;
    LineSearchResult ls = strong_wolfe(eval, x, d, f, slope, t0);
    if (!ls.ok) {
      if (!history.empty()) {  // retry the iteration from steepest descent
        history.clear();
        --iter;
        continue;
      }
      break;  // no acceptable step remains
    }

    Vector xNew = x + ls.t * d;
    long clamped = project_flat(xNew, boxDim).first;
    double fNew = ls.f;
    Vector gNew = ls.g;
    ObjectiveTerms termsNew = ls.terms;

    if (clamped > 0) {
      fNew = eval(xNew, &gNew, &termsNew);
      if (fNew > f) {
        // Projection undid the line-search decrease; backtrack along the
        // projected path instead.
        double t = ls.t;
        bool recovered = false;
        for (int bt = 0; bt < 50; ++bt) {
          t *= 0.5;
          Vector xBt = x + t * d;
          const long clampedBt = project_flat(xBt, boxDim).first;
          const double fBt = eval(xBt, &gNew, &termsNew);
          if (std::isfinite(fBt) && fBt <= f) {
            xNew = std::move(xBt);
            fNew = fBt;
            clamped = clampedBt;
            recovered = true;
            break;
          }
        }
        if (!recovered) break;
      }
    }
    require_finite(fNew, gNew, iter);

    // Secant pairs come from the actual (projected) displacement; they stay
    // valid for the smooth objective whenever the curvature condition holds,
    // so clamping skips the pair rather than wiping the history.
    LbfgsPair pair;
    pair.s = xNew - x;
    pair.y = gNew - g;
    const double sy = pair.s.dot(pair.y);
    if (sy > 1e-10 * pair.s.norm() * pair.y.norm()) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (history.size() > historySize) history.pop_front();
    }

    const double fPrev = f;
    x = std::move(xNew);
    f = fNew;
    g = std::move(gNew);
    if (hook.onAccept) hook.onAccept(iter, f, termsNew, clamped);
    if (converged(x, g, boxDim, fPrev, f, tolGrad, tolObj)) break;
  }
  return {std::move(x), f};
}

MinimizeResult minimize_projected_gd(const EvalFn& eval, Vector x, Eigen::Index boxDim,
                                     int maxIters, double gamma, double tolGrad, double tolObj,
                                     const IterationHook& hook) {
  constexpr double c1 = 1e-4;

  const long initClamped = project_flat(x, boxDim).first;
  Vector g(x.size());
  ObjectiveTerms terms;
  double f = eval(x, &g, &terms);
  require_finite(f, g, 0);
  if (hook.onAccept) hook.onAccept(0, f, terms, initClamped);

  for (int iter = 1; iter <= maxIters; ++iter) {
    double step = gamma;
    bool accepted = false;
    Vector xNew;
    double fNew = f;
    long clamped = 0;
    for (int bt = 0; bt < 60; ++bt) {
      xNew = x - step * g;
      clamped = project_flat(xNew, boxDim).first;
      fNew = eval(xNew, nullptr, nullptr);
      if (std::isfinite(fNew) && fNew <= f + c1 * g.dot(xNew - x)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent at the smallest step

    const double fPrev = f;
    x = std::move(xNew);
    f = eval(x, &g, &terms);
    require_finite(f, g, iter);
    if (hook.onAccept) hook.onAccept(iter, f, terms, clamped);
    if (converged(x, g, boxDim, fPrev, f, tolGrad, tolObj)) break;
  }
  return {std::move(x), f};
}

}  // namespace pc::detail

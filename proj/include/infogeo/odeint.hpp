#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "infogeo/common.hpp"

namespace infogeo {

/// Initial-value problem. `event`, when set, is a scalar function of
/// (t, y) whose sign change stops the integration.
struct IvpProblem {
  std::function<std::vector<double>(double, const std::vector<double>&)> rhs;
  std::vector<double> y0;
  double t_start = 0.0;
  double t_end = 1.0;
  std::function<double(double, const std::vector<double>&)> event;
};

/// Integration output: states and right-hand-side values at the accepted
/// nodes. Values at intermediate times come from cubic Hermite
/// interpolation between nodes.
struct Trajectory {
  std::vector<double> ts;
  std::vector<std::vector<double>> ys;
  std::vector<std::vector<double>> derivs;
  bool terminated_by_event = false;
  std::optional<double> event_time;
  // Event values at the endpoints of the step that bracketed the sign change.
  double event_value_before = 0.0;
  double event_value_after = 0.0;
  // Scaled local error estimate of each accepted adaptive step (<= 1 by
  // the acceptance criterion); empty for fixed-step integrators.
  std::vector<double> step_error_norms;

  std::vector<double> sample(double t) const {
    if (ts.empty()) throw IntegrationError("sample: empty trajectory");
    if (t <= ts.front()) return ys.front();
    if (t >= ts.back()) return ys.back();
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - ts.begin()) - 1;
    return hermite(i, t);
  }

  std::vector<double> hermite(std::size_t i, double t) const {
    const double h = ts[i + 1] - ts[i];
    const double u = (t - ts[i]) / h;
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1;
    const double h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2;
    const double h11 = u3 - u2;
    std::vector<double> y(ys[i].size());
    for (std::size_t k = 0; k < y.size(); ++k)
      y[k] = h00 * ys[i][k] + h * h10 * derivs[i][k] + h01 * ys[i + 1][k] +
             h * h11 * derivs[i + 1][k];
    return y;
  }
};

namespace detail {

inline void check_finite(const std::vector<double>& y, std::size_t step, double t) {
  for (double v : y)
    if (!std::isfinite(v))
      throw IntegrationError("non-finite state at step " + std::to_string(step) +
                             ", t = " + std::to_string(t));
}

// Dormand-Prince RK5(4)7M coefficients.
struct Dp54 {
  static constexpr double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static constexpr double a2[1] = {1.0 / 5};
  static constexpr double a3[2] = {3.0 / 40, 9.0 / 40};
  static constexpr double a4[3] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
  static constexpr double a5[4] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561,
                                   -212.0 / 729};
  static constexpr double a6[5] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247,
                                   49.0 / 176, -5103.0 / 18656};
  // Fifth-order weights (also the a7 row: first-same-as-last pair).
  static constexpr double b5[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192,
                                   -2187.0 / 6784, 11.0 / 84, 0.0};
  static constexpr double b4[7] = {5179.0 / 57600, 0.0,          7571.0 / 16695,
                                   393.0 / 640,    -92097.0 / 339200,
                                   187.0 / 2100,   1.0 / 40};
};

// One DP54 stage sweep from (t, y) with step h; k1 = f(t, y) supplied.
// Fills k2..k7 and the fifth- and fourth-order solution estimates.
struct Dp54Step {
  std::vector<double> y5;
  std::vector<double> y4;
  std::vector<double> k7;  // rhs at (t + h, y5); next step's k1
};

inline Dp54Step dp54_stages(
    const std::function<std::vector<double>(double, const std::vector<double>&)>& f,
    double t, const std::vector<double>& y, double h, const std::vector<double>& k1) {
  const std::size_t n = y.size();
  auto stage = [&](const double* a, int rows, double cs,
                   const std::vector<std::vector<double>>& ks) {
    std::vector<double> yt(n);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int r = 0; r < rows; ++r) acc += a[r] * ks[r][i];
      yt[i] = y[i] + h * acc;
    }
    return f(t + cs * h, yt);
  };
  std::vector<std::vector<double>> k;
  k.reserve(7);
  k.push_back(k1);
  k.push_back(stage(Dp54::a2, 1, Dp54::c[1], k));
  k.push_back(stage(Dp54::a3, 2, Dp54::c[2], k));
  k.push_back(stage(Dp54::a4, 3, Dp54::c[3], k));
  k.push_back(stage(Dp54::a5, 4, Dp54::c[4], k));
  k.push_back(stage(Dp54::a6, 5, Dp54::c[5], k));

  Dp54Step out;
  out.y5.resize(n);
  out.y4.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s5 = 0.0;
    for (int r = 0; r < 6; ++r) s5 += Dp54::b5[r] * k[r][i];
    out.y5[i] = y[i] + h * s5;
  }
  out.k7 = f(t + h, out.y5);
  for (std::size_t i = 0; i < n; ++i) {
    double s4 = Dp54::b4[6] * out.k7[i];
    for (int r = 0; r < 6; ++r) s4 += Dp54::b4[r] * k[r][i];
    out.y4[i] = y[i] + h * s4;
  }
  return out;
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) stepper with PI step-size control.
/// Exposed as a stream so callers that need to survive mid-path failures
/// (geodesic truncation) can keep the samples accepted so far.
class Rk54Stream {
 public:
  Rk54Stream(IvpProblem problem, double rtol, double atol,
             double max_step = 0.0)
      : p_(std::move(problem)), rtol_(rtol), atol_(atol), max_step_(max_step) {
    if (rtol_ <= 0 || atol_ <= 0) throw DomainError("rk54: tolerances must be positive");
    if (!(p_.t_end > p_.t_start)) throw DomainError("rk54: t_end must exceed t_start");
    if (p_.y0.empty()) throw DomainError("rk54: empty initial state");
    t_ = p_.t_start;
    y_ = p_.y0;
    f_ = p_.rhs(t_, y_);
    if (f_.size() != y_.size()) throw DomainError("rk54: rhs dimension mismatch");
    span_ = p_.t_end - p_.t_start;
    h_ = initial_step();
    if (p_.event) ev_ = p_.event(t_, y_);
  }

  double t() const { return t_; }
  const std::vector<double>& y() const { return y_; }
  const std::vector<double>& deriv() const { return f_; }
  double last_error_norm() const { return last_err_; }
  bool done() const { return done_; }
  bool event_hit() const { return event_hit_; }
  double event_value_before() const { return ev_before_; }
  double event_value_after() const { return ev_after_; }

  /// Advances one accepted step (shortened to land on t_end, or cut at an
  /// event crossing). Returns false once the integration has finished.
  bool step() {
    if (done_) return false;
    std::size_t rejects = 0;
    for (;;) {
      double h = std::min(h_, p_.t_end - t_);
      if (max_step_ > 0.0) h = std::min(h, max_step_);
      if (h < 1e-14 * span_)
        throw IntegrationError("rk54: step size underflow at t = " + std::to_string(t_));

      const auto st = detail::dp54_stages(p_.rhs, t_, y_, h, f_);
      double err = 0.0;
      for (std::size_t i = 0; i < y_.size(); ++i) {
        const double sc = atol_ + rtol_ * std::max(std::abs(y_[i]), std::abs(st.y5[i]));
        const double e = (st.y5[i] - st.y4[i]) / sc;
        err += e * e;
      }
      err = std::sqrt(err / static_cast<double>(y_.size()));

      if (err <= 1.0) {
        detail::check_finite(st.y5, n_steps_, t_ + h);
        const double t_new = t_ + h;
        // PI controller (Hairer): factor from current and previous error.
        const double e_clip = std::max(err, 1e-10);
        double fac = 0.9 * std::pow(e_clip, -0.7 / 5.0) * std::pow(err_old_, 0.4 / 5.0);
        fac = std::clamp(fac, 0.2, 5.0);
        h_ = h * fac;
        err_old_ = e_clip;
        last_err_ = err;

        if (p_.event) {
          const double ev_new = p_.event(t_new, st.y5);
          if (crossed(ev_, ev_new)) {
            locate_event(t_new, st.y5, st.k7, ev_new);
            ++n_steps_;
            return true;
          }
          ev_ = ev_new;
        }
        t_prev_ = t_;
        t_ = t_new;
        y_ = st.y5;
        f_ = st.k7;
        ++n_steps_;
        if (t_ >= p_.t_end - 1e-14 * span_) done_ = true;
        return true;
      }

      // Rejected: shrink and retry.
      h_ = h * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      if (++rejects > 200)
        throw IntegrationError("rk54: persistent step rejection at t = " + std::to_string(t_));
    }
  }

 private:
  static bool crossed(double a, double b) {
    return (a < 0 && b >= 0) || (a > 0 && b <= 0);
  }

  double initial_step() const {
    double ynorm = 0.0, fnorm = 0.0;
    for (std::size_t i = 0; i < y_.size(); ++i) {
      const double sc = atol_ + rtol_ * std::abs(y_[i]);
      ynorm += (y_[i] / sc) * (y_[i] / sc);
      fnorm += (f_[i] / sc) * (f_[i] / sc);
    }
    ynorm = std::sqrt(ynorm / y_.size());
    fnorm = std::sqrt(fnorm / y_.size());
    double h0 = (ynorm < 1e-5 || fnorm < 1e-5) ? 1e-6 : 0.01 * ynorm / fnorm;
    return std::min(h0, span_ / 10.0);
  }

  // Bisects the event function over the bracketing step using cubic
  // Hermite interpolation until |event| <= 1e-10.
  void locate_event(double t_new, const std::vector<double>& y_new,
                    const std::vector<double>& f_new, double ev_new) {
    const double t0 = t_, t1 = t_new;
    const std::vector<double> y0v = y_, f0v = f_;
    auto interp = [&](double tm) {
      const double h = t1 - t0;
      const double u = (tm - t0) / h;
      const double u2 = u * u, u3 = u2 * u;
      std::vector<double> y(y0v.size());
      for (std::size_t k = 0; k < y.size(); ++k)
        y[k] = (2 * u3 - 3 * u2 + 1) * y0v[k] + h * (u3 - 2 * u2 + u) * f0v[k] +
               (-2 * u3 + 3 * u2) * y_new[k] + h * (u3 - u2) * f_new[k];
      return y;
    };
    ev_before_ = ev_;
    ev_after_ = ev_new;
    double lo = t0, hi = t1;
    double ev_lo = ev_;
    double tm = hi;
    std::vector<double> ym = y_new;
    for (int it = 0; it < 200; ++it) {
      tm = 0.5 * (lo + hi);
      ym = interp(tm);
      const double em = p_.event(tm, ym);
      if (std::abs(em) <= 1e-10) break;
      if (crossed(ev_lo, em)) {
        hi = tm;
      } else {
        lo = tm;
        ev_lo = em;
      }
    }
    t_ = tm;
    y_ = ym;
    f_ = p_.rhs(tm, ym);
    event_hit_ = true;
    done_ = true;
  }

  IvpProblem p_;
  double rtol_, atol_, max_step_;
  double t_ = 0.0, t_prev_ = 0.0, span_ = 0.0, h_ = 0.0;
  double err_old_ = 1e-4;
  double last_err_ = 0.0;
  double ev_ = 0.0, ev_before_ = 0.0, ev_after_ = 0.0;
  std::vector<double> y_, f_;
  std::size_t n_steps_ = 0;
  bool done_ = false;
  bool event_hit_ = false;
};

/// Adaptive embedded Runge-Kutta 5(4). Error-per-step criterion
/// |y5 - y4| <= atol + rtol*|y| (RMS-scaled); events localized to
/// |event| <= 1e-10 by bisection on the dense output.
inline Trajectory integrate_rk54(const IvpProblem& problem, double rtol, double atol,
                                 double max_step = 0.0) {
  Rk54Stream s(problem, rtol, atol, max_step);
  Trajectory tr;
  tr.ts.push_back(s.t());
  tr.ys.push_back(s.y());
  tr.derivs.push_back(s.deriv());
  while (s.step()) {
    tr.ts.push_back(s.t());
    tr.ys.push_back(s.y());
    tr.derivs.push_back(s.deriv());
    tr.step_error_norms.push_back(s.last_error_norm());
    if (s.event_hit()) {
      tr.terminated_by_event = true;
      tr.event_time = s.t();
      tr.event_value_before = s.event_value_before();
      tr.event_value_after = s.event_value_after();
      break;
    }
  }
  return tr;
}

/// Classical two-stage Heun scheme with fixed step h; the final partial
/// step is shortened to land on t_end.
inline Trajectory integrate_heun(const IvpProblem& problem, double h) {
  if (h <= 0) throw DomainError("heun: step size must be positive");
  if (!(problem.t_end > problem.t_start))
    throw DomainError("heun: t_end must exceed t_start");
  Trajectory tr;
  double t = problem.t_start;
  std::vector<double> y = problem.y0;
  std::vector<double> f = problem.rhs(t, y);
  if (f.size() != y.size()) throw DomainError("heun: rhs dimension mismatch");
  double ev = problem.event ? problem.event(t, y) : 0.0;
  tr.ts.push_back(t);
  tr.ys.push_back(y);
  tr.derivs.push_back(f);
  std::size_t step = 0;
  const std::size_t n = y.size();
  while (t < problem.t_end - 1e-14 * (problem.t_end - problem.t_start)) {
    const double hs = std::min(h, problem.t_end - t);
    std::vector<double> ypred(n);
    for (std::size_t i = 0; i < n; ++i) ypred[i] = y[i] + hs * f[i];
    const std::vector<double> k2 = problem.rhs(t + hs, ypred);
    std::vector<double> ynew(n);
    for (std::size_t i = 0; i < n; ++i) ynew[i] = y[i] + 0.5 * hs * (f[i] + k2[i]);
    detail::check_finite(ynew, step, t + hs);
    const double t_new = t + hs;
    const std::vector<double> f_new = problem.rhs(t_new, ynew);

    if (problem.event) {
      const double ev_new = problem.event(t_new, ynew);
      if ((ev < 0 && ev_new >= 0) || (ev > 0 && ev_new <= 0)) {
        // Bisection over the bracketing step on the Hermite interpolant.
        double lo = t, hi = t_new, ev_lo = ev;
        double tm = t_new;
        std::vector<double> ym = ynew;
        auto interp = [&](double tq) {
          const double hh = t_new - t;
          const double u = (tq - t) / hh;
          const double u2 = u * u, u3 = u2 * u;
          std::vector<double> out(n);
          for (std::size_t k = 0; k < n; ++k)
            out[k] = (2 * u3 - 3 * u2 + 1) * y[k] + hh * (u3 - 2 * u2 + u) * f[k] +
                     (-2 * u3 + 3 * u2) * ynew[k] + hh * (u3 - u2) * f_new[k];
          return out;
        };
        for (int it = 0; it < 200; ++it) {
          tm = 0.5 * (lo + hi);
          ym = interp(tm);
          const double em = problem.event(tm, ym);
          if (std::abs(em) <= 1e-10) break;
          if ((ev_lo < 0 && em >= 0) || (ev_lo > 0 && em <= 0)) {
            hi = tm;
          } else {
            lo = tm;
            ev_lo = em;
          }
        }
        tr.ts.push_back(tm);
        tr.ys.push_back(ym);
        tr.derivs.push_back(problem.rhs(tm, ym));
        tr.terminated_by_event = true;
        tr.event_time = tm;
        tr.event_value_before = ev;
        tr.event_value_after = ev_new;
        return tr;
      }
      ev = ev_new;
    }

    t = t_new;
    y = ynew;
    f = f_new;
    tr.ts.push_back(t);
    tr.ys.push_back(y);
    tr.derivs.push_back(f);
    ++step;
  }
  return tr;
}

/// Fixed-step fifth-order Dormand-Prince sweep (no error control, no
/// events). Used where the solution must be a smooth function of the
/// problem's parameters, e.g. as the target of finite differencing.
inline Trajectory integrate_dp5_fixed(const IvpProblem& problem, double h) {
  if (h <= 0) throw DomainError("dp5_fixed: step size must be positive");
  if (!(problem.t_end > problem.t_start))
    throw DomainError("dp5_fixed: t_end must exceed t_start");
  Trajectory tr;
  double t = problem.t_start;
  std::vector<double> y = problem.y0;
  std::vector<double> f = problem.rhs(t, y);
  if (f.size() != y.size()) throw DomainError("dp5_fixed: rhs dimension mismatch");
  tr.ts.push_back(t);
  tr.ys.push_back(y);
  tr.derivs.push_back(f);
  std::size_t step = 0;
  while (t < problem.t_end - 1e-14 * (problem.t_end - problem.t_start)) {
    const double hs = std::min(h, problem.t_end - t);
    const auto st = detail::dp54_stages(problem.rhs, t, y, hs, f);
    detail::check_finite(st.y5, step, t + hs);
    t += hs;
    y = st.y5;
    f = st.k7;
    tr.ts.push_back(t);
    tr.ys.push_back(y);
    tr.derivs.push_back(f);
    ++step;
  }
  return tr;
}

}  // namespace infogeo

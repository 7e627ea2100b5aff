#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "infogeo/common.hpp"
#include "infogeo/linalg.hpp"
#include "infogeo/models.hpp"
#include "infogeo/odeint.hpp"
#include "infogeo/rng.hpp"

namespace infogeo {

/// Observations x_i(t_j): per time point a counts[j] x M matrix, column
/// order matching `species`.
struct Dataset {
  std::vector<double> times;
  std::vector<Matrix> observations;
  std::vector<std::string> species;
  std::vector<int> counts;

  void validate() const {
    if (times.empty()) throw DomainError("dataset: empty time vector");
    for (std::size_t j = 1; j < times.size(); ++j)
      if (!(times[j] > times[j - 1]))
        throw DomainError("dataset: times must be strictly increasing");
    if (observations.size() != times.size() || counts.size() != times.size())
      throw DomainError("dataset: per-time structure length mismatch");
    for (std::size_t j = 0; j < times.size(); ++j) {
      if (counts[j] < 1) throw DomainError("dataset: counts must be >= 1");
      if (observations[j].rows() != static_cast<std::size_t>(counts[j]) ||
          observations[j].cols() != species.size())
        throw DomainError("dataset: observation block shape mismatch at time index " +
                          std::to_string(j));
    }
  }

  int total_observations() const {
    return std::accumulate(counts.begin(), counts.end(), 0);
  }
};

struct MleResult {
  ParameterPoint theta_hat;
  double loglik_at_mle = 0.0;
  long iterations = 0;
  bool converged = false;
  // e.g. a parameter pinned at its bound (degenerate data pushes sigma
  // to the lower limit of its open domain).
  std::vector<std::string> warnings;
};

/// Axis-aligned box; entries may be infinite.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  bool contains(const std::vector<double>& x) const {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
  }

  double diagonal() const {
    double d = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) d += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    return std::sqrt(d);
  }
};

/// Box taken from the per-parameter bounds of the spec's inferred names.
inline Box family_box(const ModelSpec& spec) {
  Box b;
  for (const auto& n : spec.inferred) {
    const auto [lo, hi] = parameter_bounds(n);
    b.lo.push_back(lo);
    b.hi.push_back(hi);
  }
  return b;
}

/// Sum over times and replicates of the log normal density of the
/// observations about the model means, all components sharing one
/// constant sigma.
inline double log_likelihood(const ModelSpec& spec, const ParameterPoint& theta,
                             const Dataset& data) {
  data.validate();
  if (data.species != spec.species)
    throw DomainError("log_likelihood: dataset species do not match the model spec");
  const double sigma = spec.sigma_of(theta);
  if (!(sigma > 0)) throw DomainError("log_likelihood: sigma must be positive");
  const ModelOutput out = solve_forward(spec, theta, data.times);
  const double log_norm = -0.5 * std::log(2.0 * 3.14159265358979323846 * sigma * sigma);
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  double ll = 0.0;
  for (std::size_t j = 0; j < data.times.size(); ++j) {
    const Matrix& block = data.observations[j];
    for (std::size_t i = 0; i < block.rows(); ++i)
      for (std::size_t s = 0; s < block.cols(); ++s) {
        const double res = block(i, s) - out.means(j, s);
        ll += log_norm - res * res * inv2s2;
      }
  }
  return ll;
}

inline double normalized_log_likelihood(const ModelSpec& spec,
                                        const ParameterPoint& theta,
                                        const Dataset& data, const MleResult& mle) {
  return log_likelihood(spec, theta, data) - mle.loglik_at_mle;
}

namespace detail {

// Regularized lower incomplete gamma P(a, x): series expansion for
// x < a + 1, Lentz continued fraction otherwise.
inline double gammp(double a, double x) {
  if (x < 0 || a <= 0) throw DomainError("gammp: requires x >= 0, a > 0");
  if (x == 0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, del = 1.0 / a, sum = del;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Continued fraction for Q(a, x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

}  // namespace detail

/// alpha-quantile of the chi-squared distribution with nu degrees of
/// freedom, by bracketed bisection on the regularized incomplete gamma.
inline double chi_squared_quantile(int nu, double alpha) {
  if (nu < 1) throw DomainError("chi_squared_quantile: nu must be >= 1");
  if (!(alpha > 0 && alpha < 1))
    throw DomainError("chi_squared_quantile: alpha must lie in (0, 1)");
  const double a = 0.5 * nu;
  double hi = 2.0 * nu + 10.0;
  while (detail::gammp(a, 0.5 * hi) < alpha) {
    hi *= 2.0;
    if (hi > 1e8) break;
  }
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (detail::gammp(a, 0.5 * mid) < alpha)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-10) break;
  }
  return 0.5 * (lo + hi);
}

/// Wilks level-set value -Delta_{nu,alpha}/2 for the normalised
/// log-likelihood.
inline double confidence_threshold(int nu, double alpha) {
  return -0.5 * chi_squared_quantile(nu, alpha);
}

namespace detail {

struct NmOptions {
  long max_evals = 10000;
  double step_tol = 1e-8;
  int restarts = 2;
};

struct NmOutcome {
  std::vector<double> x;
  double fmax = -std::numeric_limits<double>::infinity();
  long evals = 0;
  bool converged = false;
};

inline void project_into(std::vector<double>& x, const Box& box) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isfinite(box.lo[i])) {
      const double margin =
          std::isfinite(box.hi[i]) ? 1e-12 * (box.hi[i] - box.lo[i]) : 0.0;
      x[i] = std::max(x[i], box.lo[i] + margin);
    }
    if (std::isfinite(box.hi[i])) {
      const double margin =
          std::isfinite(box.lo[i]) ? 1e-12 * (box.hi[i] - box.lo[i]) : 0.0;
      x[i] = std::min(x[i], box.hi[i] - margin);
    }
  }
}

// Nelder-Mead ascent with proposals projected onto the box. Keeps the
// running best monotone; terminates on relative parameter step below
// step_tol or on the evaluation cap.
inline NmOutcome nelder_mead_maximize(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x0, const Box& box, const NmOptions& opt = {}) {
  const std::size_t n = x0.size();
  NmOutcome out;
  long evals = 0;
  bool any_finite = false;

  auto eval = [&](std::vector<double> x) -> std::pair<std::vector<double>, double> {
    project_into(x, box);
    double v;
    try {
      v = f(x);
    } catch (const std::exception&) {
      v = -std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(v)) v = -std::numeric_limits<double>::infinity();
    else any_finite = true;
    ++evals;
    return {std::move(x), v};
  };

  std::vector<std::vector<double>> vx;
  std::vector<double> vf;
  auto init_simplex = [&](const std::vector<double>& center, double scale) {
    vx.clear();
    vf.clear();
    auto [c, fc] = eval(center);
    vx.push_back(c);
    vf.push_back(fc);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> p = c;
      const double step = scale * std::max(std::abs(p[i]), 1e-3);
      p[i] += step;
      auto [q, fq] = eval(p);
      if (q == vx[0]) {  // projection collapsed the vertex; step inward
        q = c;
        q[i] -= step;
        auto r = eval(q);
        q = r.first;
        fq = r.second;
      }
      vx.push_back(q);
      vf.push_back(fq);
    }
  };

  auto order = [&]() {
    std::vector<std::size_t> idx(vx.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return vf[a] > vf[b];
    });
    std::vector<std::vector<double>> nx;
    std::vector<double> nf;
    for (auto i : idx) {
      nx.push_back(vx[i]);
      nf.push_back(vf[i]);
    }
    vx = std::move(nx);
    vf = std::move(nf);
  };

  std::vector<double> best = x0;
  double fbest = -std::numeric_limits<double>::infinity();
  bool converged = false;

  double scale = 0.05;
  for (int round = 0; round <= opt.restarts; ++round) {
    init_simplex(round == 0 ? x0 : best, scale);
    scale *= 0.01;
    while (evals < opt.max_evals) {
      order();
      // Relative simplex extent about the best vertex.
      double ext = 0.0;
      for (std::size_t v = 1; v < vx.size(); ++v)
        for (std::size_t i = 0; i < n; ++i)
          ext = std::max(ext, std::abs(vx[v][i] - vx[0][i]) /
                                  std::max(1.0, std::abs(vx[0][i])));
      if (ext < opt.step_tol) {
        converged = true;
        break;
      }
      std::vector<double> centroid(n, 0.0);
      for (std::size_t v = 0; v < n; ++v)
        for (std::size_t i = 0; i < n; ++i) centroid[i] += vx[v][i] / n;
      auto combine = [&](double coef) {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i)
          p[i] = centroid[i] + coef * (centroid[i] - vx[n][i]);
        return p;
      };
      auto [xr, fr] = eval(combine(1.0));
      if (fr > vf[0]) {
        auto [xe, fe] = eval(combine(2.0));
        if (fe > fr) {
          vx[n] = xe;
          vf[n] = fe;
        } else {
          vx[n] = xr;
          vf[n] = fr;
        }
      } else if (fr > vf[n - 1]) {
        vx[n] = xr;
        vf[n] = fr;
      } else {
        auto [xc, fc] = eval(combine(fr > vf[n] ? 0.5 : -0.5));
        if (fc > std::max(fr, vf[n])) {
          vx[n] = xc;
          vf[n] = fc;
        } else {
          for (std::size_t v = 1; v <= n; ++v) {
            for (std::size_t i = 0; i < n; ++i)
              vx[v][i] = vx[0][i] + 0.5 * (vx[v][i] - vx[0][i]);
            auto e = eval(vx[v]);
            vx[v] = e.first;
            vf[v] = e.second;
          }
        }
      }
    }
    order();
    if (vf[0] > fbest) {
      fbest = vf[0];
      best = vx[0];
    }
    if (evals >= opt.max_evals) break;
  }

  if (!any_finite)
    throw OptimizationError("optimizer: objective non-finite everywhere it looked");
  out.x = best;
  out.fmax = fbest;
  out.evals = evals;
  out.converged = converged;
  return out;
}

}  // namespace detail

struct MleOptions {
  long max_evals = 10000;
  /// Number of Latin-hypercube starting points spread over the box
  /// (requires finite box); 0 keeps the single supplied start.
  int multi_start = 0;
  std::uint64_t multi_start_seed = 20210913;
};

/// Maximum-likelihood estimate by derivative-free bound-constrained
/// ascent from `start` (strictly inside `box`).
inline MleResult mle(const ModelSpec& spec, const Dataset& data,
                     const ParameterPoint& start, const Box& box,
                     const MleOptions& options = {}) {
  spec.validate();
  start.validate();
  if (box.lo.size() != start.values.size() || box.hi.size() != start.values.size())
    throw DomainError("mle: box dimension mismatch");
  for (std::size_t i = 0; i < start.values.size(); ++i)
    if (!(start.values[i] > box.lo[i] && start.values[i] < box.hi[i]))
      throw DomainError("mle: start must be strictly inside the bounds box");

  auto objective = [&](const std::vector<double>& x) {
    ParameterPoint p{spec.inferred, x};
    return log_likelihood(spec, p, data);
  };

  detail::NmOptions nm;
  nm.max_evals = options.max_evals;

  std::vector<std::vector<double>> starts = {start.values};
  if (options.multi_start > 0) {
    // Latin hypercube over the box: one stratum per start per axis.
    const int k = options.multi_start;
    rng::CounterRng gen(options.multi_start_seed);
    std::vector<std::vector<int>> perm(start.values.size());
    for (auto& axis : perm) {
      axis.resize(k);
      std::iota(axis.begin(), axis.end(), 0);
      for (int i = k - 1; i > 0; --i)
        std::swap(axis[i], axis[gen.next_u64() % static_cast<std::uint64_t>(i + 1)]);
    }
    for (int s = 0; s < k; ++s) {
      std::vector<double> x(start.values.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(box.lo[i]) || !std::isfinite(box.hi[i]))
          throw DomainError("mle: multi-start requires a finite box");
        x[i] = box.lo[i] +
               (box.hi[i] - box.lo[i]) * (perm[i][s] + gen.uniform()) / k;
      }
      starts.push_back(std::move(x));
    }
  }

  detail::NmOutcome best;
  long total_evals = 0;
  for (const auto& s : starts) {
    auto o = detail::nelder_mead_maximize(objective, s, box, nm);
    total_evals += o.evals;
    if (o.fmax > best.fmax || best.x.empty()) best = std::move(o);
  }

  MleResult res;
  res.theta_hat = ParameterPoint{spec.inferred, best.x};
  res.loglik_at_mle = best.fmax;
  res.iterations = total_evals;
  res.converged = best.converged;
  for (std::size_t i = 0; i < best.x.size(); ++i) {
    const double span = std::isfinite(box.hi[i]) && std::isfinite(box.lo[i])
                            ? box.hi[i] - box.lo[i]
                            : 1.0;
    if (std::isfinite(box.lo[i]) && best.x[i] <= box.lo[i] + 1e-6 * span)
      res.warnings.push_back("parameter '" + spec.inferred[i] +
                             "' clamped at its lower bound");
    if (std::isfinite(box.hi[i]) && best.x[i] >= box.hi[i] - 1e-6 * span)
      res.warnings.push_back("parameter '" + spec.inferred[i] +
                             "' clamped at its upper bound");
  }
  return res;
}

/// Level curve of the normalised log-likelihood at the Wilks threshold.
/// `closed` is true when the trace returned to its seed; `open_region`
/// means the threshold was never reached along the +theta1 search ray
/// (practical non-identifiability). `reason` is one of "closed",
/// "left-bounds", "no-threshold-crossing", "max-steps".
struct ContourPolyline {
  Matrix points;  // n x 2
  bool closed = false;
  bool open_region = false;
  std::string reason;
};

/// Traces the confidence contour at level alpha: seed by bisection along
/// +theta1 from the MLE, then Heun steps along the rotated gradient with
/// a Newton pull-back onto the level set after every step.
inline ContourPolyline trace_confidence_contour(const ModelSpec& spec,
                                                const Dataset& data,
                                                const MleResult& mleres, double alpha,
                                                const Box& box) {
  const std::size_t nu = spec.inferred.size();
  if (nu != 2) throw DomainError("contour tracing requires two inferred parameters");
  const double delta = chi_squared_quantile(static_cast<int>(nu), alpha);
  const double threshold = -0.5 * delta;

  auto nll = [&](const std::vector<double>& x) {
    ParameterPoint p{spec.inferred, x};
    return log_likelihood(spec, p, data) - mleres.loglik_at_mle;
  };
  auto grad = [&](const std::vector<double>& x) {
    std::vector<double> g(2);
    for (std::size_t i = 0; i < 2; ++i) {
      const double d = 1e-6 * std::max(std::abs(x[i]), 1e-6);
      std::vector<double> up = x, dn = x;
      up[i] += d;
      dn[i] -= d;
      g[i] = (nll(up) - nll(dn)) / (2.0 * d);
    }
    return g;
  };

  ContourPolyline out;
  const std::vector<double> center = mleres.theta_hat.values;

  // Seed: march along +theta1 until the normalised log-likelihood first
  // drops below the threshold, then bisect onto the level set.
  const double s_max = box.hi[0] - center[0];
  double s_lo = 0.0, s_hi = -1.0;
  if (s_max > 0) {
    const int scan = 128;
    double prev = 0.0;
    for (int k = 1; k <= scan; ++k) {
      const double s = s_max * k / scan;
      const double v = nll({center[0] + s, center[1]});
      if (v < threshold) {
        s_lo = prev;
        s_hi = s;
        break;
      }
      prev = s;
    }
  }
  if (s_hi < 0) {
    out.open_region = true;
    out.reason = "no-threshold-crossing";
    return out;
  }
  std::vector<double> seed = center;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (s_lo + s_hi);
    seed = {center[0] + mid, center[1]};
    const double v = nll(seed);
    if (std::abs(v - threshold) <= 1e-8) break;
    if (v < threshold)
      s_hi = mid;
    else
      s_lo = mid;
  }

  const double h = box.diagonal() / 400.0;
  std::vector<std::vector<double>> pts = {seed};
  std::vector<double> x = seed;
  const long max_steps = 10000;
  out.reason = "max-steps";
  for (long step = 0; step < max_steps; ++step) {
    try {
      auto tangent = [&](double, const std::vector<double>& q) {
        const auto g = grad(q);
        const double norm = std::hypot(g[0], g[1]);
        if (!(norm > 0)) throw DomainError("contour: vanishing gradient");
        return std::vector<double>{-g[1] / norm, g[0] / norm};
      };
      IvpProblem prob;
      prob.rhs = tangent;
      prob.y0 = x;
      prob.t_start = 0.0;
      prob.t_end = h;
      x = integrate_heun(prob, h).ys.back();
      // Newton pull-back along the gradient onto the level set.
      for (int it = 0; it < 8; ++it) {
        const double r = nll(x) - threshold;
        if (std::abs(r) <= 1e-9) break;
        const auto g = grad(x);
        const double gg = g[0] * g[0] + g[1] * g[1];
        if (!(gg > 0)) break;
        x[0] -= r * g[0] / gg;
        x[1] -= r * g[1] / gg;
      }
    } catch (const std::exception&) {
      out.reason = "left-bounds";
      break;
    }
    if (!box.contains(x)) {
      out.reason = "left-bounds";
      break;
    }
    pts.push_back(x);
    if (step > 5 && std::hypot(x[0] - seed[0], x[1] - seed[1]) <= h) {
      out.closed = true;
      out.reason = "closed";
      break;
    }
  }

  out.points = Matrix(pts.size(), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.points(i, 0) = pts[i][0];
    out.points(i, 1) = pts[i][1];
  }
  return out;
}

/// Closed-form KL divergence between univariate normals p and q.
inline double kl_divergence_normal(double mu_p, double sigma_p, double mu_q,
                                   double sigma_q) {
  if (!(sigma_p > 0) || !(sigma_q > 0))
    throw DomainError("kl_divergence_normal: standard deviations must be positive");
  const double dm = mu_p - mu_q;
  return std::log(sigma_q / sigma_p) +
         (sigma_p * sigma_p + dm * dm) / (2.0 * sigma_q * sigma_q) - 0.5;
}

/// Monte-Carlo estimate of the same divergence: mean of log p - log q
/// over draws from p. Cross-validates the closed form.
inline double kl_divergence_normal_mc(double mu_p, double sigma_p, double mu_q,
                                      double sigma_q, long n_draws,
                                      std::uint64_t seed) {
  if (!(sigma_p > 0) || !(sigma_q > 0))
    throw DomainError("kl_divergence_normal_mc: standard deviations must be positive");
  if (n_draws < 1) throw DomainError("kl_divergence_normal_mc: n_draws must be >= 1");
  double acc = 0.0;
  for (long i = 0; i < n_draws; ++i) {
    const double x = mu_p + sigma_p * rng::keyed_standard_normal(
                                          seed, static_cast<std::uint64_t>(i), 0, 0);
    const double zp = (x - mu_p) / sigma_p;
    const double zq = (x - mu_q) / sigma_q;
    acc += -std::log(sigma_p) - 0.5 * zp * zp + std::log(sigma_q) + 0.5 * zq * zq;
  }
  return acc / static_cast<double>(n_draws);
}

}  // namespace infogeo

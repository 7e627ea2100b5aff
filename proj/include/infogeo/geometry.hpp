#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "infogeo/common.hpp"
#include "infogeo/likelihood.hpp"
#include "infogeo/linalg.hpp"
#include "infogeo/models.hpp"
#include "infogeo/odeint.hpp"

namespace infogeo {

/// Data design the Fisher metric is built from: observation times,
/// replicate counts per time (per species), and the observed species.
struct Design {
  std::vector<double> times;
  std::vector<int> counts;
  std::vector<std::string> species;
};

/// Rank-3 and rank-4 tensors over an n-dimensional parameter space,
/// stored flat.
struct Tensor3 {
  std::size_t n = 0;
  std::vector<double> data;
  explicit Tensor3(std::size_t dim = 0) : n(dim), data(dim * dim * dim, 0.0) {}
  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data[(i * n + j) * n + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data[(i * n + j) * n + k];
  }
};

struct Tensor4 {
  std::size_t n = 0;
  std::vector<double> data;
  explicit Tensor4(std::size_t dim = 0) : n(dim), data(dim * dim * dim * dim, 0.0) {}
  double& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return data[((i * n + j) * n + k) * n + l];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return data[((i * n + j) * n + k) * n + l];
  }
};

/// Fisher information of the observation process alone: a diagonal
/// matrix with one entry N_j/sigma^2 per mean output (time-major,
/// species-minor) and, when sigma is inferred, one trailing entry
/// 2*sum(N_j)*M/sigma^2 carrying the pooled information about sigma.
inline Matrix observation_fim(double sigma, const std::vector<int>& counts,
                              std::size_t species_count, bool sigma_inferred) {
  if (!(sigma > 0)) throw DomainError("observation_fim: sigma must be positive");
  if (species_count < 1) throw DomainError("observation_fim: species_count must be >= 1");
  long total = 0;
  for (int n : counts) {
    if (n < 1) throw DomainError("observation_fim: counts must be >= 1");
    total += n;
  }
  const double inv_s2 = 1.0 / (sigma * sigma);
  const std::size_t mean_entries = counts.size() * species_count;
  Matrix fim(mean_entries + (sigma_inferred ? 1 : 0),
             mean_entries + (sigma_inferred ? 1 : 0));
  for (std::size_t j = 0; j < counts.size(); ++j)
    for (std::size_t s = 0; s < species_count; ++s) {
      const std::size_t idx = j * species_count + s;
      fim(idx, idx) = counts[j] * inv_s2;
    }
  if (sigma_inferred)
    fim(mean_entries, mean_entries) =
        2.0 * static_cast<double>(total) * static_cast<double>(species_count) * inv_s2;
  return fim;
}

/// Fisher information metric J^T O J, symmetrized. May be singular
/// (e.g. one time point, two mean parameters); validity is enforced by
/// MetricField, not here.
inline Matrix fisher_metric(const ModelSpec& spec, const Design& design,
                            const ParameterPoint& theta) {
  if (design.counts.size() != design.times.size())
    throw DomainError("fisher_metric: counts/times length mismatch");
  if (design.species != spec.species)
    throw DomainError("fisher_metric: design species do not match the model spec");
  const Matrix jac = model_jacobian(spec, theta, design.times);
  const Matrix obs = observation_fim(spec.sigma_of(theta), design.counts,
                                     spec.species.size(), spec.sigma_inferred());
  Matrix g = transpose(jac) * (obs * jac);
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = i + 1; j < g.cols(); ++j) {
      const double v = 0.5 * (g(i, j) + g(j, i));
      g(i, j) = v;
      g(j, i) = v;
    }
  return g;
}

/// A field theta -> G(theta). Calling it validates the result: the point
/// must lie inside `box`, and G must be positive definite with condition
/// number at most `condition_limit`. Failures throw rather than
/// regularize.
struct MetricField {
  std::function<Matrix(const std::vector<double>&)> evaluate;
  double fd_step = 1e-4;
  Box box;
  double condition_limit = 1e12;

  Matrix operator()(const std::vector<double>& theta) const {
    if (!box.lo.empty() && !box.contains(theta))
      throw DomainError("metric: point outside the parameter domain");
    const Matrix g = evaluate(theta);
    const auto ev = symmetric_eigenvalues(g);
    if (!(ev.front() > 0))
      throw SingularMetricError("metric not positive definite (min eigenvalue " +
                                std::to_string(ev.front()) + ")");
    if (ev.back() / ev.front() > condition_limit)
      throw SingularMetricError("metric condition number exceeds " +
                                std::to_string(condition_limit));
    return g;
  }

  double step_for(double coordinate) const {
    return std::max(fd_step * std::abs(coordinate), 1e-7);
  }
};

/// Fisher metric field over the spec's inferred parameters. `box`
/// defaults to the per-parameter bounds.
inline MetricField fisher_metric_field(const ModelSpec& spec, const Design& design,
                                       Box box = {}) {
  spec.validate();
  if (box.lo.empty()) box = family_box(spec);
  MetricField field;
  field.box = box;
  field.evaluate = [spec, design](const std::vector<double>& theta) {
    return fisher_metric(spec, design, ParameterPoint{spec.inferred, theta});
  };
  return field;
}

namespace detail {

// Central differences of the metric in every coordinate direction.
inline std::vector<Matrix> metric_partials(const MetricField& metric,
                                           const std::vector<double>& theta) {
  const std::size_t n = theta.size();
  std::vector<Matrix> dg;
  dg.reserve(n);
  for (std::size_t l = 0; l < n; ++l) {
    const double d = metric.step_for(theta[l]);
    std::vector<double> up = theta, dn = theta;
    up[l] += d;
    dn[l] -= d;
    const Matrix gp = metric(up);
    const Matrix gm = metric(dn);
    dg.push_back((1.0 / (2.0 * d)) * (gp - gm));
  }
  return dg;
}

inline Tensor3 christoffel_from(const Matrix& g_inv, const std::vector<Matrix>& dg) {
  const std::size_t n = g_inv.rows();
  Tensor3 gamma(n);
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t l = 0; l < n; ++l)
          acc += g_inv(m, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
        gamma(m, i, j) = 0.5 * acc;
        gamma(m, j, i) = gamma(m, i, j);
      }
  return gamma;
}

// First-kind symbols with the lowered index first: L(c,a,b) = g_cm G^m_ab.
inline Tensor3 lowered_christoffel(const MetricField& metric,
                                   const std::vector<double>& theta) {
  const Matrix g = metric(theta);
  const Tensor3 gamma = christoffel_from(inverse(g), metric_partials(metric, theta));
  const std::size_t n = g.rows();
  Tensor3 low(n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        double acc = 0.0;
        for (std::size_t m = 0; m < n; ++m) acc += g(c, m) * gamma(m, a, b);
        low(c, a, b) = acc;
      }
  return low;
}

}  // namespace detail

/// Christoffel symbols of the second kind, metric partials by central
/// differences with the field's relative step.
inline Tensor3 christoffel(const MetricField& metric, const std::vector<double>& theta) {
  const Matrix g = metric(theta);
  return detail::christoffel_from(inverse(g), detail::metric_partials(metric, theta));
}

/// Riemann tensor of the first kind. Assembled from first-kind
/// Christoffel values and their central-difference derivatives; the
/// index convention is fixed by the normal-family benchmark
/// R_1212 = -1/sigma^4 (equivalently Sc = 2 R_1212 / det G on a
/// 2-manifold).
inline Tensor4 riemann_tensor(const MetricField& metric,
                              const std::vector<double>& theta) {
  const std::size_t n = theta.size();
  const Matrix g = metric(theta);
  const Tensor3 gamma = detail::christoffel_from(inverse(g),
                                                 detail::metric_partials(metric, theta));
  Tensor3 low(n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        double acc = 0.0;
        for (std::size_t m = 0; m < n; ++m) acc += g(c, m) * gamma(m, a, b);
        low(c, a, b) = acc;
      }

  // dlow[k] = d(lowered Christoffel)/d theta_k, central differences.
  std::vector<Tensor3> dlow;
  dlow.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double d = metric.step_for(theta[k]);
    std::vector<double> up = theta, dn = theta;
    up[k] += d;
    dn[k] -= d;
    const Tensor3 lp = detail::lowered_christoffel(metric, up);
    const Tensor3 lm = detail::lowered_christoffel(metric, dn);
    Tensor3 dl(n);
    for (std::size_t i = 0; i < dl.data.size(); ++i)
      dl.data[i] = (lp.data[i] - lm.data[i]) / (2.0 * d);
    dlow.push_back(std::move(dl));
  }

  Tensor4 riem(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
          double quad = 0.0;
          for (std::size_t r = 0; r < n; ++r)
            quad += low(r, i, l) * gamma(r, j, k) - low(r, i, k) * gamma(r, j, l);
          riem(i, j, k, l) = dlow[k](i, j, l) - dlow[l](i, j, k) + quad;
        }
  return riem;
}

/// Ricci tensor: contraction of the Riemann tensor with the inverse
/// metric over the first and third slots.
inline Matrix ricci_tensor(const MetricField& metric, const std::vector<double>& theta) {
  const std::size_t n = theta.size();
  const Matrix g_inv = inverse(metric(theta));
  const Tensor4 riem = riemann_tensor(metric, theta);
  Matrix ric(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) acc += g_inv(k, l) * riem(k, i, l, j);
      ric(i, j) = acc;
    }
  return ric;
}

/// Scalar curvature Sc = g^{ij} R_ij.
inline double scalar_curvature(const MetricField& metric,
                               const std::vector<double>& theta) {
  const std::size_t n = theta.size();
  const Matrix g_inv = inverse(metric(theta));
  const Matrix ric = ricci_tensor(metric, theta);
  double sc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sc += g_inv(i, j) * ric(i, j);
  return sc;
}

/// All curvature objects at one point, sharing intermediate work.
struct TensorAtPoint {
  Tensor3 christoffel2;
  Tensor4 riemann1;
  Matrix ricci;
  double scalar = 0.0;
};

inline TensorAtPoint curvature_bundle(const MetricField& metric,
                                      const std::vector<double>& theta) {
  TensorAtPoint out;
  out.christoffel2 = christoffel(metric, theta);
  out.riemann1 = riemann_tensor(metric, theta);
  const std::size_t n = theta.size();
  const Matrix g_inv = inverse(metric(theta));
  out.ricci = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) acc += g_inv(k, l) * out.riemann1(k, i, l, j);
      out.ricci(i, j) = acc;
    }
  out.scalar = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.scalar += g_inv(i, j) * out.ricci(i, j);
  return out;
}

/// Geodesic sampled at the integrator's accepted steps. `ts` is the
/// curve parameter, equal to arc length for the unit-speed launches
/// produced by geodesic_shoot. When `truncated`, the curve stops at the
/// last valid sample and `truncation_reason` says why.
struct GeodesicCurve {
  std::vector<double> ts;
  Matrix params;      // samples x nu
  Matrix velocities;  // samples x nu
  double target_length = 0.0;
  bool truncated = false;
  std::string truncation_reason;
};

/// Shoots a geodesic from `origin` in the Euclidean direction `angle`,
/// rescaled to unit metric speed, and integrates theta'' = -Gamma theta'
/// theta' until the accumulated arc length reaches `target_length`
/// (event-stopped, so the length invariant holds by construction).
inline GeodesicCurve geodesic_shoot(const MetricField& metric,
                                    const std::vector<double>& origin, double angle,
                                    double target_length) {
  if (origin.size() != 2)
    throw DomainError("geodesic_shoot: direction angles require a 2-d manifold");
  if (!(target_length > 0))
    throw DomainError("geodesic_shoot: target_length must be positive");
  const Matrix g0 = metric(origin);
  std::vector<double> v = {std::cos(angle), std::sin(angle)};
  double speed2 = 0.0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) speed2 += v[i] * g0(i, j) * v[j];
  const double scale = 1.0 / std::sqrt(speed2);
  for (double& vi : v) vi *= scale;

  // State: (theta_0, theta_1, v_0, v_1, s) with s the accumulated length.
  IvpProblem prob;
  prob.y0 = {origin[0], origin[1], v[0], v[1], 0.0};
  prob.t_start = 0.0;
  prob.t_end = 2.0 * target_length + 1e-3;
  prob.rhs = [&metric](double, const std::vector<double>& z) {
    const std::vector<double> theta = {z[0], z[1]};
    const std::vector<double> vel = {z[2], z[3]};
    const Matrix g = metric(theta);  // shared by the symbols and the speed
    const Tensor3 gamma = detail::christoffel_from(
        inverse(g), detail::metric_partials(metric, theta));
    std::vector<double> dz(5);
    dz[0] = vel[0];
    dz[1] = vel[1];
    for (std::size_t m = 0; m < 2; ++m) {
      double acc = 0.0;
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) acc += gamma(m, i, j) * vel[i] * vel[j];
      dz[2 + m] = -acc;
    }
    double sp2 = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) sp2 += vel[i] * g(i, j) * vel[j];
    dz[4] = std::sqrt(std::max(sp2, 0.0));
    return dz;
  };
  prob.event = [target_length](double, const std::vector<double>& z) {
    return z[4] - target_length;
  };

  GeodesicCurve curve;
  curve.target_length = target_length;
  std::vector<std::vector<double>> samples;
  try {
    Rk54Stream stream(prob, 1e-8, 1e-10, target_length / 64.0);
    samples.push_back({stream.t(), stream.y()[0], stream.y()[1], stream.y()[2],
                       stream.y()[3]});
    bool hit = false;
    while (stream.step()) {
      samples.push_back({stream.t(), stream.y()[0], stream.y()[1], stream.y()[2],
                         stream.y()[3]});
      if (stream.event_hit()) {
        hit = true;
        break;
      }
    }
    if (!hit) {
      curve.truncated = true;
      curve.truncation_reason = "target length not reached";
    }
  } catch (const SingularMetricError& e) {
    curve.truncated = true;
    curve.truncation_reason = std::string("metric failure: ") + e.what();
  } catch (const DomainError& e) {
    curve.truncated = true;
    curve.truncation_reason = std::string("left parameter domain: ") + e.what();
  }

  curve.ts.resize(samples.size());
  curve.params = Matrix(samples.size(), 2);
  curve.velocities = Matrix(samples.size(), 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    curve.ts[i] = samples[i][0];
    curve.params(i, 0) = samples[i][1];
    curve.params(i, 1) = samples[i][2];
    curve.velocities(i, 0) = samples[i][3];
    curve.velocities(i, 1) = samples[i][4];
  }
  return curve;
}

/// Length of a sampled curve: composite Simpson (non-uniform pairs) over
/// sqrt(v^T G v) at the samples. Monotone decreasing sample times
/// integrate to the same length.
inline double curve_length(const MetricField& metric, const GeodesicCurve& curve) {
  const std::size_t n = curve.ts.size();
  if (n < 2) throw DomainError("curve_length: need at least two samples");
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> theta = {curve.params(i, 0), curve.params(i, 1)};
    const std::vector<double> vel = {curve.velocities(i, 0), curve.velocities(i, 1)};
    const Matrix g = metric(theta);
    double sp2 = 0.0;
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) sp2 += vel[a] * g(a, b) * vel[b];
    if (sp2 < 0) throw DomainError("curve_length: indefinite metric at a sample");
    f[i] = std::sqrt(sp2);
  }
  double total = 0.0;
  std::size_t i = 0;
  const std::size_t intervals = n - 1;
  if (intervals % 2 == 1) {  // odd interval count: open with a trapezoid
    total += 0.5 * (curve.ts[1] - curve.ts[0]) * (f[0] + f[1]);
    i = 1;
  }
  for (; i + 2 < n; i += 2) {
    const double h0 = curve.ts[i + 1] - curve.ts[i];
    const double h1 = curve.ts[i + 2] - curve.ts[i + 1];
    const double hs = h0 + h1;
    // Quadratic through the three nodes (non-uniform Simpson).
    total += hs / 6.0 *
             ((2.0 - h1 / h0) * f[i] + (hs * hs / (h0 * h1)) * f[i + 1] +
              (2.0 - h0 / h1) * f[i + 2]);
  }
  return std::abs(total);
}

}  // namespace infogeo

#pragma once

// Ground-truth computations that do not go through the sampler's code path:
// closed-form conditional Gaussian moments, brute-force hit times, 1-D
// occupancy quadrature and a slab-rejection sampler.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "ehmc/linalg.hpp"
#include "ehmc/model.hpp"
#include "ehmc/rng.hpp"

namespace ehmc::oracle {

struct ConditionalMoments {
  Vec m;  // conditional mean
  Mat V;  // conditional covariance, rank n - d
};

// Moments of N(mu, Sigma) conditioned on A'x = y_eq (note: no sign flip; the
// sampler's pieces A'x + y = 0 correspond to y_eq = -y).
inline ConditionalMoments conditional_gaussian_moments(const Vec& mu, const Mat& Sigma, const Mat& A,
                                                       const Vec& y_eq) {
  const auto n = A.rows();
  const auto d = A.cols();
  Eigen::HouseholderQR<Mat> qr(A);
  const Mat Q = qr.householderQ() * Mat::Identity(n, n);
  const Mat Q1 = Q.leftCols(d);
  const Mat Q2 = Q.rightCols(n - d);

  const Mat AtQ1 = A.transpose() * Q1;
  Eigen::FullPivLU<Mat> lu(AtQ1);
  if (!lu.isInvertible()) throw Error("conditional_gaussian_moments: A'Q1 is singular");
  const Vec z1 = lu.solve(y_eq);

  const Vec mu_t = Q.transpose() * mu;
  const Mat sigma_t = Q.transpose() * Sigma * Q;
  const Mat s11 = sigma_t.topLeftCorner(d, d);
  const Mat s21 = sigma_t.bottomLeftCorner(n - d, d);
  const Mat s22 = sigma_t.bottomRightCorner(n - d, n - d);
  // Regression coefficient Sigma21 Sigma11^{-1}.
  const Mat coef = s11.ldlt().solve(s21.transpose()).transpose();

  ConditionalMoments out;
  out.m = Q1 * z1 + Q2 * (mu_t.tail(n - d) + coef * (z1 - mu_t.head(d)));
  const Mat v_t = s22 - coef * s11 * coef.transpose();
  out.V = Q2 * v_t * Q2.transpose();
  return out;
}

// First exiting crossing of K(t) = f'x(t) + g on a uniform grid over [0, t_max],
// refined by bisection to 1e-10.
inline std::optional<double> grid_hit_time(const Vec& x_p, const Vec& a, const Vec& b, const Vec& f,
                                           double g, double t_max, long grid_n = 20000) {
  const double c0 = f.dot(x_p) + g;
  const double ca = f.dot(a);
  const double cb = f.dot(b);
  auto K = [&](double t) { return c0 + ca * std::sin(t) + cb * std::cos(t); };

  // Values within roundoff of zero count as zero so a crossing landing exactly
  // on a grid point (t_max included) is not lost.
  const double zero = 1e-13 * (std::abs(c0) + std::abs(ca) + std::abs(cb));
  const double step = t_max / static_cast<double>(grid_n);
  double prev_t = 0.0;
  double prev_k = K(0.0);
  for (long i = 1; i <= grid_n; ++i) {
    const double t = i == grid_n ? t_max : step * static_cast<double>(i);
    const double k = K(t);
    if (prev_k > zero && k <= zero) {
      double lo = prev_t;
      double hi = t;
      while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (K(mid) > zero) lo = mid; else hi = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev_t = t;
    prev_k = k;
  }
  return std::nullopt;
}

// V(x) = 1/2 curvature x^2 - linear x + offset on the real line.
struct LinePotential {
  double curvature = 1.0;
  double linear = 0.0;
  double offset = 0.0;

  [[nodiscard]] double operator()(double x) const {
    return 0.5 * curvature * x * x - linear * x + offset;
  }
};

// Probability of the region x >= split under the density proportional to
// exp(-upper) on [split, inf) and exp(-lower) on (-inf, split].
inline double occupancy_quadrature_line(const LinePotential& upper, const LinePotential& lower,
                                        double split = 0.0) {
  boost::math::quadrature::exp_sinh<double> integrator;
  const double tol = 1e-10;
  double mass_upper = 0.0;
  double mass_lower = 0.0;
  try {
    mass_upper = integrator.integrate([&](double x) { return std::exp(-upper(x)); }, split,
                                      std::numeric_limits<double>::infinity(), tol);
    mass_lower = integrator.integrate([&](double x) { return std::exp(-lower(x)); },
                                      -std::numeric_limits<double>::infinity(), split, tol);
  } catch (const std::exception& e) {
    throw Error(std::string("occupancy_quadrature_line: integration failed: ") + e.what());
  }
  const double total = mass_upper + mass_lower;
  if (!std::isfinite(mass_upper) || !std::isfinite(mass_lower) || !(total > 0.0)) {
    throw Error("occupancy_quadrature_line: non-finite or zero mass");
  }
  return mass_upper / total;
}

struct SlabSample {
  Mat points;  // kept points, one per row
  std::vector<int> regions;
  long proposals = 0;

  [[nodiscard]] double acceptance_rate() const {
    return proposals == 0 ? 0.0 : static_cast<double>(points.rows()) / static_cast<double>(proposals);
  }
};

// Draws from the unconstrained piecewise density sum_j exp(-V_j) 1[x in R_j]
// and keeps points whose constraint residual satisfies ||ell_j(x)||_inf < delta.
// Component j is proposed with probability proportional to its full-space
// Gaussian mass and accepted when the draw lands in R_j, which targets the
// piecewise density exactly. Coarse check only; the slab has width delta.
inline SlabSample slab_rejection_sample(const ModelSpec& spec, double delta, long count, Rng& rng,
                                        double min_rate = 1e-6) {
  if (!(delta > 0.0)) throw Error("slab_rejection_sample: empty slab (delta must be positive)");
  const int J = spec.num_regions;

  std::vector<Vec> means;
  std::vector<Mat> chol_upper;  // M = U'U, x = mu + U^{-1} z
  std::vector<double> log_mass;
  for (int j = 0; j < J; ++j) {
    Eigen::LLT<Mat> llt(spec.M[j]);
    if (llt.info() != Eigen::Success) throw Error("slab_rejection_sample: M not positive definite");
    const Vec mu = spec.mean_flag ? spec.r[j] : Vec(llt.solve(spec.r[j]));
    const Mat U = llt.matrixU();
    const double log_det = 2.0 * U.diagonal().array().log().sum();
    log_mass.push_back(-spec.k[j] + 0.5 * mu.dot(spec.M[j] * mu) - 0.5 * log_det);
    means.push_back(mu);
    chol_upper.push_back(U);
  }
  const double top = *std::max_element(log_mass.begin(), log_mass.end());
  std::vector<double> weights;
  for (double lm : log_mass) weights.push_back(std::exp(lm - top));

  std::vector<Vec> kept;
  SlabSample out;
  while (static_cast<long>(kept.size()) < count) {
    ++out.proposals;
    const auto j = static_cast<int>(rng.categorical(weights));
    const Vec z = rng.normal_vector(spec.n);
    const Vec x = means[j] + chol_upper[j].triangularView<Eigen::Upper>().solve(z);
    bool inside = true;
    for (int i = 0; i < spec.num_hyperplanes && inside; ++i) {
      const int code = spec.L(j, i);
      if (code == 0) continue;
      const double v = spec.F.row(i).dot(x) + spec.g[i];
      if ((code > 0 ? v : -v) < 0.0) inside = false;
    }
    if (inside && ell(spec, j, x).cwiseAbs().maxCoeff() < delta) {
      kept.push_back(x);
      out.regions.push_back(j);
    }
    if (out.proposals >= 1'000'000 &&
        static_cast<double>(kept.size()) < min_rate * static_cast<double>(out.proposals)) {
      throw Error("slab_rejection_sample: acceptance rate below " + std::to_string(min_rate) +
                  " after " + std::to_string(out.proposals) + " proposals");
    }
  }
  out.points.resize(static_cast<Eigen::Index>(kept.size()), spec.n);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    out.points.row(static_cast<Eigen::Index>(i)) = kept[i].transpose();
  }
  return out;
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, k = 0;
  double stat = 0.0;
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  while (i < a.size() && k < b.size()) {
    const double v = std::min(a[i], b[k]);
    while (i < a.size() && a[i] <= v) ++i;
    while (k < b.size() && b[k] <= v) ++k;
    stat = std::max(stat, std::abs(static_cast<double>(i) / na - static_cast<double>(k) / nb));
  }
  return stat;
}

// One-sample KS statistic against a continuous CDF.
inline double ks_statistic(std::vector<double> a, const std::function<double(double)>& cdf) {
  std::sort(a.begin(), a.end());
  const auto n = static_cast<double>(a.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double c = cdf(a[i]);
    stat = std::max({stat, static_cast<double>(i + 1) / n - c, c - static_cast<double>(i) / n});
  }
  return stat;
}

}  // namespace ehmc::oracle

#pragma once

// QR / null-space constructions: per-region oscillator parameters, in-manifold
// boundary normals, trajectory coefficients and the continuity machinery for
// neighbouring affine pieces.

#include <optional>
#include <string>
#include <vector>

#include "ehmc/linalg.hpp"
#include "ehmc/model.hpp"
#include "ehmc/rng.hpp"

namespace ehmc {

// Oscillator parameters of one region restricted to its constraint plane
// A'x + y = 0. Inside the region x(t) = x_p + a sin t + b cos t.
struct RegionDynamics {
  Vec x_p;  // centre of oscillation, lies on the plane
  Mat Q;    // n x n, first d columns span col(A)
  Mat S;    // n x (n-d), S S' = Q2 (Q2' M Q2)^{-1} Q2'
  Mat R1;   // d x d upper triangular, A = Q1 R1
  Mat omega22;  // Q2' M Q2
  int d = 0;

  [[nodiscard]] auto q1() const { return Q.leftCols(d); }
  [[nodiscard]] auto q2() const { return Q.rightCols(Q.cols() - d); }
  [[nodiscard]] int n() const { return static_cast<int>(Q.rows()); }
};

inline RegionDynamics ode_param(const Mat& M, const Vec& r, const Mat& A, const Vec& y,
                                bool mean_flag) {
  const auto n = A.rows();
  const auto d = A.cols();
  if (M.rows() != n || M.cols() != n || r.size() != n || y.size() != d) {
    throw ContractError("ode_param: inconsistent dimensions");
  }
  auto qr = complete_qr(A);
  RegionDynamics dyn;
  dyn.d = static_cast<int>(d);
  dyn.Q = std::move(qr.q);
  dyn.R1 = std::move(qr.r_top);

  const Mat q2 = dyn.Q.rightCols(n - d);
  dyn.omega22 = symmetrize(q2.transpose() * M * q2);
  Eigen::LLT<Mat> chol(dyn.omega22);
  if (chol.info() != Eigen::Success) {
    throw FactorizationError("ode_param: Q2' M Q2 is not positive definite");
  }
  // Omega22 = U'U with U upper; U'S' = Q2'.
  const Mat U = chol.matrixU();
  dyn.S = U.transpose().triangularView<Eigen::Lower>().solve(q2.transpose()).transpose();

  const Vec z1 = solve_upper_transposed(dyn.R1, -y);  // R1' z1 + y = 0
  const Vec x1 = dyn.Q.leftCols(d) * z1;
  const Vec r_tilde = mean_flag ? Vec(M * (r - x1)) : Vec(r - M * x1);
  dyn.x_p = dyn.S * (dyn.S.transpose() * r_tilde) + x1;
  return dyn;
}

// Specialisation for M = phi * I with mean mu.
inline RegionDynamics isotropic_ode_param(double phi, const Vec& mu, const Mat& A, const Vec& y) {
  if (!(phi > 0.0)) throw ContractError("isotropic_ode_param: phi must be positive");
  const auto n = A.rows();
  const auto d = A.cols();
  if (mu.size() != n || y.size() != d) {
    throw ContractError("isotropic_ode_param: inconsistent dimensions");
  }
  auto qr = complete_qr(A);
  RegionDynamics dyn;
  dyn.d = static_cast<int>(d);
  dyn.Q = std::move(qr.q);
  dyn.R1 = std::move(qr.r_top);
  dyn.omega22 = phi * Mat::Identity(n - d, n - d);
  dyn.S = dyn.Q.rightCols(n - d) / std::sqrt(phi);
  const Vec z1 = solve_upper_transposed(dyn.R1, -y);
  const Vec x1 = dyn.Q.leftCols(d) * z1;
  const Vec r_tilde = phi * (mu - x1);
  dyn.x_p = dyn.S * (dyn.S.transpose() * r_tilde) + x1;
  return dyn;
}

// Per-region memo of dynamics and sign-adjusted boundaries. Not synchronised:
// confine one cache to one chain.
class RegionCache {
 public:
  explicit RegionCache(const ModelSpec& spec)
      : dynamics_(static_cast<std::size_t>(spec.num_regions)),
        boundaries_(static_cast<std::size_t>(spec.num_regions)) {}

  [[nodiscard]] bool has_dynamics(int j) const { return dynamics_.at(static_cast<std::size_t>(j)).has_value(); }

  const RegionDynamics& dynamics(int j, const ModelSpec& spec) {
    auto& slot = dynamics_.at(static_cast<std::size_t>(j));
    if (!slot) slot = ode_param(spec.M[j], spec.r[j], spec.A[j], spec.y[j], spec.mean_flag);
    return *slot;
  }

  const RegionBoundary& boundary(int j, const ModelSpec& spec) {
    auto& slot = boundaries_.at(static_cast<std::size_t>(j));
    if (!slot) slot = region_boundaries(spec, j);
    return *slot;
  }

  void clear() {
    for (auto& s : dynamics_) s.reset();
    for (auto& s : boundaries_) s.reset();
  }

 private:
  std::vector<std::optional<RegionDynamics>> dynamics_;
  std::vector<std::optional<RegionBoundary>> boundaries_;
};

inline const RegionDynamics& get_ode_param_cached(int j, RegionCache& cache, const ModelSpec& spec) {
  detail::check_region_index(spec, j);
  return cache.dynamics(j, spec);
}

inline constexpr double kDegenerateNormal = 1e-12;

// Unit normal to the face f'x + g = 0 within the plane spanned by Q2. Points
// to the side where f'x + g grows.
inline Vec boundary_normal(const Vec& f, const Mat& Q, int d) {
  const auto q1 = Q.leftCols(d);
  const Vec resid = f - q1 * (q1.transpose() * f);
  const double norm = resid.norm();
  if (norm < kDegenerateNormal) {
    throw FactorizationError("boundary_normal: face normal lies in the column space of A "
                             "(residual " + std::to_string(norm) + ")");
  }
  return resid / norm;
}

struct OdeCoefficients {
  Vec a;  // initial velocity
  Vec b;  // initial displacement from x_p
};

inline constexpr double kManifoldTol = 1e-8;

namespace detail {

inline Vec displacement_on_plane(const RegionDynamics& dyn, const Vec& x0) {
  Vec b = x0 - dyn.x_p;
  // ||A'x0 + y|| = ||R1' Q1' (x0 - x_p)|| because x_p is on the plane.
  const double resid = (dyn.R1.transpose() * (dyn.q1().transpose() * b)).norm();
  if (resid > kManifoldTol * std::max(1.0, x0.norm())) {
    throw ContractError("ode_coef: x0 is off the constraint plane (residual " +
                        std::to_string(resid) + ")");
  }
  return b;
}

}  // namespace detail

// b = x0 - x_p with a supplied tangent velocity a = xdot0.
inline OdeCoefficients ode_coef(const RegionDynamics& dyn, const Vec& x0, const Vec& xdot0) {
  OdeCoefficients out;
  out.b = detail::displacement_on_plane(dyn, x0);
  const double normal_part = (dyn.q1().transpose() * xdot0).norm();
  if (normal_part > kManifoldTol * std::max(1.0, xdot0.norm())) {
    throw ContractError("ode_coef: velocity not tangent to the plane (normal component " +
                        std::to_string(normal_part) + ")");
  }
  out.a = xdot0;
  return out;
}

// b = x0 - x_p with a fresh velocity a = S eps, eps ~ N(0, I_{n-d}).
inline OdeCoefficients ode_coef(const RegionDynamics& dyn, const Vec& x0, Rng& rng) {
  OdeCoefficients out;
  out.b = detail::displacement_on_plane(dyn, x0);
  out.a = dyn.S * rng.normal_vector(dyn.S.cols());
  return out;
}

inline OdeCoefficients ode_coef(const RegionDynamics& dyn, const Vec& x0,
                                const std::optional<Vec>& xdot0, Rng& rng) {
  return xdot0 ? ode_coef(dyn, x0, *xdot0) : ode_coef(dyn, x0, rng);
}

struct ContinuityResult {
  bool ok = false;
  double e1 = 0.0;  // mismatch of the two pieces at a point of the shared face
  double e2 = 0.0;  // ||A2' Q0||: shared directions missing from null(A2')
};

// Checks that A1'x + y1 and A2'x + y2 agree on the face f'x + g = 0.
inline ContinuityResult continuity_check(const Vec& f, double g, const Mat& A1, const Mat& A2,
                                         const Vec& y1, const Vec& y2, double tol = 1e-8) {
  const auto n = A1.rows();
  const auto d = A1.cols();
  Mat B1(n, d + 1);
  B1 << A1, f;
  const auto qr = complete_qr(B1);
  const auto q1 = qr.q.leftCols(d + 1);
  const auto q0 = qr.q.rightCols(n - d - 1);
  Vec rhs(d + 1);
  rhs << -y1, -g;
  const Vec z1 = solve_upper_transposed(qr.r_top, rhs);
  ContinuityResult out;
  out.e1 = (A2.transpose() * (q1 * z1) + y2).norm();
  out.e2 = q0.cols() == 0 ? 0.0 : (A2.transpose() * q0).norm();
  out.ok = out.e1 < tol && out.e2 < tol;
  return out;
}

struct NullSpaceDecomposition {
  Mat U0;  // shared basis of null(A1') and null(A2')
  Vec u1;  // completes null(A1'), f'u1 > 0
  Vec u2;  // completes null(A2'), f'u2 < 0
  Mat Uc;  // orthonormal basis of the remaining directions
};

inline NullSpaceDecomposition null_space_decomposition(const Mat& A1, const Mat& A2, const Vec& f) {
  const auto n = A1.rows();
  const auto d = A1.cols();
  NullSpaceDecomposition out;
  Mat B1(n, d + 1);
  B1 << A1, f;
  out.U0 = complete_qr(B1).q.rightCols(n - d - 1);
  out.u1 = boundary_normal(f, complete_qr(A1).q, static_cast<int>(d));
  out.u2 = -boundary_normal(f, complete_qr(A2).q, static_cast<int>(d));

  Mat span(n, out.U0.cols() + 2);
  span << out.U0, out.u1, out.u2;
  Eigen::JacobiSVD<Mat> svd(span, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > 1e-10) ++rank;
  }
  out.Uc = svd.matrixU().rightCols(n - rank);
  return out;
}

}  // namespace ehmc

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ehmc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error hierarchy. Everything thrown by the library derives from Error so the
// CLI can map categories onto exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent model document.
struct ModelError : Error {
  using Error::Error;
};

// QR / Cholesky breakdown, or a boundary normal that vanishes inside the manifold.
struct FactorizationError : Error {
  using Error::Error;
};

// A caller-side precondition (point off the manifold, non-tangent velocity, ...).
struct ContractError : Error {
  using Error::Error;
};

// Repeated zero-time boundary events; the trajectory is trapped in a corner.
struct StallError : Error {
  using Error::Error;
};

// Complete QR factorization X = Q R with Q square orthonormal. `r_top` is the
// leading ncol×ncol upper-triangular block.
struct CompleteQR {
  Mat q;
  Mat r_top;
};

inline CompleteQR complete_qr(const Mat& x) {
  const auto cols = x.cols();
  if (cols > x.rows()) {
    throw FactorizationError("complete_qr: more columns (" + std::to_string(cols) +
                             ") than rows (" + std::to_string(x.rows()) + ")");
  }
  Eigen::HouseholderQR<Mat> qr(x);
  CompleteQR out;
  out.q = qr.householderQ() * Mat::Identity(x.rows(), x.rows());
  out.r_top = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  const double scale = std::max(1.0, out.r_top.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < cols; ++i) {
    if (std::abs(out.r_top(i, i)) <= 1e-12 * scale) {
      throw FactorizationError("complete_qr: matrix is rank deficient (|R[" + std::to_string(i) +
                               "," + std::to_string(i) + "]| ~ 0)");
    }
  }
  return out;
}

// Solves R' z = rhs for upper-triangular R.
inline Vec solve_upper_transposed(const Mat& r, const Vec& rhs) {
  return r.transpose().triangularView<Eigen::Lower>().solve(rhs);
}

inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

}  // namespace ehmc

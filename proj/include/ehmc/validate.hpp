#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "ehmc/model.hpp"
#include "ehmc/subspace.hpp"

namespace ehmc {

struct CheckItem {
  std::string check;    // rank, positive_definite, reciprocity, ...
  std::string subject;  // e.g. "region 3" or "region 1 / hyperplane 2 -> region 5"
  bool pass = true;
  double residual = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckItem> items;

  [[nodiscard]] bool ok() const {
    for (const auto& item : items) {
      if (!item.pass) return false;
    }
    return true;
  }

  [[nodiscard]] std::vector<CheckItem> failures() const {
    std::vector<CheckItem> out;
    for (const auto& item : items) {
      if (!item.pass) out.push_back(item);
    }
    return out;
  }
};

namespace detail {

inline std::string region_label(int j) { return "region " + std::to_string(j + 1); }

inline std::string face_label(int j, int i, int target) {
  return region_label(j) + " / hyperplane " + std::to_string(i + 1) + " -> region " +
         std::to_string(target + 1);
}

}  // namespace detail

// Structural and numerical checks on a loaded model. Failures are report
// entries; nothing here throws for a bad model.
inline ValidationReport validate_model(const ModelSpec& spec, double tol = 1e-8) {
  ValidationReport report;
  const int J = spec.num_regions;
  const int m = spec.num_hyperplanes;

  for (int j = 0; j < J; ++j) {
    Eigen::JacobiSVD<Mat> svd(spec.A[j]);
    const auto& sv = svd.singularValues();
    const double smin = sv[sv.size() - 1];
    const bool full_rank = smin > 1e-10 * std::max(1.0, sv[0]);
    report.items.push_back({"rank", detail::region_label(j), full_rank, smin,
                            full_rank ? "A has full column rank"
                                      : "A is rank deficient (smallest singular value)"});

    Eigen::LLT<Mat> llt(spec.M[j]);
    const bool pd = llt.info() == Eigen::Success;
    Eigen::SelfAdjointEigenSolver<Mat> eig(spec.M[j], Eigen::EigenvaluesOnly);
    report.items.push_back({"positive_definite", detail::region_label(j), pd,
                            eig.eigenvalues()[0],
                            pd ? "Cholesky succeeded (smallest eigenvalue)" : "Cholesky failed"});
  }

  for (int j = 0; j < J; ++j) {
    Mat q;
    bool have_q = false;
    try {
      q = complete_qr(spec.A[j]).q;
      have_q = true;
    } catch (const FactorizationError&) {
    }

    std::vector<int> active;
    for (int i = 0; i < m; ++i) {
      if (spec.L(j, i) != 0) active.push_back(i);
    }

    for (int i : active) {
      const int code = spec.L(j, i);
      const int target = std::abs(code) - 1;
      const Vec f = spec.F.row(i).transpose();

      if (have_q) {
        const auto q1 = q.leftCols(spec.d);
        const double resid = (f - q1 * (q1.transpose() * f)).norm();
        const bool ok = resid >= kDegenerateNormal;
        report.items.push_back({"face_transversal", detail::face_label(j, i, target), ok, resid,
                                ok ? "face normal leaves col(A)" : "face normal lies in col(A)"});
      }

      if (target == j) continue;  // wall

      const int back = spec.L(target, i);
      const bool reciprocal = back != 0 && std::abs(back) - 1 == j && (back > 0) != (code > 0);
      report.items.push_back({"reciprocity", detail::face_label(j, i, target), reciprocal,
                              static_cast<double>(back),
                              reciprocal ? "target points back with opposite sign"
                                         : "target's L entry does not point back (entry shown)"});

      int claimants = 0;
      for (int other = 0; other < J; ++other) {
        if (other == j) continue;
        const int c = spec.L(other, i);
        if (c != 0 && std::abs(c) - 1 == j && (c > 0) != (code > 0)) ++claimants;
      }
      const bool unique = claimants <= 1;
      report.items.push_back({"face_uniqueness", detail::face_label(j, i, target), unique,
                              static_cast<double>(claimants),
                              unique ? "at most one region across the face"
                                     : "several regions abut this face"});

      try {
        const auto cc = continuity_check(f, spec.g[i], spec.A[j], spec.A[target], spec.y[j],
                                         spec.y[target], tol);
        std::ostringstream msg;
        msg << "e1=" << cc.e1 << " e2=" << cc.e2;
        report.items.push_back({"continuity", detail::face_label(j, i, target), cc.ok,
                                std::max(cc.e1, cc.e2), msg.str()});
      } catch (const FactorizationError& e) {
        report.items.push_back({"continuity", detail::face_label(j, i, target), false,
                                std::nan(""), e.what()});
      }
    }

    // Two active rows describing the same half-space (up to positive scale).
    for (std::size_t p = 0; p < active.size(); ++p) {
      for (std::size_t s = p + 1; s < active.size(); ++s) {
        const int a = active[p];
        const int b = active[s];
        Vec ha(spec.n + 1), hb(spec.n + 1);
        ha << spec.F.row(a).transpose(), spec.g[a];
        hb << spec.F.row(b).transpose(), spec.g[b];
        ha *= spec.L(j, a) > 0 ? 1.0 : -1.0;
        hb *= spec.L(j, b) > 0 ? 1.0 : -1.0;
        const double dist = (ha.normalized() - hb.normalized()).norm();
        if (dist < 1e-12) {
          report.items.push_back({"duplicate_face", detail::region_label(j), false, dist,
                                  "hyperplanes " + std::to_string(a + 1) + " and " +
                                      std::to_string(b + 1) + " coincide"});
        }
      }
    }
  }
  return report;
}

inline std::string format_report(const ValidationReport& report) {
  std::ostringstream out;
  out.precision(3);
  for (const auto& item : report.items) {
    out << (item.pass ? "PASS " : "FAIL ") << item.check << " [" << item.subject
        << "] residual=" << std::scientific << item.residual << std::defaultfloat << "  "
        << item.detail << '\n';
  }
  return out.str();
}

}  // namespace ehmc

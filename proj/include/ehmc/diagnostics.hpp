#pragma once

// Chain summaries used by the CLI diagnose command and by the test harness.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ehmc/model.hpp"
#include "ehmc/sampler.hpp"

namespace ehmc {

inline Vec sample_mean(const Mat& X) { return X.colwise().mean().transpose(); }

inline Mat sample_covariance(const Mat& X) {
  const Mat centered = X.rowwise() - X.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(X.rows() - 1);
}

// Lag-1 autocorrelation of each column.
inline Vec lag1_autocorrelation(const Mat& X) {
  Vec out(X.cols());
  const Mat centered = X.rowwise() - X.colwise().mean();
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const auto col = centered.col(c);
    const double denom = col.squaredNorm();
    const auto len = col.size();
    out[c] = denom > 0.0 ? col.head(len - 1).dot(col.tail(len - 1)) / denom : 0.0;
  }
  return out;
}

struct ChainSummary {
  double max_manifold_residual = 0.0;
  double max_constraint_violation = 0.0;  // max over rows of -(min slack), floored at 0
  double max_energy_drift = 0.0;          // needs record_events
  std::vector<long> occupancy;            // kept rows per region
  Vec lag1;
  long events = 0;
};

inline ChainSummary summarize_chain(const ModelSpec& spec, const ChainOutput& out) {
  ChainSummary s;
  s.occupancy.assign(static_cast<std::size_t>(spec.num_regions), 0);
  for (Eigen::Index i = 0; i < out.X.rows(); ++i) {
    const int j = out.R[static_cast<std::size_t>(i)];
    const Vec x = out.X.row(i).transpose();
    s.max_manifold_residual = std::max(s.max_manifold_residual, ell(spec, j, x).norm());
    const auto rb = region_boundaries(spec, j);
    if (rb.size() > 0) {
      s.max_constraint_violation =
          std::max(s.max_constraint_violation, -(rb.normals * x + rb.offsets).minCoeff());
    }
    ++s.occupancy[static_cast<std::size_t>(j)];
  }
  for (const auto& st : out.stats) s.max_energy_drift = std::max(s.max_energy_drift, st.relative_drift());
  s.lag1 = out.X.rows() > 1 ? lag1_autocorrelation(out.X) : Vec::Zero(spec.n);
  s.events = static_cast<long>(out.events.size());
  return s;
}

}  // namespace ehmc

#pragma once

// Exact trajectory evolution inside a region, analytic boundary hits and the
// velocity updates applied at walls and region transitions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "ehmc/linalg.hpp"
#include "ehmc/model.hpp"
#include "ehmc/subspace.hpp"

namespace ehmc {

inline constexpr double kDefaultEpsT = 1e-9;
inline constexpr double kCornerTie = 1e-9;
inline constexpr double kOnFace = 1e-12;

// x(t) = x_p + a sin t + b cos t
struct TrajectorySegment {
  Vec a;
  Vec b;
  Vec x_p;

  [[nodiscard]] Vec position(double t) const { return x_p + a * std::sin(t) + b * std::cos(t); }
  [[nodiscard]] Vec velocity(double t) const { return a * std::cos(t) - b * std::sin(t); }
};

enum class EventKind { none, wall, transition };

inline const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::none: return "none";
    case EventKind::wall: return "wall";
    case EventKind::transition: return "transition";
  }
  return "?";
}

struct BoundaryEvent {
  double tau = 0.0;
  int row = -1;         // constraint row within the RegionBoundary, -1 when no hit
  int hyperplane = -1;  // original hyperplane index, -1 when no hit
  int j_target = 0;
  Vec f_row;            // sign-adjusted normal hit; the velocity coefficient when no hit
  EventKind kind = EventKind::none;

  [[nodiscard]] bool hit() const { return kind != EventKind::none; }
};

struct BoundaryHit {
  BoundaryEvent event;
  Vec x;
  Vec xdot;
};

// First exiting root in (eps_t, t_max] of K(t) = fa sin t + fb cos t + h,
// i.e. K(t) = 0 with K'(t) < 0. Writing K(t) = u cos(t + phi) + h with
// phi = atan2(-fa, fb), exiting roots are t = acos(-h/u) - phi + 2 pi n.
inline std::optional<double> hit_time(double fa, double fb, double h, double t_max,
                                      double eps_t = kDefaultEpsT) {
  const double u = std::hypot(fa, fb);
  // u == |h| is a grazing contact, not a crossing.
  if (u == 0.0 || u <= std::abs(h)) return std::nullopt;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double phi = std::atan2(-fa, fb);
  double t = std::acos(-h / u) - phi;
  t -= two_pi * std::floor((t - eps_t) / two_pi);
  if (t <= eps_t) t += two_pi;
  if (t > t_max) return std::nullopt;
  return t;
}

inline BoundaryHit evolve_to_boundary(double t_max, const TrajectorySegment& seg,
                                      const RegionBoundary& rb, int j,
                                      double eps_t = kDefaultEpsT) {
  const Vec fa = rb.normals * seg.a;
  const Vec fb = rb.normals * seg.b;
  const Vec h = rb.normals * seg.x_p + rb.offsets;

  std::vector<double> tau(static_cast<std::size_t>(rb.size()),
                          std::numeric_limits<double>::infinity());
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < rb.size(); ++i) {
    // On the face (up to roundoff) or past it and still moving outward, e.g. a
    // corner left behind by the previous event: the crossing happens now.
    const double on_face = kOnFace * std::max({1.0, std::abs(h[i]), std::hypot(fa[i], fb[i])});
    if (fb[i] + h[i] <= on_face && fa[i] < 0.0) {
      tau[static_cast<std::size_t>(i)] = 0.0;
    } else if (auto t = hit_time(fa[i], fb[i], h[i], t_max, eps_t)) {
      tau[static_cast<std::size_t>(i)] = *t;
    }
    best = std::min(best, tau[static_cast<std::size_t>(i)]);
  }

  BoundaryHit out;
  auto& ev = out.event;
  ev.tau = t_max;
  ev.j_target = j;
  ev.f_row = seg.a;
  if (best <= t_max) {
    // Near-simultaneous hits resolve to the lowest row; the other face is
    // picked up by the zero-time rule on the next segment.
    int chosen = -1;
    for (int i = 0; i < rb.size(); ++i) {
      if (tau[static_cast<std::size_t>(i)] <= best + kCornerTie) {
        chosen = i;
        break;
      }
    }
    ev.row = chosen;
    ev.hyperplane = rb.hyperplanes[static_cast<std::size_t>(chosen)];
    ev.tau = tau[static_cast<std::size_t>(chosen)];
    ev.j_target = rb.targets[static_cast<std::size_t>(chosen)];
    ev.f_row = rb.normals.row(chosen).transpose();
    ev.kind = ev.j_target == j ? EventKind::wall : EventKind::transition;
  }
  out.x = seg.position(ev.tau);
  out.xdot = seg.velocity(ev.tau);
  return out;
}

// Specular reflection off a face with unit normal u1.
inline Vec wall_dynamics(const Vec& xdot, const Vec& u1) { return xdot - 2.0 * u1.dot(xdot) * u1; }

struct BoundaryOutcome {
  Vec xdot;
  int j_new = 0;
  bool transmitted = false;
};

// u1 points into j1 (so v1 = u1'xdot <= 0 on exit) and u2 points into j2.
// The normal kinetic energy 1/2 v1^2 pays the potential step V2 - V1; if it
// cannot, the normal component is reversed.
inline BoundaryOutcome boundary_dynamics(const Vec& xdot, int j1, int j2, const Vec& u1,
                                         const Vec& u2, double V1, double V2) {
  const double v1 = u1.dot(xdot);
  const double e_normal = 0.5 * v1 * v1;
  const double dV = V2 - V1;
  BoundaryOutcome out;
  out.xdot = xdot - v1 * u1;
  if (e_normal < dV) {
    out.j_new = j1;
    out.xdot -= v1 * u1;
  } else {
    out.j_new = j2;
    out.transmitted = true;
    out.xdot += std::sqrt(2.0 * (e_normal - dV)) * u2;
  }
  return out;
}

// Result of one call to evolve_segment: the state after the first event (or
// after the whole budget when nothing is hit).
struct SegmentResult {
  Vec x;
  Vec xdot;
  double tau = 0.0;
  int region = 0;  // region after the event
  BoundaryEvent event;
  bool transmitted = false;  // transition events only
  double dV = 0.0;
  double energy_pre = 0.0;   // total_energy before the velocity update
  double energy_post = 0.0;  // same after, in the resulting region
};

// 1/2 xdot'M_j xdot + V_j(x). For tangent velocities the kinetic term equals
// the segment metric 1/2 xdot'Q2 Omega22 Q2'xdot, so this is constant along a
// segment for any M; with M = I it is the Euclidean ledger of the boundary rule.
inline double total_energy(const ModelSpec& spec, int j, const Vec& x, const Vec& xdot) {
  return 0.5 * xdot.dot(spec.M[j] * xdot) + potential(spec, j, x);
}

inline SegmentResult evolve_segment(double t_budget, int j, const Vec& x0, const Vec& xdot0,
                                    const ModelSpec& spec, RegionCache& cache,
                                    double eps_t = kDefaultEpsT) {
  const auto& dyn = get_ode_param_cached(j, cache, spec);
  const auto coef = ode_coef(dyn, x0, xdot0);
  const TrajectorySegment seg{coef.a, coef.b, dyn.x_p};
  const auto& rb = cache.boundary(j, spec);
  auto hit = evolve_to_boundary(t_budget, seg, rb, j, eps_t);

  SegmentResult out;
  out.tau = hit.event.tau;
  out.region = j;
  out.x = std::move(hit.x);
  out.xdot = std::move(hit.xdot);
  out.event = std::move(hit.event);
  if (!out.event.hit()) return out;

  out.energy_pre = total_energy(spec, j, out.x, out.xdot);
  const Vec u1 = boundary_normal(out.event.f_row, dyn.Q, dyn.d);
  if (out.event.kind == EventKind::wall) {
    out.xdot = wall_dynamics(out.xdot, u1);
  } else {
    const int target = out.event.j_target;
    const auto& dyn2 = get_ode_param_cached(target, cache, spec);
    const Vec u2 = -boundary_normal(out.event.f_row, dyn2.Q, dyn2.d);
    const double V1 = potential(spec, j, out.x);
    const double V2 = potential(spec, target, out.x);
    out.dV = V2 - V1;
    auto bd = boundary_dynamics(out.xdot, j, target, u1, u2, V1, V2);
    out.xdot = std::move(bd.xdot);
    out.region = bd.j_new;
    out.transmitted = bd.transmitted;
  }
  out.energy_post = total_energy(spec, out.region, out.x, out.xdot);
  return out;
}

// Unified variant: every segment ends in boundary_dynamics. A wall is a
// boundary with u2 = u1 and no potential step; a segment that hits nothing
// ends on an artificial boundary with u2 = -u1, which leaves the velocity
// unchanged. Used to cross-check evolve_segment.
inline SegmentResult evolve_segment_unified(double t_budget, int j, const Vec& x0, const Vec& xdot0,
                                            const ModelSpec& spec, RegionCache& cache,
                                            double eps_t = kDefaultEpsT) {
  const auto& dyn = get_ode_param_cached(j, cache, spec);
  const auto coef = ode_coef(dyn, x0, xdot0);
  const TrajectorySegment seg{coef.a, coef.b, dyn.x_p};
  auto hit = evolve_to_boundary(t_budget, seg, cache.boundary(j, spec), j, eps_t);

  SegmentResult out;
  out.tau = hit.event.tau;
  out.region = j;
  out.x = std::move(hit.x);
  out.xdot = std::move(hit.xdot);
  out.event = std::move(hit.event);

  const int target = out.event.j_target;
  const auto q1 = dyn.q1();
  Vec resid1 = out.event.f_row - q1 * (q1.transpose() * out.event.f_row);
  if (resid1.norm() < kDegenerateNormal) return out;  // particle at rest
  Vec u1 = resid1.normalized();
  Vec u2;
  if (!out.event.hit()) {
    // Orient the artificial face so the particle is leaving through it.
    if (u1.dot(out.xdot) > 0.0) u1 = -u1;
    u2 = -u1;
  } else {
    const auto& dyn2 = get_ode_param_cached(target, cache, spec);
    const double pm = out.event.kind == EventKind::wall ? 1.0 : -1.0;
    u2 = pm * boundary_normal(out.event.f_row, dyn2.Q, dyn2.d);
  }
  const double V1 = potential(spec, j, out.x);
  const double V2 = potential(spec, target, out.x);
  out.energy_pre = total_energy(spec, j, out.x, out.xdot);
  out.dV = V2 - V1;
  auto bd = boundary_dynamics(out.xdot, j, target, u1, u2, V1, V2);
  out.xdot = std::move(bd.xdot);
  out.region = bd.j_new;
  out.transmitted = bd.transmitted && out.event.kind == EventKind::transition;
  out.energy_post = total_energy(spec, out.region, out.x, out.xdot);
  return out;
}

// Raises StallError when the trajectory keeps producing zero-advance events:
// twice in a row on the same hyperplane, or too many in a row overall.
class StallGuard {
 public:
  explicit StallGuard(double eps_t = kDefaultEpsT, int max_zero_run = 1000)
      : eps_t_(eps_t), max_zero_run_(max_zero_run) {}

  void observe(const SegmentResult& seg) {
    if (!seg.event.hit() || seg.tau > eps_t_) {
      last_hyperplane_ = -1;
      run_ = 0;
      return;
    }
    if (seg.event.hyperplane == last_hyperplane_ || ++run_ >= max_zero_run_) {
      throw StallError("trajectory stalled at hyperplane " + std::to_string(seg.event.hyperplane + 1) +
                       " (region " + std::to_string(seg.region + 1) + ", tau " +
                       std::to_string(seg.tau) + ")");
    }
    last_hyperplane_ = seg.event.hyperplane;
  }

  void reset() {
    last_hyperplane_ = -1;
    run_ = 0;
  }

 private:
  double eps_t_;
  int max_zero_run_;
  int last_hyperplane_ = -1;
  int run_ = 0;
};

}  // namespace ehmc

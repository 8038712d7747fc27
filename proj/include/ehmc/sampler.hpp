#pragma once

// Chain orchestration. Each iterate draws a fresh tangent velocity and then
// follows the exact trajectory for t_max time units, handling every boundary
// event on the way. No accept/reject step is needed.
//
// RNG stream order: exactly one velocity vector (n - d normals) per iterate,
// drawn before the trajectory is evolved. Nothing else consumes randomness.

#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ehmc/dynamics.hpp"
#include "ehmc/model.hpp"
#include "ehmc/rng.hpp"
#include "ehmc/subspace.hpp"

namespace ehmc {

struct ChainConfig {
  long n_samples = 1000;
  double t_max = std::numbers::pi / 2.0;
  std::uint64_t seed = 0;
  long burn_in = 0;
  long thin = 1;
  bool record_events = false;
  std::uint64_t chain_index = 0;
  double eps_t = kDefaultEpsT;
};

struct ParticleState {
  Vec x;
  Vec xdot;
  int j = 0;
  double t_remaining = 0.0;
};

enum class EventOutcome { wall, transmit, reflect };

inline const char* to_string(EventOutcome kind) {
  switch (kind) {
    case EventOutcome::wall: return "wall";
    case EventOutcome::transmit: return "transmit";
    case EventOutcome::reflect: return "reflect";
  }
  return "?";
}

struct EventRecord {
  long iterate = 0;
  double time = 0.0;  // elapsed time within the iterate
  int hyperplane = 0;
  EventOutcome kind = EventOutcome::wall;
  int j_from = 0;
  int j_to = 0;  // region after the event
  double dV = 0.0;
  double energy_pre = 0.0;
  double energy_post = 0.0;
};

struct IterateStats {
  long iterate = 0;
  int events = 0;
  double time_used = 0.0;
  double energy_start = 0.0;
  double energy_end = 0.0;

  [[nodiscard]] double relative_drift() const {
    return std::abs(energy_end - energy_start) / std::max(1.0, std::abs(energy_start));
  }
};

struct ChainOutput {
  Mat X;                      // n_samples x n
  Mat Xdot;                   // n_samples x n
  std::vector<int> R;         // region labels (0-based)
  std::vector<long> iterate;  // iterate index of each kept row
  std::vector<EventRecord> events;  // only with record_events
  std::vector<IterateStats> stats;  // one per iterate, only with record_events
};

inline Vec refresh_velocity(const RegionDynamics& dyn, Rng& rng) {
  return dyn.S * rng.normal_vector(dyn.S.cols());
}

struct InitialPointReport {
  double manifold_residual = 0.0;
  double min_slack = 0.0;  // smallest sign-adjusted constraint value; +inf when unconstrained
  bool pass = false;

  [[nodiscard]] std::string describe() const {
    std::ostringstream out;
    out << (pass ? "PASS" : "FAIL") << " initial point: manifold residual=" << manifold_residual
        << " min constraint slack=" << min_slack;
    return out.str();
  }
};

inline InitialPointReport initial_point_check(const ModelSpec& spec, int j0, const Vec& x0,
                                              double tol = 1e-8) {
  InitialPointReport rep;
  if (j0 < 0 || j0 >= spec.num_regions || x0.size() != spec.n) {
    rep.manifold_residual = std::numeric_limits<double>::infinity();
    rep.min_slack = -std::numeric_limits<double>::infinity();
    return rep;
  }
  rep.manifold_residual = ell(spec, j0, x0).norm();
  const auto rb = region_boundaries(spec, j0);
  rep.min_slack = rb.size() == 0 ? std::numeric_limits<double>::infinity()
                                 : (rb.normals * x0 + rb.offsets).minCoeff();
  rep.pass = rep.manifold_residual <= tol && rep.min_slack >= -tol;
  return rep;
}

inline ChainOutput run_chain(const ModelSpec& spec, int j0, const Vec& x0, const ChainConfig& cfg) {
  if (cfg.thin < 1 || cfg.n_samples < 1 || cfg.burn_in < 0 || !(cfg.t_max > 0.0)) {
    throw ContractError("run_chain: need n_samples >= 1, thin >= 1, burn_in >= 0, t_max > 0");
  }
  const auto check = initial_point_check(spec, j0, x0);
  if (!check.pass) throw ContractError("run_chain: invalid initial point: " + check.describe());

  Rng rng(cfg.seed, cfg.chain_index);
  RegionCache cache(spec);
  StallGuard guard(cfg.eps_t);

  ChainOutput out;
  out.X.resize(cfg.n_samples, spec.n);
  out.Xdot.resize(cfg.n_samples, spec.n);
  out.R.reserve(static_cast<std::size_t>(cfg.n_samples));
  out.iterate.reserve(static_cast<std::size_t>(cfg.n_samples));

  ParticleState state{x0, Vec::Zero(spec.n), j0, 0.0};
  const long total = cfg.burn_in + cfg.n_samples * cfg.thin;
  long row = 0;
  for (long it = 0; it < total; ++it) {
    state.xdot = refresh_velocity(get_ode_param_cached(state.j, cache, spec), rng);
    state.t_remaining = cfg.t_max;
    IterateStats stats;
    stats.iterate = it;
    if (cfg.record_events) stats.energy_start = total_energy(spec, state.j, state.x, state.xdot);

    guard.reset();
    while (state.t_remaining > 0.0) {
      SegmentResult seg;
      try {
        seg = evolve_segment(state.t_remaining, state.j, state.x, state.xdot, spec, cache, cfg.eps_t);
        guard.observe(seg);
      } catch (const StallError& e) {
        std::ostringstream msg;
        msg << e.what() << " during iterate " << it << " at t=" << stats.time_used
            << " after " << stats.events << " events; x=" << state.x.transpose();
        throw StallError(msg.str());
      }
      if (seg.event.hit()) {
        ++stats.events;
        if (cfg.record_events) {
          EventRecord ev;
          ev.iterate = it;
          ev.time = stats.time_used + seg.tau;
          ev.hyperplane = seg.event.hyperplane;
          ev.kind = seg.event.kind == EventKind::wall ? EventOutcome::wall
                    : seg.transmitted                 ? EventOutcome::transmit
                                                      : EventOutcome::reflect;
          ev.j_from = state.j;
          ev.j_to = seg.region;
          ev.dV = seg.dV;
          ev.energy_pre = seg.energy_pre;
          ev.energy_post = seg.energy_post;
          out.events.push_back(ev);
        }
        state.t_remaining -= seg.tau;
      } else {
        state.t_remaining = 0.0;
      }
      stats.time_used += seg.tau;
      state.x = std::move(seg.x);
      state.xdot = std::move(seg.xdot);
      state.j = seg.region;
    }

    if (cfg.record_events) {
      stats.energy_end = total_energy(spec, state.j, state.x, state.xdot);
      out.stats.push_back(stats);
    }
    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0) {
      out.X.row(row) = state.x.transpose();
      out.Xdot.row(row) = state.xdot.transpose();
      out.R.push_back(state.j);
      out.iterate.push_back(it);
      ++row;
    }
  }
  return out;
}

// Independent chains over a shared model; chain c uses RNG stream c.
inline std::vector<ChainOutput> run_chains(const ModelSpec& spec, int j0, const Vec& x0,
                                           const ChainConfig& cfg, int n_chains) {
  std::vector<ChainOutput> outputs(static_cast<std::size_t>(n_chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_chains));
  std::vector<std::thread> workers;
  for (int c = 0; c < n_chains; ++c) {
    workers.emplace_back([&, c] {
      try {
        ChainConfig local = cfg;
        local.chain_index = static_cast<std::uint64_t>(c);
        outputs[static_cast<std::size_t>(c)] = run_chain(spec, j0, x0, local);
      } catch (...) {
        errors[static_cast<std::size_t>(c)] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return outputs;
}

}  // namespace ehmc

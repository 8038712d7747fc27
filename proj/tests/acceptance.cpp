// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ehmc/cli.hpp"
#include "ehmc/oracle.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace ehmc;
using ehmc::testing::shipped;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ChainConfig chain(long n, std::uint64_t seed, bool events = false) {
  ChainConfig cfg;
  cfg.n_samples = n;
  cfg.seed = seed;
  cfg.t_max = kPi / 2;
  cfg.record_events = events;
  return cfg;
}

// N(0, I3) given 1'x = 1.
Verdict conditional_moments() {
  const auto spec = shipped("gauss_plane.model");
  const auto out = run_chain(spec, 0, spec.init->x, chain(20000, 1));
  const auto ref = oracle::conditional_gaussian_moments(Vec::Zero(3), Mat::Identity(3, 3), Mat::Ones(3, 1),
                                                        Vec::Ones(1));
  const double mean_err = (sample_mean(out.X) - ref.m).cwiseAbs().maxCoeff();
  const double cov_err = (sample_covariance(out.X) - ref.V).cwiseAbs().maxCoeff();
  return {mean_err <= 0.02 && cov_err <= 0.03,
          "max|mean - 1/3| = " + fmt("%.4f", mean_err) + " (tol 0.02), max|cov - (I - 11'/3)| = " +
              fmt("%.4f", cov_err) + " (tol 0.03), 20000 iterates"};
}

// ln 2 step on the line x2 = 0.
Verdict two_region_occupancy() {
  const auto spec = shipped("step_line.model");
  const auto out = run_chain(spec, 0, spec.init->x, chain(50000, 2));
  const double freq = static_cast<double>(std::count(out.R.begin(), out.R.end(), 0)) / 50000.0;
  const double ref = oracle::occupancy_quadrature_line({1.0, 0.0, spec.k[0]}, {1.0, 0.0, spec.k[1]});
  return {std::abs(freq - ref) <= 0.02, "region-1 frequency " + fmt("%.4f", freq) + " vs quadrature " +
                                            fmt("%.6f", ref) + " (tol 0.02), 50000 iterates"};
}

// Random full trajectories against the grid/bisection oracle.
Verdict hit_time_equivalence() {
  Rng rng(3);
  double worst = 0.0;
  int mismatched = 0, hits = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 4;
    const Vec xp = rng.normal_vector(n), a = rng.normal_vector(n), b = rng.normal_vector(n);
    const Vec f = rng.normal_vector(n);
    const double g = rng.normal();
    const double t_max = 0.1 + 9.9 * rng.uniform();
    const auto analytic = hit_time(f.dot(a), f.dot(b), f.dot(xp) + g, t_max);
    const auto grid = oracle::grid_hit_time(xp, a, b, f, g, t_max);
    if (analytic.has_value() != grid.has_value()) {
      ++mismatched;
    } else if (analytic) {
      ++hits;
      worst = std::max(worst, std::abs(*analytic - *grid));
    }
  }
  return {mismatched == 0 && worst <= 1e-6,
          std::to_string(hits) + " hits / 1000 instances, hit/no-hit disagreements " + std::to_string(mismatched) +
              ", max |tau - oracle| = " + fmt("%.2e", worst) + " (tol 1e-6)"};
}

Verdict energy_conservation() {
  const auto spec = shipped("onenorm.model");
  const auto out = run_chain(spec, 0, spec.init->x, chain(10000, 4, true));
  double drift = 0.0, junction = 0.0;
  long transmits = 0;
  for (const auto& st : out.stats) drift = std::max(drift, st.relative_drift());
  for (const auto& ev : out.events) {
    if (ev.kind != EventOutcome::transmit) continue;
    ++transmits;
    junction = std::max(junction, std::abs(ev.energy_post - ev.energy_pre));
  }
  return {drift <= 1e-7 && junction <= 1e-8 && transmits > 0,
          "max per-iterate relative drift " + fmt("%.2e", drift) + " (tol 1e-7), junction imbalance " +
              fmt("%.2e", junction) + " over " + std::to_string(transmits) + " transmits (tol 1e-8)"};
}

Verdict manifold_adherence() {
  double worst = 0.0, worst_l1 = 0.0;
  long rows = 0;
  for (const char* name : {"onenorm.model", "ntop.model", "ntop_aniso.model", "pospart.model", "gauss_plane.model",
                           "step_line.model"}) {
    const auto spec = shipped(name);
    const auto out = run_chain(spec, spec.init->region, spec.init->x, chain(5000, 5));
    for (Eigen::Index i = 0; i < out.X.rows(); ++i) {
      const Vec x = out.X.row(i).transpose();
      worst = std::max(worst, ell(spec, out.R[static_cast<std::size_t>(i)], x).norm());
      if (std::string(name) == "onenorm.model") worst_l1 = std::max(worst_l1, std::abs(x.lpNorm<1>() - 1.0));
      ++rows;
    }
  }
  return {worst <= 1e-7 && worst_l1 <= 1e-7,
          "max ||A'x + y|| = " + fmt("%.2e", worst) + ", max | ||x||_1 - 1 | = " + fmt("%.2e", worst_l1) +
              " (tol 1e-7) over " + std::to_string(rows) + " rows from 6 models"};
}

Verdict octant_symmetry() {
  const auto spec = shipped("onenorm.model");
  const auto out = run_chain(spec, 0, spec.init->x, chain(80000, 6));
  std::vector<long> counts(8, 0);
  for (int j : out.R) ++counts[static_cast<std::size_t>(j)];
  double lo = 1.0, hi = 0.0;
  for (long c : counts) {
    lo = std::min(lo, c / 80000.0);
    hi = std::max(hi, c / 80000.0);
  }
  return {lo >= 0.105 && hi <= 0.145,
          "octant frequencies in [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "] (band [0.105, 0.145]), 80000 iterates"};
}

Verdict appendix_machinery() {
  double worst_ok = 0.0;
  int faces = 0;
  bool all_pass = true;
  for (const char* name : {"onenorm.model", "ntop.model", "ntop_aniso.model", "pospart.model"}) {
    for (const auto& item : validate_model(shipped(name)).items) {
      if (item.check != "continuity") continue;
      ++faces;
      all_pass = all_pass && item.pass;
      worst_ok = std::max(worst_ok, item.residual);
    }
  }
  auto broken = shipped("onenorm.model");
  broken.y[0] = ehmc::testing::vec({-2});
  double broken_resid = 0.0;
  bool broken_fails = false;
  for (const auto& item : validate_model(broken).failures()) {
    if (item.check == "continuity") {
      broken_fails = true;
      broken_resid = std::max(broken_resid, item.residual);
    }
  }

  Rng rng(7);
  double worst_ns = 0.0;
  bool oriented = true;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + trial % 5;
    const int d = 1 + trial % (n - 2);
    const Mat A1 = ehmc::testing::random_matrix(rng, n, d);
    const Vec f = rng.normal_vector(n);
    const Mat A2 = A1 + f * rng.normal_vector(d).transpose();
    const auto ns = null_space_decomposition(A1, A2, f);
    const Eigen::Index w = ns.U0.cols() + 1 + ns.Uc.cols();
    Mat b1(n, w), b2(n, w);
    b1 << ns.U0, ns.u1, ns.Uc;
    b2 << ns.U0, ns.u2, ns.Uc;
    const Mat I = Mat::Identity(w, w);
    worst_ns = std::max({worst_ns, (b1.transpose() * b1 - I).norm(), (b2.transpose() * b2 - I).norm(),
                         (A1.transpose() * ns.U0).norm() / A1.norm(), (A2.transpose() * ns.U0).norm() / A2.norm(),
                         (A1.transpose() * ns.u1).norm() / A1.norm(), (A2.transpose() * ns.u2).norm() / A2.norm()});
    oriented = oriented && f.dot(ns.u1) > 0.0 && f.dot(ns.u2) < 0.0;
  }
  return {all_pass && broken_fails && broken_resid >= 0.5 && worst_ns <= 1e-9 && oriented,
          std::to_string(faces) + " faces pass (max residual " + fmt("%.1e", worst_ok) + "), broken variant residual " +
              fmt("%.3f", broken_resid) + " (need >= 0.5), null-space invariants max " + fmt("%.1e", worst_ns) +
              " over 100 instances (tol 1e-9)"};
}

// Random two-region encounters with continuous pieces and random potentials.
Verdict evolve_equivalence() {
  Rng rng(8);
  int encounters = 0, walls = 0, transmits = 0, reflects = 0, region_mismatch = 0;
  double worst = 0.0;
  while (encounters < 500) {
    const int n = 2 + static_cast<int>(rng.uniform() * 4);
    const int d = 1 + static_cast<int>(rng.uniform() * (n - 1));
    const Vec x0 = rng.normal_vector(n);
    const Vec f = rng.normal_vector(n);
    const double g = -f.dot(x0) + 0.05 + rng.uniform();
    const Mat A1 = ehmc::testing::random_matrix(rng, n, d);
    const Vec c = rng.normal_vector(d);

    ModelSpec spec;
    spec.n = n;
    spec.d = d;
    spec.num_regions = 2;
    spec.num_hyperplanes = 1;
    spec.mean_flag = true;
    spec.M = {ehmc::testing::random_spd(rng, n), ehmc::testing::random_spd(rng, n)};
    spec.r = {rng.normal_vector(n), rng.normal_vector(n)};
    spec.k = {rng.normal(), rng.normal()};
    spec.A = {A1, A1 + f * c.transpose()};
    spec.y = {-A1.transpose() * x0, -A1.transpose() * x0 + g * c};
    spec.F = f.transpose();
    spec.g = Vec::Constant(1, g);
    spec.L.resize(2, 1);
    spec.L << (rng.uniform() < 0.3 ? 1 : 2), -1;

    RegionCache cache(spec);
    const auto& dyn = get_ode_param_cached(0, cache, spec);
    const Vec v0 = (0.5 + 3.0 * rng.uniform()) * refresh_velocity(dyn, rng);
    const auto a = evolve_segment(2.0 * kPi, 0, x0, v0, spec, cache);
    const auto b = evolve_segment_unified(2.0 * kPi, 0, x0, v0, spec, cache);
    if (!a.event.hit()) continue;
    ++encounters;
    if (a.event.kind == EventKind::wall) ++walls;
    else if (a.transmitted) ++transmits;
    else ++reflects;
    worst = std::max(worst, (a.xdot - b.xdot).norm());
    if (a.region != b.region) ++region_mismatch;
  }
  return {worst <= 1e-10 && region_mismatch == 0,
          "500 encounters (" + std::to_string(walls) + " wall, " + std::to_string(transmits) + " transmit, " +
              std::to_string(reflects) + " reflect): max ||xdot1 - xdot2|| = " + fmt("%.2e", worst) +
              " (tol 1e-10), region disagreements " + std::to_string(region_mismatch)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  const fs::path dir = fs::temp_directory_path() / "ehmc_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ostringstream sink;
  bool ok = true;
  std::string detail;
  for (const char* model : {"onenorm.model", "pospart.model"}) {
    cli::SampleOptions opt;
    opt.model_path = ehmc::testing::model_path(model);
    opt.n = 5000;
    opt.seed = 7;
    opt.out = (dir / "a.csv").string();
    opt.events = (dir / "a.jsonl").string();
    ok = ok && cli::cmd_sample(opt, sink, sink) == cli::kOk;
    opt.out = (dir / "b.csv").string();
    opt.events = (dir / "b.jsonl").string();
    ok = ok && cli::cmd_sample(opt, sink, sink) == cli::kOk;
    ok = ok && cli::cmd_replay((dir / "a.csv.manifest.json").string(), (dir / "r.csv").string(),
                               (dir / "r.jsonl").string(), sink, sink) == cli::kOk;
    const auto a = slurp(dir / "a.csv");
    const bool same = !a.empty() && a == slurp(dir / "b.csv") && a == slurp(dir / "r.csv") &&
                      slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl") &&
                      slurp(dir / "a.jsonl") == slurp(dir / "r.jsonl");
    ok = ok && same;
    detail += std::string(model) + (same ? " identical" : " DIFFERS") + "; ";
  }
  fs::remove_all(dir);
  return {ok, detail + "two runs and one manifest replay compared byte-for-byte (samples and events)"};
}

Verdict slab_cross_check() {
  const auto spec = ehmc::testing::gaussian_model(Vec::Zero(2), Mat::Identity(2, 2), Mat(Vec::Unit(2, 0)),
                                                  Vec::Zero(1));
  const auto out = run_chain(spec, 0, Vec::Zero(2), chain(10000, 10));
  Rng rng(11);
  const auto slab = oracle::slab_rejection_sample(spec, 1e-3, 10000, rng);
  std::vector<double> a(out.X.col(1).data(), out.X.col(1).data() + out.X.rows());
  std::vector<double> b(slab.points.col(1).data(), slab.points.col(1).data() + slab.points.rows());
  const double ks = oracle::ks_statistic(a, b);
  return {ks < 0.03, "two-sample KS " + fmt("%.4f", ks) + " (tol 0.03), 10000 sampler rows vs 10000 slab points (delta 1e-3)"};
}

}  // namespace

int main() {
  struct Criterion {
    std::string name;
    std::function<Verdict()> run;
    double time_limit = 0.0;  // seconds, 0 for none
  };
  const std::vector<Criterion> criteria{
      {"conditional-moment reproduction", conditional_moments, 10.0},
      {"two-region occupancy", two_region_occupancy, 30.0},
      {"hit-time oracle equivalence", hit_time_equivalence, 5.0},
      {"energy conservation", energy_conservation},
      {"manifold adherence", manifold_adherence},
      {"octant symmetry", octant_symmetry},
      {"continuity and null-space machinery", appendix_machinery},
      {"Evolve1/Evolve2 equivalence", evolve_equivalence},
      {"determinism", determinism},
      {"slab-rejection cross-check", slab_cross_check},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("[%.2fs", secs);
    if (criteria[i].time_limit > 0.0) {
      timing += fmt(", limit %.0fs", criteria[i].time_limit);
      v.pass = v.pass && secs <= criteria[i].time_limit;
    }
    if (!v.pass) ++failed;
    std::printf("criterion %2zu %s  %s: %s %s]\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].name.c_str(),
                v.detail.c_str(), timing.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

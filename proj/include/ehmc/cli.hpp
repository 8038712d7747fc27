#pragma once

// Command implementations behind the ehmc executable. Each returns the process
// exit code: 0 ok, 1 model/content failure, 2 I/O or parse failure, 3 runtime
// sampling failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ehmc/diagnostics.hpp"
#include "ehmc/io.hpp"
#include "ehmc/model.hpp"
#include "ehmc/sampler.hpp"
#include "ehmc/validate.hpp"

namespace ehmc::cli {

enum ExitCode : int { kOk = 0, kContent = 1, kIo = 2, kRuntime = 3 };

struct SampleOptions {
  std::string model_path;
  long n = 1000;
  std::uint64_t seed = 0;
  double t_max = std::numbers::pi / 2.0;
  std::optional<int> region;  // 1-based, as on the command line
  std::vector<double> init;
  long burn_in = 0;
  long thin = 1;
  std::string out;
  std::string events;
  int chains = 1;
  double tol = 1e-8;
};

namespace detail {

struct Loaded {
  std::optional<ModelSpec> spec;
  int code = kOk;
};

inline Loaded load(const std::string& path, std::ostream& err) {
  Loaded l;
  try {
    l.spec = load_model_file(path);
  } catch (const DocumentParseError& e) {
    err << "error: " << e.what() << '\n';
    l.code = kIo;
  } catch (const ModelError& e) {
    err << "error: " << path << ": " << e.what() << '\n';
    l.code = kContent;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    l.code = kIo;
  }
  return l;
}

// "s.csv" -> "s.c2.csv" for chain index 1 when several chains run.
inline std::string chain_path(const std::string& path, int chain, int chains) {
  if (chains <= 1 || path.empty()) return path;
  const std::filesystem::path p(path);
  auto name = p.stem().string() + ".c" + std::to_string(chain + 1) + p.extension().string();
  return (p.parent_path() / name).string();
}

struct Start {
  int region = 0;  // 0-based
  Vec x;
};

inline std::optional<Start> resolve_start(const ModelSpec& spec, const SampleOptions& opt,
                                          std::ostream& err) {
  Start s;
  if (opt.region) {
    s.region = *opt.region - 1;
  } else if (spec.init) {
    s.region = spec.init->region;
  } else {
    err << "error: --region not given and the model has no init block\n";
    return std::nullopt;
  }
  if (!opt.init.empty()) {
    s.x = Eigen::Map<const Vec>(opt.init.data(), static_cast<Eigen::Index>(opt.init.size()));
  } else if (spec.init) {
    s.x = spec.init->x;
  } else {
    err << "error: --init not given and the model has no init block\n";
    return std::nullopt;
  }
  if (s.x.size() != spec.n) {
    err << "error: --init has " << s.x.size() << " entries, model dimension is " << spec.n << '\n';
    return std::nullopt;
  }
  if (s.region < 0 || s.region >= spec.num_regions) {
    err << "error: --region must lie in [1, " << spec.num_regions << "]\n";
    return std::nullopt;
  }
  return s;
}

}  // namespace detail

inline int cmd_validate(const std::string& model_path, double tol, std::ostream& out,
                        std::ostream& err) {
  auto loaded = detail::load(model_path, err);
  if (!loaded.spec) return loaded.code;
  const auto report = validate_model(*loaded.spec, tol);
  out << format_report(report);
  const auto failures = report.failures();
  out << (failures.empty() ? "model OK" : "model INVALID") << " (" << report.items.size()
      << " checks, " << failures.size() << " failed)\n";
  return failures.empty() ? kOk : kContent;
}

inline int cmd_sample(const SampleOptions& opt, std::ostream& out, std::ostream& err) {
  auto loaded = detail::load(opt.model_path, err);
  if (!loaded.spec) return loaded.code;
  const auto& spec = *loaded.spec;
  if (opt.out.empty()) {
    err << "error: --out is required\n";
    return kIo;
  }
  const auto report = validate_model(spec, opt.tol);
  if (!report.ok()) {
    err << "error: model failed validation\n" << format_report(report);
    return kContent;
  }
  const auto start = detail::resolve_start(spec, opt, err);
  if (!start) return kContent;
  const auto check = initial_point_check(spec, start->region, start->x, opt.tol);
  if (!check.pass) {
    err << "error: invalid initial point\n" << check.describe() << '\n';
    return kContent;
  }

  ChainConfig cfg;
  cfg.n_samples = opt.n;
  cfg.t_max = opt.t_max;
  cfg.seed = opt.seed;
  cfg.burn_in = opt.burn_in;
  cfg.thin = opt.thin;
  cfg.record_events = !opt.events.empty();

  std::vector<ChainOutput> chains;
  try {
    chains = run_chains(spec, start->region, start->x, cfg, std::max(1, opt.chains));
  } catch (const StallError& e) {
    err << "error: sampling stalled: " << e.what() << '\n';
    return kRuntime;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    return kContent;
  } catch (const Error& e) {
    err << "error: sampling failed: " << e.what() << '\n';
    return kRuntime;
  }

  RunManifest manifest;
  manifest.model_path = opt.model_path;
  manifest.seed = opt.seed;
  manifest.t_max = opt.t_max;
  manifest.n_samples = opt.n;
  manifest.burn_in = opt.burn_in;
  manifest.thin = opt.thin;
  manifest.initial_region = start->region;
  manifest.initial_point.assign(start->x.data(), start->x.data() + start->x.size());
  manifest.chains = static_cast<int>(chains.size());

  const int n_chains = static_cast<int>(chains.size());
  for (int c = 0; c < n_chains; ++c) {
    const auto sample_path = detail::chain_path(opt.out, c, n_chains);
    std::ofstream s(sample_path, std::ios::binary);
    if (!s) {
      err << "error: cannot write '" << sample_path << "'\n";
      return kIo;
    }
    write_samples_csv(s, chains[static_cast<std::size_t>(c)]);
    manifest.sample_paths.push_back(sample_path);
    if (!opt.events.empty()) {
      const auto event_path = detail::chain_path(opt.events, c, n_chains);
      std::ofstream e(event_path, std::ios::binary);
      if (!e) {
        err << "error: cannot write '" << event_path << "'\n";
        return kIo;
      }
      write_events_jsonl(e, chains[static_cast<std::size_t>(c)]);
      manifest.event_paths.push_back(event_path);
    }
  }
  const auto manifest_path = opt.out + ".manifest.json";
  std::ofstream m(manifest_path, std::ios::binary);
  if (!m) {
    err << "error: cannot write '" << manifest_path << "'\n";
    return kIo;
  }
  m << manifest_json(manifest).dump(2) << '\n';
  out << "wrote " << opt.n << " samples x " << n_chains << " chain(s) to " << opt.out
      << " (manifest " << manifest_path << ")\n";
  return kOk;
}

// Re-runs a recorded invocation. Output paths can be redirected so the
// original files stay untouched.
inline int cmd_replay(const std::string& manifest_path, const std::string& out_override,
                      const std::string& events_override, std::ostream& out, std::ostream& err) {
  std::ifstream in(manifest_path);
  if (!in) {
    err << "error: cannot open manifest '" << manifest_path << "'\n";
    return kIo;
  }
  RunManifest m;
  try {
    m = manifest_from_json(nlohmann::json::parse(in));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
  SampleOptions opt;
  opt.model_path = m.model_path;
  opt.n = m.n_samples;
  opt.seed = m.seed;
  opt.t_max = m.t_max;
  opt.region = m.initial_region + 1;
  opt.init = m.initial_point;
  opt.burn_in = m.burn_in;
  opt.thin = m.thin;
  opt.chains = m.chains;
  opt.out = out_override.empty() ? (m.sample_paths.empty() ? "" : m.sample_paths.front()) : out_override;
  if (!events_override.empty()) {
    opt.events = events_override;
  } else if (!m.event_paths.empty()) {
    opt.events = m.event_paths.front();
  }
  if (opt.chains > 1 && out_override.empty()) {
    err << "error: replaying a multi-chain run needs --out\n";
    return kIo;
  }
  return cmd_sample(opt, out, err);
}

inline int cmd_diagnose(const SampleOptions& opt, std::ostream& out, std::ostream& err) {
  auto loaded = detail::load(opt.model_path, err);
  if (!loaded.spec) return loaded.code;
  const auto& spec = *loaded.spec;
  const auto report = validate_model(spec, opt.tol);
  if (!report.ok()) {
    err << "error: model failed validation\n" << format_report(report);
    return kContent;
  }
  const auto start = detail::resolve_start(spec, opt, err);
  if (!start) return kContent;
  const auto check = initial_point_check(spec, start->region, start->x, opt.tol);
  if (!check.pass) {
    err << "error: invalid initial point\n" << check.describe() << '\n';
    return kContent;
  }

  ChainConfig cfg;
  cfg.n_samples = opt.n;
  cfg.t_max = opt.t_max;
  cfg.seed = opt.seed;
  cfg.burn_in = opt.burn_in;
  cfg.thin = opt.thin;
  cfg.record_events = true;
  ChainOutput chain;
  try {
    chain = run_chain(spec, start->region, start->x, cfg);
  } catch (const StallError& e) {
    err << "error: sampling stalled: " << e.what() << '\n';
    return kRuntime;
  } catch (const Error& e) {
    err << "error: sampling failed: " << e.what() << '\n';
    return kRuntime;
  }
  const auto s = summarize_chain(spec, chain);
  out << "iterates: " << opt.n << '\n';
  out << "events: " << s.events << '\n';
  out << "max_manifold_residual: " << format_double(s.max_manifold_residual) << '\n';
  out << "max_constraint_violation: " << format_double(s.max_constraint_violation) << '\n';
  out << "max_energy_drift: " << format_double(s.max_energy_drift) << '\n';
  out << "occupancy:";
  for (long c : s.occupancy) out << ' ' << c;
  out << '\n';
  out << "regions_visited: "
      << std::count_if(s.occupancy.begin(), s.occupancy.end(), [](long c) { return c > 0; }) << '/'
      << spec.num_regions << '\n';
  out << "lag1_autocorrelation:";
  for (Eigen::Index i = 0; i < s.lag1.size(); ++i) out << ' ' << format_double(s.lag1[i]);
  out << '\n';
  return kOk;
}

}  // namespace ehmc::cli

#pragma once

// Output formats: samples as CSV, events as JSON lines, and the run manifest.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ehmc/sampler.hpp"

namespace ehmc {

inline constexpr const char* kToolVersion = "ehmc 0.1.0";

// 17 significant digits: exact round trip for doubles.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Header x1..xn,region,iterate; region is 1-based.
inline void write_samples_csv(std::ostream& out, const ChainOutput& chain) {
  const auto n = chain.X.cols();
  for (Eigen::Index c = 0; c < n; ++c) out << 'x' << (c + 1) << ',';
  out << "region,iterate\n";
  for (Eigen::Index i = 0; i < chain.X.rows(); ++i) {
    for (Eigen::Index c = 0; c < n; ++c) out << format_double(chain.X(i, c)) << ',';
    out << chain.R[static_cast<std::size_t>(i)] + 1 << ',' << chain.iterate[static_cast<std::size_t>(i)]
        << '\n';
  }
}

struct SampleTable {
  Mat X;
  std::vector<int> R;  // 0-based
  std::vector<long> iterate;
};

inline SampleTable read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("samples file is empty");
  const auto n = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ',') - 1);
  if (n < 1) throw Error("samples file header malformed");
  std::vector<std::vector<double>> rows;
  SampleTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || end != cell.data() + cell.size()) {
        throw Error("samples file: cannot parse '" + cell + "'");
      }
      row.push_back(v);
    }
    if (static_cast<Eigen::Index>(row.size()) != n + 2) throw Error("samples row has wrong width");
    table.R.push_back(static_cast<int>(row[static_cast<std::size_t>(n)]) - 1);
    table.iterate.push_back(static_cast<long>(row[static_cast<std::size_t>(n + 1)]));
    row.resize(static_cast<std::size_t>(n));
    rows.push_back(std::move(row));
  }
  table.X.resize(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index c = 0; c < n; ++c) table.X(static_cast<Eigen::Index>(i), c) = rows[i][static_cast<std::size_t>(c)];
  }
  return table;
}

inline nlohmann::json event_json(const EventRecord& ev) {
  return {{"iterate", ev.iterate},       {"time", ev.time},
          {"constraint", ev.hyperplane + 1}, {"kind", to_string(ev.kind)},
          {"j_from", ev.j_from + 1},     {"j_to", ev.j_to + 1},
          {"dV", ev.dV},                 {"energy_pre", ev.energy_pre},
          {"energy_post", ev.energy_post}};
}

inline void write_events_jsonl(std::ostream& out, const ChainOutput& chain) {
  for (const auto& ev : chain.events) out << event_json(ev).dump() << '\n';
}

struct RunManifest {
  std::string model_path;
  std::uint64_t seed = 0;
  double t_max = 0.0;
  long n_samples = 0;
  long burn_in = 0;
  long thin = 1;
  int initial_region = 0;  // 0-based
  std::vector<double> initial_point;
  std::vector<std::string> sample_paths;
  std::vector<std::string> event_paths;
  int chains = 1;
  std::string tool_version = kToolVersion;
};

inline nlohmann::json manifest_json(const RunManifest& m) {
  return {{"model", m.model_path},
          {"seed", m.seed},
          {"tmax", m.t_max},
          {"n", m.n_samples},
          {"burnin", m.burn_in},
          {"thin", m.thin},
          {"region", m.initial_region + 1},
          {"init", m.initial_point},
          {"samples", m.sample_paths},
          {"events", m.event_paths},
          {"chains", m.chains},
          {"version", m.tool_version}};
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.model_path = j.at("model").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.t_max = j.at("tmax").get<double>();
    m.n_samples = j.at("n").get<long>();
    m.burn_in = j.at("burnin").get<long>();
    m.thin = j.at("thin").get<long>();
    m.initial_region = j.at("region").get<int>() - 1;
    m.initial_point = j.at("init").get<std::vector<double>>();
    m.sample_paths = j.at("samples").get<std::vector<std::string>>();
    m.event_paths = j.at("events").get<std::vector<std::string>>();
    m.chains = j.at("chains").get<int>();
    m.tool_version = j.at("version").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed run manifest: ") + e.what());
  }
  return m;
}

}  // namespace ehmc

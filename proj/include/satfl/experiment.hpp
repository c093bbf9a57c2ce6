#pragma once

// Experiment drivers: accuracy-vs-time runs, the data-volume sweep over ring
// sizes, and CSV / JSON export.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "satfl/config.hpp"
#include "satfl/simulation.hpp"

namespace satfl {

inline constexpr const char* kCodeVersion = "0.1.0";

struct MetricsRow {
  int iteration = 0;
  double time_s = 0.0;
  double accuracy = 0.0;
  double plane_bits = 0.0;  // mean aggregation bits per plane
  std::uint64_t cum_bits = 0;  // cumulative over all planes and iterations
  std::vector<std::uint64_t> per_plane_bits;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct MetricsLog {
  ExperimentConfig config;
  std::vector<MetricsRow> rows;
};

using ProgressFn = std::function<void(const IterationMetrics&)>;

inline MetricsLog run_experiment(const ExperimentConfig& cfg, const TrainTest& data,
                                 const ProgressFn& progress = {}) {
  validate(cfg);
  FederatedSimulation sim(cfg.to_simulation(), data.train, data.test);
  MetricsLog log{cfg, {}};
  std::uint64_t cum = 0;
  for (int n = 0; n < cfg.rounds; ++n) {
    const auto m = sim.run_global_iteration();
    cum += m.total_bits;
    log.rows.push_back({m.iteration, m.end_s, m.accuracy,
                        static_cast<double>(m.total_bits) / static_cast<double>(m.plane_bits.size()), cum,
                        m.plane_bits});
    if (progress) progress(m);
  }
  return log;
}

inline MetricsLog run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, load_datasets(cfg)); }

inline const char* kCsvHeader = "iter,time_s,accuracy,plane_bits,cum_bits";

inline std::string to_csv(const MetricsLog& log) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : log.rows) {
    for (double v : {r.time_s, r.accuracy, r.plane_bits})
      if (!std::isfinite(v)) throw ContractViolation("to_csv: non-finite value in metrics log");
    out += std::to_string(r.iteration) + "," + format_number(r.time_s) + "," + format_number(r.accuracy) + "," +
           format_number(r.plane_bits) + "," + std::to_string(r.cum_bits) + "\n";
  }
  return out;
}

inline nlohmann::json manifest(const ExperimentConfig& cfg) {
  return {{"code_version", kCodeVersion},
          {"seed", cfg.seed},
          {"scheme", std::string(to_string(cfg.scheme))},
          {"q", cfg.q},
          {"dataset", std::string(to_string(cfg.source))},
          {"config", serialize_config(cfg)}};
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << body;
  if (!out) throw IoError("write failed for " + path.string());
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

}  // namespace detail

struct ExportedFiles {
  std::filesystem::path csv;
  std::filesystem::path manifest;
};

// Writes <dir>/metrics.csv and <dir>/manifest.json.
inline ExportedFiles export_log(const MetricsLog& log, const std::filesystem::path& dir) {
  if (log.rows.empty()) throw ContractViolation("export: empty metrics log");
  detail::ensure_dir(dir);
  ExportedFiles f{dir / "metrics.csv", dir / "manifest.json"};
  detail::write_file(f.csv, to_csv(log));
  detail::write_file(f.manifest, manifest(log.config).dump(2) + "\n");
  return f;
}

// ---------------------------------------------------------------------------
// Data-volume sweep

struct SweepRow {
  int kp = 0;
  double q = 0.0;
  Scheme scheme = Scheme::SIA;
  double bits_per_iteration = 0.0;  // steady-state mean over the averaging iterations
};

inline ExperimentConfig sweep_point(const ExperimentConfig& base, int kp, double q, Scheme scheme) {
  ExperimentConfig c = base;
  c.planes = 1;
  c.sats_per_plane = kp;
  c.q = q;
  c.scheme = scheme;
  c.rounds = base.warmup + base.average;
  return c;
}

// Single-plane total transmitted data per global iteration for each
// (K_p, q, scheme). The first `warmup` iterations are discarded.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const TrainTest& data,
                                       const std::vector<Scheme>& schemes,
                                       const std::function<void(const SweepRow&)>& progress = {}) {
  validate(base);
  std::vector<SweepRow> rows;
  for (double q : base.q_list)
    for (Scheme scheme : schemes)
      for (int kp = base.kp_min; kp <= base.kp_max; ++kp) {
        const auto c = sweep_point(base, kp, q, scheme);
        FederatedSimulation sim(c.to_simulation(), data.train, Dataset{data.test.feature_dim, data.test.num_classes, {}, {}});
        double acc = 0.0;
        for (int n = 0; n < c.rounds; ++n) {
          const auto m = sim.run_global_iteration();
          if (n >= base.warmup) acc += static_cast<double>(m.total_bits);
        }
        rows.push_back({kp, q, scheme, acc / base.average});
        if (progress) progress(rows.back());
      }
  return rows;
}

inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "kp,q,scheme,bits_per_iteration\n";
  for (const auto& r : rows)
    out += std::to_string(r.kp) + "," + format_number(r.q) + "," + std::string(to_string(r.scheme)) + "," +
           format_number(r.bits_per_iteration) + "\n";
  return out;
}

}  // namespace satfl

// satfl: command-line front end.
//
//   satfl run      --config cfg.ini [--scheme S] [--q Q] [--seed N] [--rounds N] [--out DIR]
//   satfl sweep    --config cfg.ini [--kp-min 8] [--kp-max 28] [--q 0.01,0.1] [--out DIR]
//   satfl windows  --config cfg.ini [--hours 24] [--plane P]
//   satfl validate --config cfg.ini
//
// Exit codes: 0 success, 2 invalid configuration, 3 dataset ingestion
// failure, 1 anything else.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "satfl/satfl.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIngestion = 3;

satfl::ExperimentConfig load_or_default(const std::string& path) {
  return path.empty() ? satfl::ExperimentConfig{} : satfl::load_config(path);
}

std::vector<double> parse_q_list(const std::string& text) {
  auto parsed = satfl::parse_config("[sweep]\nq_list = " + text + "\n");
  return parsed.q_list;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated learning over LEO constellations with sparse incremental aggregation"};
  app.require_subcommand(1);

  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI experiment recipe (defaults used when omitted)")
        ->check(CLI::ExistingFile);
  };

  auto* run = app.add_subcommand("run", "Run one experiment and write metrics.csv + manifest.json");
  add_config(run);
  std::optional<std::string> scheme_opt;
  std::optional<double> q_opt;
  std::optional<std::uint64_t> seed_opt;
  std::optional<int> rounds_opt;
  std::optional<std::string> out_opt;
  run->add_option("--scheme", scheme_opt, "DENSE_IA | SIA | CLSIA | NO_ISL_DIRECT");
  run->add_option("--q", q_opt, "sparsification ratio in (0, 1]");
  run->add_option("--seed", seed_opt, "experiment seed");
  run->add_option("--rounds", rounds_opt, "number of global iterations");
  run->add_option("--out", out_opt, "output directory");

  auto* sweep = app.add_subcommand("sweep", "Data volume per global iteration versus ring size");
  add_config(sweep);
  std::optional<int> kp_min, kp_max;
  std::optional<std::string> q_list, sweep_out;
  std::string sweep_schemes = "SIA,CLSIA,NO_ISL_DIRECT";
  sweep->add_option("--kp-min", kp_min, "smallest ring size");
  sweep->add_option("--kp-max", kp_max, "largest ring size");
  sweep->add_option("--q", q_list, "comma-separated sparsification ratios");
  sweep->add_option("--schemes", sweep_schemes, "comma-separated schemes")->capture_default_str();
  sweep->add_option("--out", sweep_out, "output directory");

  auto* windows = app.add_subcommand("windows", "Print ground-station visibility windows");
  add_config(windows);
  double hours = 24.0;
  int plane_filter = -1;
  windows->add_option("--hours", hours, "horizon in hours")->capture_default_str();
  windows->add_option("--plane", plane_filter, "only this plane (default: all)");

  auto* check = app.add_subcommand("validate", "Check a config file and print the normalised form");
  add_config(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    auto cfg = load_or_default(config_path);

    if (*run) {
      if (scheme_opt) {
        auto s = satfl::parse_scheme(*scheme_opt);
        if (!s) throw satfl::ValidationError("--scheme: unknown scheme '" + *scheme_opt + "'");
        cfg.scheme = *s;
      }
      if (q_opt) cfg.q = *q_opt;
      if (seed_opt) cfg.seed = *seed_opt;
      if (rounds_opt) cfg.rounds = *rounds_opt;
      if (out_opt) cfg.output_dir = *out_opt;
      satfl::validate(cfg);
      const auto data = satfl::load_datasets(cfg);
      const auto log = satfl::run_experiment(cfg, data, [](const satfl::IterationMetrics& m) {
        std::fprintf(stderr, "iter %4d  t=%10.1f s  acc=%.4f  bits=%llu\n", m.iteration, m.end_s, m.accuracy,
                     static_cast<unsigned long long>(m.total_bits));
      });
      const auto files = satfl::export_log(log, cfg.output_dir);
      std::cout << "wrote " << files.csv.string() << " and " << files.manifest.string() << "\n";
      return 0;
    }

    if (*sweep) {
      if (kp_min) cfg.kp_min = *kp_min;
      if (kp_max) cfg.kp_max = *kp_max;
      if (q_list) cfg.q_list = parse_q_list(*q_list);
      if (sweep_out) cfg.output_dir = *sweep_out;
      std::vector<satfl::Scheme> schemes;
      std::stringstream ss(sweep_schemes);
      std::string item;
      while (std::getline(ss, item, ',')) {
        auto s = satfl::parse_scheme(item);
        if (!s)
          throw satfl::ValidationError("--schemes: unknown scheme '" + item + "'");
        schemes.push_back(*s);
      }
      satfl::validate(cfg);
      const auto data = satfl::load_datasets(cfg);
      const auto rows = satfl::run_sweep(cfg, data, schemes, [](const satfl::SweepRow& r) {
        std::fprintf(stderr, "K_p=%2d q=%g %-13s %.0f bits/iteration\n", r.kp, r.q,
                     std::string(satfl::to_string(r.scheme)).c_str(), r.bits_per_iteration);
      });
      satfl::detail::ensure_dir(cfg.output_dir);
      const auto path = std::filesystem::path(cfg.output_dir) / "sweep.csv";
      satfl::detail::write_file(path, satfl::sweep_to_csv(rows));
      std::cout << "wrote " << path.string() << "\n";
      return 0;
    }

    if (*windows) {
      const auto sim = cfg.to_simulation();
      const auto& c = sim.constellation;
      const auto planes = satfl::walker_star(c.planes, c.sats_per_plane, c.altitude_m, c.inclination_rad);
      std::cout << "plane,sat,start_s,end_s,duration_s\n";
      for (int p = 0; p < c.planes; ++p) {
        if (plane_filter >= 0 && p != plane_filter) continue;
        for (int k = 0; k < c.sats_per_plane; ++k)
          for (const auto& w : satfl::visibility_windows(planes[static_cast<std::size_t>(p)], k, sim.gs, 0.0,
                                                         hours * 3600.0, cfg.visibility_step_s))
            std::cout << p << "," << k << "," << satfl::format_number(w.start_s) << ","
                      << satfl::format_number(w.end_s) << "," << satfl::format_number(w.end_s - w.start_s) << "\n";
      }
      return 0;
    }

    if (*check) {
      satfl::validate(cfg);
      std::cout << satfl::serialize_config(cfg);
      return 0;
    }
  } catch (const satfl::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const satfl::IngestionError& e) {
    std::cerr << "dataset error: " << e.what() << "\n";
    return kExitIngestion;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

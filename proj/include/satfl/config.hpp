#pragma once

// Experiment configuration: an INI document with one section per concern.
// Values are stored in file units (km, degrees, dBm) so that
// parse(serialize(c)) == c holds exactly.
//
//   [constellation]  planes, sats_per_plane, altitude_km, inclination_deg
//   [ground_station] latitude_deg, longitude_deg, min_elevation_deg
//   [link]           tx_power_dbm, gain_tx_dbi, gain_rx_dbi, bandwidth_hz,
//                    carrier_hz, noise_temp_k
//   [learning]       learning_rate, local_epochs, batch_size, rounds,
//                    compute_time_s
//   [experiment]     scheme, q, seed, value_bits, visibility_step_s, output_dir
//   [dataset]        source (synthetic|mnist), mnist_dir, synthetic_train,
//                    synthetic_test, synthetic_seed
//   [sweep]          kp_min, kp_max, q_list, warmup, average

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "satfl/dataset.hpp"
#include "satfl/errors.hpp"
#include "satfl/link.hpp"
#include "satfl/protocol.hpp"
#include "satfl/simulation.hpp"

namespace satfl {

enum class DatasetSource { Synthetic, Mnist };

struct ExperimentConfig {
  // constellation
  int planes = 5;
  int sats_per_plane = 8;
  double altitude_km = 2000.0;
  double inclination_deg = 85.0;
  // ground_station
  double latitude_deg = 53.08;
  double longitude_deg = 8.80;
  double min_elevation_deg = 10.0;
  // link
  double tx_power_dbm = 40.0;
  double gain_tx_dbi = 32.13;
  double gain_rx_dbi = 32.13;
  double bandwidth_hz = 500e6;
  double carrier_hz = 20e9;
  double noise_temp_k = 354.0;
  // learning
  double learning_rate = 0.1;
  int local_epochs = 1;
  int batch_size = 32;
  int rounds = 500;
  double compute_time_s = 1.0;
  // experiment
  Scheme scheme = Scheme::CLSIA;
  double q = 0.01;
  std::uint64_t seed = 1;
  int value_bits = 32;
  double visibility_step_s = 5.0;
  std::string output_dir = "out";
  // dataset
  DatasetSource source = DatasetSource::Synthetic;
  std::string mnist_dir = "data/mnist";
  int synthetic_train = 12000;
  int synthetic_test = 2000;
  std::uint64_t synthetic_seed = 7;
  // sweep
  int kp_min = 8;
  int kp_max = 28;
  std::vector<double> q_list{0.01, 0.1};
  int warmup = 1;
  int average = 10;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

  SimulationConfig to_simulation() const {
    SimulationConfig s;
    s.constellation = {planes, sats_per_plane, altitude_km * 1e3, deg_to_rad(inclination_deg)};
    s.gs = {deg_to_rad(latitude_deg), deg_to_rad(longitude_deg), deg_to_rad(min_elevation_deg)};
    s.link = {dbm_to_watt(tx_power_dbm), gain_tx_dbi, gain_rx_dbi, bandwidth_hz, carrier_hz, noise_temp_k};
    s.hp = {learning_rate, local_epochs, static_cast<std::size_t>(batch_size), rounds, seed};
    s.scheme = scheme;
    s.q = q;
    s.value_bits = static_cast<std::uint64_t>(value_bits);
    s.compute_time_s = compute_time_s;
    s.visibility_step_s = visibility_step_s;
    return s;
  }
};

inline std::string_view to_string(DatasetSource s) {
  return s == DatasetSource::Mnist ? "mnist" : "synthetic";
}

// Shortest text that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_number(v[i]);
  return out;
}

namespace detail {

struct ConfigReader {
  const boost::property_tree::ptree& tree;
  std::vector<std::string> errors;

  const boost::property_tree::ptree* section(const char* name) {
    auto it = tree.find(name);
    return it == tree.not_found() ? nullptr : &it->second;
  }
  std::optional<std::string> raw(const char* sec, const char* key) {
    const auto* s = section(sec);
    if (s == nullptr) return std::nullopt;
    auto v = s->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }
  void number(const char* sec, const char* key, double& out) {
    if (auto v = raw(sec, key)) {
      double d = 0.0;
      auto r = std::from_chars(v->data(), v->data() + v->size(), d);
      if (r.ec != std::errc{} || r.ptr != v->data() + v->size())
        errors.push_back(std::string(sec) + "." + key + ": not a number: '" + *v + "'");
      else
        out = d;
    }
  }
  template <typename Int>
  void integer(const char* sec, const char* key, Int& out) {
    if (auto v = raw(sec, key)) {
      Int i{};
      auto r = std::from_chars(v->data(), v->data() + v->size(), i);
      if (r.ec != std::errc{} || r.ptr != v->data() + v->size())
        errors.push_back(std::string(sec) + "." + key + ": not an integer: '" + *v + "'");
      else
        out = i;
    }
  }
  void text(const char* sec, const char* key, std::string& out) {
    if (auto v = raw(sec, key)) out = *v;
  }
};

inline const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"constellation", {"planes", "sats_per_plane", "altitude_km", "inclination_deg"}},
      {"ground_station", {"latitude_deg", "longitude_deg", "min_elevation_deg"}},
      {"link", {"tx_power_dbm", "gain_tx_dbi", "gain_rx_dbi", "bandwidth_hz", "carrier_hz", "noise_temp_k"}},
      {"learning", {"learning_rate", "local_epochs", "batch_size", "rounds", "compute_time_s"}},
      {"experiment", {"scheme", "q", "seed", "value_bits", "visibility_step_s", "output_dir"}},
      {"dataset", {"source", "mnist_dir", "synthetic_train", "synthetic_test", "synthetic_seed"}},
      {"sweep", {"kp_min", "kp_max", "q_list", "warmup", "average"}},
  };
  return keys;
}

}  // namespace detail

// Range checks; returns one message per offending key.
inline std::vector<std::string> validation_errors(const ExperimentConfig& c) {
  std::vector<std::string> e;
  auto need = [&](bool ok, const char* key, const std::string& what) {
    if (!ok) e.push_back(std::string(key) + ": " + what);
  };
  need(c.planes >= 1, "constellation.planes", "must be >= 1");
  need(c.sats_per_plane >= 2, "constellation.sats_per_plane", "must be >= 2");
  need(c.altitude_km > 0, "constellation.altitude_km", "must be > 0");
  need(c.inclination_deg >= 0 && c.inclination_deg <= 180, "constellation.inclination_deg", "must lie in [0, 180]");
  need(std::abs(c.latitude_deg) <= 90, "ground_station.latitude_deg", "must lie in [-90, 90]");
  need(c.min_elevation_deg >= 0 && c.min_elevation_deg < 90, "ground_station.min_elevation_deg", "must lie in [0, 90)");
  need(c.gain_tx_dbi > 0, "link.gain_tx_dbi", "must be > 0");
  need(c.gain_rx_dbi > 0, "link.gain_rx_dbi", "must be > 0");
  need(c.bandwidth_hz > 0, "link.bandwidth_hz", "must be > 0");
  need(c.carrier_hz > 0, "link.carrier_hz", "must be > 0");
  need(c.noise_temp_k > 0, "link.noise_temp_k", "must be > 0");
  need(c.learning_rate > 0, "learning.learning_rate", "must be > 0");
  need(c.local_epochs >= 1, "learning.local_epochs", "must be >= 1");
  need(c.batch_size >= 1, "learning.batch_size", "must be >= 1");
  need(c.rounds >= 1, "learning.rounds", "must be >= 1");
  need(c.compute_time_s >= 0, "learning.compute_time_s", "must be >= 0");
  need(c.q > 0 && c.q <= 1, "experiment.q", "must lie in (0, 1]");
  need(c.seed >= 1, "experiment.seed", "must be >= 1");
  need(c.value_bits >= 1, "experiment.value_bits", "must be >= 1");
  need(c.visibility_step_s > 0, "experiment.visibility_step_s", "must be > 0");
  need(c.synthetic_train >= 1, "dataset.synthetic_train", "must be >= 1");
  need(c.synthetic_test >= 1, "dataset.synthetic_test", "must be >= 1");
  need(c.kp_min >= 2 && c.kp_max >= c.kp_min, "sweep.kp_min/kp_max", "need 2 <= kp_min <= kp_max");
  need(!c.q_list.empty(), "sweep.q_list", "must not be empty");
  for (double q : c.q_list) need(q > 0 && q <= 1, "sweep.q_list", "entries must lie in (0, 1]");
  need(c.warmup >= 0, "sweep.warmup", "must be >= 0");
  need(c.average >= 1, "sweep.average", "must be >= 1");
  return e;
}

inline void validate(const ExperimentConfig& c) {
  const auto errs = validation_errors(c);
  if (errs.empty()) return;
  std::string msg = "invalid config:";
  for (const auto& s : errs) msg += "\n  " + s;
  throw ValidationError(msg);
}

inline ExperimentConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(std::string("invalid config: ") + e.what());
  }

  std::vector<std::string> unknown;
  const auto& known = detail::known_keys();
  for (const auto& [sec, body] : tree) {
    auto it = known.find(sec);
    if (it == known.end()) {
      if (body.empty()) unknown.push_back(sec);  // top-level key outside a section
      else unknown.push_back("[" + sec + "]");
      continue;
    }
    for (const auto& [key, _] : body)
      if (!it->second.contains(key)) unknown.push_back(sec + "." + key);
  }

  ExperimentConfig c;
  detail::ConfigReader r{tree, {}};
  for (const auto& u : unknown) r.errors.push_back(u + ": unknown key");
  r.integer("constellation", "planes", c.planes);
  r.integer("constellation", "sats_per_plane", c.sats_per_plane);
  r.number("constellation", "altitude_km", c.altitude_km);
  r.number("constellation", "inclination_deg", c.inclination_deg);
  r.number("ground_station", "latitude_deg", c.latitude_deg);
  r.number("ground_station", "longitude_deg", c.longitude_deg);
  r.number("ground_station", "min_elevation_deg", c.min_elevation_deg);
  r.number("link", "tx_power_dbm", c.tx_power_dbm);
  r.number("link", "gain_tx_dbi", c.gain_tx_dbi);
  r.number("link", "gain_rx_dbi", c.gain_rx_dbi);
  r.number("link", "bandwidth_hz", c.bandwidth_hz);
  r.number("link", "carrier_hz", c.carrier_hz);
  r.number("link", "noise_temp_k", c.noise_temp_k);
  r.number("learning", "learning_rate", c.learning_rate);
  r.integer("learning", "local_epochs", c.local_epochs);
  r.integer("learning", "batch_size", c.batch_size);
  r.integer("learning", "rounds", c.rounds);
  r.number("learning", "compute_time_s", c.compute_time_s);
  if (auto s = r.raw("experiment", "scheme")) {
    if (auto sc = parse_scheme(*s)) c.scheme = *sc;
    else r.errors.push_back("experiment.scheme: expected DENSE_IA, SIA, CLSIA or NO_ISL_DIRECT, got '" + *s + "'");
  }
  r.number("experiment", "q", c.q);
  r.integer("experiment", "seed", c.seed);
  r.integer("experiment", "value_bits", c.value_bits);
  r.number("experiment", "visibility_step_s", c.visibility_step_s);
  r.text("experiment", "output_dir", c.output_dir);
  if (auto s = r.raw("dataset", "source")) {
    if (*s == "synthetic") c.source = DatasetSource::Synthetic;
    else if (*s == "mnist") c.source = DatasetSource::Mnist;
    else r.errors.push_back("dataset.source: expected synthetic or mnist, got '" + *s + "'");
  }
  r.text("dataset", "mnist_dir", c.mnist_dir);
  r.integer("dataset", "synthetic_train", c.synthetic_train);
  r.integer("dataset", "synthetic_test", c.synthetic_test);
  r.integer("dataset", "synthetic_seed", c.synthetic_seed);
  r.integer("sweep", "kp_min", c.kp_min);
  r.integer("sweep", "kp_max", c.kp_max);
  if (auto s = r.raw("sweep", "q_list")) {
    c.q_list.clear();
    std::stringstream ss(*s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      double d = 0.0;
      auto res = std::from_chars(item.data(), item.data() + item.size(), d);
      if (res.ec != std::errc{} || res.ptr != item.data() + item.size())
        r.errors.push_back("sweep.q_list: not a number: '" + item + "'");
      else
        c.q_list.push_back(d);
    }
  }
  r.integer("sweep", "warmup", c.warmup);
  r.integer("sweep", "average", c.average);

  for (const auto& e : validation_errors(c)) r.errors.push_back(e);
  if (!r.errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& s : r.errors) msg += "\n  " + s;
    throw ValidationError(msg);
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  auto num = [](double v) { return format_number(v); };
  o << "[constellation]\n"
    << "planes = " << c.planes << "\n"
    << "sats_per_plane = " << c.sats_per_plane << "\n"
    << "altitude_km = " << num(c.altitude_km) << "\n"
    << "inclination_deg = " << num(c.inclination_deg) << "\n\n"
    << "[ground_station]\n"
    << "latitude_deg = " << num(c.latitude_deg) << "\n"
    << "longitude_deg = " << num(c.longitude_deg) << "\n"
    << "min_elevation_deg = " << num(c.min_elevation_deg) << "\n\n"
    << "[link]\n"
    << "tx_power_dbm = " << num(c.tx_power_dbm) << "\n"
    << "gain_tx_dbi = " << num(c.gain_tx_dbi) << "\n"
    << "gain_rx_dbi = " << num(c.gain_rx_dbi) << "\n"
    << "bandwidth_hz = " << num(c.bandwidth_hz) << "\n"
    << "carrier_hz = " << num(c.carrier_hz) << "\n"
    << "noise_temp_k = " << num(c.noise_temp_k) << "\n\n"
    << "[learning]\n"
    << "learning_rate = " << num(c.learning_rate) << "\n"
    << "local_epochs = " << c.local_epochs << "\n"
    << "batch_size = " << c.batch_size << "\n"
    << "rounds = " << c.rounds << "\n"
    << "compute_time_s = " << num(c.compute_time_s) << "\n\n"
    << "[experiment]\n"
    << "scheme = " << to_string(c.scheme) << "\n"
    << "q = " << num(c.q) << "\n"
    << "seed = " << c.seed << "\n"
    << "value_bits = " << c.value_bits << "\n"
    << "visibility_step_s = " << num(c.visibility_step_s) << "\n"
    << "output_dir = " << c.output_dir << "\n\n"
    << "[dataset]\n"
    << "source = " << to_string(c.source) << "\n"
    << "mnist_dir = " << c.mnist_dir << "\n"
    << "synthetic_train = " << c.synthetic_train << "\n"
    << "synthetic_test = " << c.synthetic_test << "\n"
    << "synthetic_seed = " << c.synthetic_seed << "\n\n"
    << "[sweep]\n"
    << "kp_min = " << c.kp_min << "\n"
    << "kp_max = " << c.kp_max << "\n"
    << "q_list = " << format_list(c.q_list) << "\n"
    << "warmup = " << c.warmup << "\n"
    << "average = " << c.average << "\n";
  return o.str();
}

// Train/test data named by the config. Throws IngestionError for missing
// MNIST files.
inline TrainTest load_datasets(const ExperimentConfig& c) {
  if (c.source == DatasetSource::Mnist) return load_mnist(c.mnist_dir);
  SyntheticSpec spec;
  spec.train_samples = static_cast<std::size_t>(c.synthetic_train);
  spec.test_samples = static_cast<std::size_t>(c.synthetic_test);
  spec.seed = c.synthetic_seed;
  return make_synthetic(spec);
}

}  // namespace satfl

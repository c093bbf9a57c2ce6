#pragma once

// Whole-constellation driver: one global iteration runs a round in every
// plane (or the no-ISL baseline), sums the plane aggregates at the PS and
// applies the FedAvg update.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "satfl/learn.hpp"
#include "satfl/link.hpp"
#include "satfl/orbital.hpp"
#include "satfl/protocol.hpp"
#include "satfl/sparse.hpp"

namespace satfl {

struct ConstellationSpec {
  int planes = 5;
  int sats_per_plane = 8;
  double altitude_m = 2.0e6;
  double inclination_rad = deg_to_rad(85.0);

  int total_sats() const { return planes * sats_per_plane; }
};

struct SimulationConfig {
  ConstellationSpec constellation{};
  GroundStation gs{};
  LinkParams link{};
  HyperParams hp{};
  Scheme scheme = Scheme::CLSIA;
  double q = 0.01;
  std::uint64_t value_bits = 32;
  double compute_time_s = 1.0;
  double visibility_step_s = kDefaultVisibilityStep;
};

struct IterationMetrics {
  int iteration = 0;  // 1-based
  double start_s = 0.0;
  double end_s = 0.0;
  std::vector<std::uint64_t> plane_bits;  // aggregation-phase bits per plane
  std::uint64_t total_bits = 0;
  std::uint64_t gs_bits = 0;
  std::uint64_t dist_bits = 0;
  double accuracy = 0.0;
};

// Deterministic per-(seed, round, satellite) generator for local SGD.
inline std::mt19937_64 training_rng(std::uint64_t seed, int round, int sat_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(round), static_cast<std::uint32_t>(sat_id)};
  return std::mt19937_64(seq);
}

class FederatedSimulation {
 public:
  // Replaces local training; receives (satellite id, current global weights).
  using GradientOverride = std::function<DenseVector(int, const DenseVector&)>;

  FederatedSimulation(SimulationConfig cfg, const Dataset& train, Dataset test)
      : cfg_(std::move(cfg)), test_(std::move(test)) {
    cfg_.link.validate();
    cfg_.gs.validate();
    const auto& c = cfg_.constellation;
    planes_ = walker_star(c.planes, c.sats_per_plane, c.altitude_m, c.inclination_rad);
    shape_ = ModelShape::of(train);
    sizes_ = SizeModel{cfg_.value_bits, shape_.num_params()};
    params_.sizes = sizes_;
    params_.Q = q_to_Q(cfg_.q, sizes_.dim);
    params_.compute_time_s = cfg_.compute_time_s;

    shards_ = partition(train, static_cast<std::size_t>(c.total_sats()), cfg_.hp.seed);
    for (int id = 0; id < c.total_sats(); ++id) {
      SatelliteState s;
      s.id = id;
      s.data_size = static_cast<double>(shards_[static_cast<std::size_t>(id)].size());
      s.error = ErrorState(sizes_.dim);
      total_data_ += s.data_size;
      sats_.push_back(std::move(s));
    }
    if (cfg_.scheme != Scheme::NoIslDirect)
      for (int p = 0; p < c.planes; ++p)
        rings_.push_back(make_ring(planes_[static_cast<std::size_t>(p)], p, p * c.sats_per_plane, cfg_.link));
    vis_ = std::make_unique<ConstellationVisibility>(planes_, cfg_.gs, cfg_.link, cfg_.visibility_step_s);
    weights_ = DenseVector(sizes_.dim);
  }

  IterationMetrics run_global_iteration() {
    IterationMetrics m;
    m.iteration = iteration_ + 1;
    m.start_s = clock_;
    const DenseVector w = weights_;
    const int round = iteration_;
    GradientFn grad_fn = [&](int sat_id) {
      if (override_) return override_(sat_id, w);
      auto rng = training_rng(cfg_.hp.seed, round, sat_id);
      return gradient(sat_learn_proc(w, shards_[static_cast<std::size_t>(sat_id)], cfg_.hp, rng), w);
    };

    DenseVector sum(sizes_.dim);
    last_rounds_.clear();
    double end = clock_;
    if (cfg_.scheme == Scheme::NoIslDirect) {
      auto r = run_no_isl_round(sats_, *vis_, params_, grad_fn, clock_, round);
      sum += r.aggregate;
      const auto k = static_cast<std::size_t>(cfg_.constellation.sats_per_plane);
      m.plane_bits.assign(static_cast<std::size_t>(cfg_.constellation.planes), 0);
      for (const auto& hop : r.hops) m.plane_bits[static_cast<std::size_t>(hop.src_id) / k] += hop.bits;
      m.gs_bits = r.metrics.gs_bits;
      end = r.metrics.wallclock_s;
      last_rounds_.push_back(std::move(r));
    } else {
      const auto k = static_cast<std::size_t>(cfg_.constellation.sats_per_plane);
      for (std::size_t p = 0; p < rings_.size(); ++p) {
        std::span<SatelliteState> plane_sats(sats_.data() + p * k, k);
        auto r = run_round(rings_[p], plane_sats, *vis_, cfg_.scheme, params_, grad_fn, clock_, round);
        sum += r.aggregate;
        m.plane_bits.push_back(r.metrics.total_plane_bits);
        m.gs_bits += r.metrics.gs_bits;
        m.dist_bits += r.metrics.dist_bits;
        end = std::max(end, r.metrics.wallclock_s);
        last_rounds_.push_back(std::move(r));
      }
    }
    for (auto b : m.plane_bits) m.total_bits += b;

    weights_ = global_update(w, sum, total_data_);
    clock_ = end;
    ++iteration_;
    m.end_s = end;
    m.accuracy = test_.empty() ? 0.0 : evaluate(weights_, test_);
    return m;
  }

  void set_gradient_override(GradientOverride f) { override_ = std::move(f); }

  const DenseVector& weights() const { return weights_; }
  double clock() const { return clock_; }
  int iteration() const { return iteration_; }
  double total_data() const { return total_data_; }
  std::size_t Q() const { return params_.Q; }
  const SizeModel& sizes() const { return sizes_; }
  const std::vector<Dataset>& shards() const { return shards_; }
  const std::vector<SatelliteState>& satellites() const { return sats_; }
  const std::vector<RingTopology>& rings() const { return rings_; }
  const std::vector<RoundResult>& last_rounds() const { return last_rounds_; }
  const SimulationConfig& config() const { return cfg_; }

 private:
  SimulationConfig cfg_;
  Dataset test_;
  std::vector<OrbitPlane> planes_;
  ModelShape shape_;
  SizeModel sizes_;
  ProtocolParams params_;
  std::vector<Dataset> shards_;
  std::vector<SatelliteState> sats_;
  std::vector<RingTopology> rings_;
  std::unique_ptr<ConstellationVisibility> vis_;
  DenseVector weights_;
  double total_data_ = 0.0;
  double clock_ = 0.0;
  int iteration_ = 0;
  GradientOverride override_;
  std::vector<RoundResult> last_rounds_;
};

}  // namespace satfl

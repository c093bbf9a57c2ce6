#pragma once

// One federated-learning round per orbital plane over the intra-plane ring:
// source/sink selection, parameter distribution, local computation and
// incremental aggregation towards the sink, driven by a discrete-event
// clock. Also the no-ISL baseline in which every satellite talks to the
// ground station directly.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "satfl/constants.hpp"
#include "satfl/errors.hpp"
#include "satfl/event_queue.hpp"
#include "satfl/link.hpp"
#include "satfl/orbital.hpp"
#include "satfl/sparse.hpp"

namespace satfl {

enum class Scheme { DenseIA, SIA, CLSIA, NoIslDirect };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::DenseIA: return "DENSE_IA";
    case Scheme::SIA: return "SIA";
    case Scheme::CLSIA: return "CLSIA";
    case Scheme::NoIslDirect: return "NO_ISL_DIRECT";
  }
  return "?";
}

inline std::optional<Scheme> parse_scheme(std::string_view text) {
  std::string up;
  for (char c : text)
    if (c != '-') up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (up == "DENSE_IA" || up == "DENSE") return Scheme::DenseIA;
  if (up == "SIA") return Scheme::SIA;
  if (up == "CLSIA") return Scheme::CLSIA;
  if (up == "NO_ISL_DIRECT" || up == "NO_ISL") return Scheme::NoIslDirect;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Ground-station contact model

struct GsContact {
  double start_s = 0.0;  // window start (or the query time when already visible)
  double end_s = 0.0;
  double rate_bps = 0.0;  // held for the whole transfer
  double distance_m = 0.0;
};

class GroundVisibility {
 public:
  virtual ~GroundVisibility() = default;
  // Window containing t, or the next one; nullopt when the satellite never
  // becomes visible within the search horizon.
  virtual std::optional<GsContact> contact(int sat_id, double t) = 0;
};

// Real geometry: one lazily extended tracker per satellite. Global satellite
// id = offset of its plane + index within the plane. Link rate and distance
// are taken at the window start.
class ConstellationVisibility final : public GroundVisibility {
 public:
  ConstellationVisibility(std::vector<OrbitPlane> planes, GroundStation gs, LinkParams link,
                          double step_s = kDefaultVisibilityStep,
                          const PhysicalConstants& pc = kConstants)
      : planes_(std::move(planes)), gs_(gs), link_(link), pc_(pc) {
    for (std::size_t p = 0; p < planes_.size(); ++p)
      for (int k = 0; k < planes_[p].num_sats; ++k) {
        trackers_.emplace_back(planes_[p], k, gs_, step_s);
        owner_.push_back({p, k});
      }
  }

  std::optional<GsContact> contact(int sat_id, double t) override {
    auto& tr = trackers_.at(static_cast<std::size_t>(sat_id));
    const auto* w = tr.window_at_or_after(t);
    if (w == nullptr) return std::nullopt;
    const auto [p, k] = owner_[static_cast<std::size_t>(sat_id)];
    const double d = distance(propagate(planes_[p], k, w->start_s, pc_), gs_position(gs_, w->start_s, pc_));
    return GsContact{std::max(t, w->start_s), w->end_s, data_rate(link_, d, true, pc_), d};
  }

  std::size_t num_sats() const { return trackers_.size(); }

 private:
  std::vector<OrbitPlane> planes_;
  GroundStation gs_;
  LinkParams link_;
  PhysicalConstants pc_;
  std::vector<VisibilityTracker> trackers_;
  std::vector<std::pair<std::size_t, int>> owner_;
};

// Every satellite always visible with a fixed link; for toy scenarios.
class AlwaysVisible final : public GroundVisibility {
 public:
  AlwaysVisible(double rate_bps, double distance_m) : rate_(rate_bps), dist_(distance_m) {}
  std::optional<GsContact> contact(int, double t) override {
    return GsContact{t, std::numeric_limits<double>::infinity(), rate_, dist_};
  }

 private:
  double rate_, dist_;
};

// Explicit per-satellite window lists; satellites without an entry are never
// visible.
class ScriptedVisibility final : public GroundVisibility {
 public:
  ScriptedVisibility(std::map<int, std::vector<VisibilityWindow>> windows, double rate_bps,
                     double distance_m)
      : windows_(std::move(windows)), rate_(rate_bps), dist_(distance_m) {}

  std::optional<GsContact> contact(int sat_id, double t) override {
    auto it = windows_.find(sat_id);
    if (it == windows_.end()) return std::nullopt;
    for (const auto& w : it->second)
      if (w.end_s >= t) return GsContact{std::max(t, w.start_s), w.end_s, rate_, dist_};
    return std::nullopt;
  }

 private:
  std::map<int, std::vector<VisibilityWindow>> windows_;
  double rate_, dist_;
};

// ---------------------------------------------------------------------------
// Ring topology and round planning

struct RingTopology {
  int plane_id = 0;
  std::vector<int> sat_ids;  // angular order
  double distance_m = 0.0;   // per hop
  double rate_bps = 0.0;     // fixed ISL rate

  int size() const { return static_cast<int>(sat_ids.size()); }

  int position_of(int sat_id) const {
    auto it = std::find(sat_ids.begin(), sat_ids.end(), sat_id);
    if (it == sat_ids.end())
      throw ContractViolation("ring: satellite " + std::to_string(sat_id) + " not in plane " +
                              std::to_string(plane_id));
    return static_cast<int>(it - sat_ids.begin());
  }
  int at(int pos) const {
    const int n = size();
    return sat_ids[static_cast<std::size_t>(((pos % n) + n) % n)];
  }
};

inline RingTopology make_ring(const OrbitPlane& plane, int plane_id, int first_sat_id,
                              const LinkParams& link, const PhysicalConstants& pc = kConstants) {
  RingTopology ring;
  ring.plane_id = plane_id;
  for (int k = 0; k < plane.num_sats; ++k) ring.sat_ids.push_back(first_sat_id + k);
  ring.distance_m = neighbor_distance(plane, pc);
  ring.rate_bps = fixed_link_rate(link, plane, pc);
  return ring;
}

// Ring steps in ascending index order ("clockwise") and descending order.
struct RingPath {
  int hops = 0;
  bool clockwise = true;
};

inline RingPath shortest_path(const RingTopology& ring, int from_id, int sink_id) {
  const int n = ring.size();
  const int a = ring.position_of(from_id), b = ring.position_of(sink_id);
  const int cw = ((b - a) % n + n) % n;
  const int ccw = ((a - b) % n + n) % n;
  return cw <= ccw ? RingPath{cw, true} : RingPath{ccw, false};
}

inline int shortest_path_hops(const RingTopology& ring, int from_id, int sink_id) {
  return shortest_path(ring, from_id, sink_id).hops;
}

inline int next_hop_toward(const RingTopology& ring, int from_id, int sink_id) {
  const auto path = shortest_path(ring, from_id, sink_id);
  return ring.at(ring.position_of(from_id) + (path.clockwise ? 1 : -1));
}

struct RoundPlan {
  int round_n = 0;
  int source_id = 0;
  int sink_id = 0;
  // arcs[0] travels clockwise, arcs[1] counter-clockwise; each lists its
  // members farthest-first and ends with the sink.
  std::array<std::vector<int>, 2> arcs;
  Scheme scheme = Scheme::DenseIA;
};

inline RoundPlan make_plan(const RingTopology& ring, int round_n, int source_id, int sink_id,
                           Scheme scheme) {
  RoundPlan plan{round_n, source_id, sink_id, {}, scheme};
  ring.position_of(source_id);
  const int s = ring.position_of(sink_id);
  const int n = ring.size();
  // Clockwise arc: members whose shortest path ascends, i.e. the ones at
  // ring positions s - h for h = 1 .. floor(n/2).
  for (int h = n / 2; h >= 1; --h) plan.arcs[0].push_back(ring.at(s - h));
  for (int h = (n - 1) / 2; h >= 1; --h) plan.arcs[1].push_back(ring.at(s + h));
  plan.arcs[0].push_back(sink_id);
  plan.arcs[1].push_back(sink_id);
  return plan;
}

// ---------------------------------------------------------------------------
// Per-satellite state and round results

struct SatelliteState {
  int id = 0;
  double data_size = 1.0;  // D_k
  ErrorState error;
};

struct ProtocolParams {
  SizeModel sizes{};
  std::size_t Q = 79;
  double compute_time_s = 1.0;
  PhysicalConstants constants{};
};

// Local gradient g_k = w_local - w_global of satellite `sat_id`.
using GradientFn = std::function<DenseVector(int sat_id)>;

struct RoundMetrics {
  int round_n = 0;
  double start_s = 0.0;
  double wallclock_s = 0.0;  // completion time on the simulation clock
  std::vector<std::uint64_t> per_hop_bits;
  std::uint64_t total_plane_bits = 0;
  std::uint64_t gs_bits = 0;
  std::uint64_t dist_bits = 0;
  double test_accuracy = std::numeric_limits<double>::quiet_NaN();

  double duration_s() const { return wallclock_s - start_s; }
};

struct HopRecord {
  int src_id = 0;
  int dst_id = 0;
  std::uint64_t bits = 0;
  std::size_t nnz = 0;
  double depart_s = 0.0;
  double arrive_s = 0.0;
};

struct RoundResult {
  RoundPlan plan;
  DenseVector aggregate;
  SparseGradient sparse_aggregate;  // what reached the GS, sparse schemes only
  RoundMetrics metrics;
  std::vector<HopRecord> hops;
  std::map<int, SparseGradient> contributions;  // sparsified own gradients (SIA) or outgoing (CL-SIA)
  std::vector<Event> trace;
};

inline std::uint64_t distribution_bits(const SizeModel& m, int ring_size) {
  std::uint64_t header = 0;
  while ((std::uint64_t{1} << header) < static_cast<std::uint64_t>(ring_size)) ++header;
  return dense_bits(m) + header;
}

// Distribution over floor(K/2) hops, compute, then aggregation along the
// longer arc with scheme-typical payloads (worst case for SIA).
inline double est_round_duration(const RingTopology& ring, Scheme scheme, const ProtocolParams& p) {
  const int n = ring.size();
  const double prop = propagation_delay(ring.distance_m, p.constants);
  double t = (n / 2) * (tx_duration(static_cast<double>(distribution_bits(p.sizes, n)), ring.rate_bps) + prop);
  t += p.compute_time_s;
  const int agg_hops = n / 2;
  for (int h = 1; h <= agg_hops; ++h) {
    std::uint64_t bits = 0;
    switch (scheme) {
      case Scheme::DenseIA: bits = dense_bits(p.sizes); break;
      case Scheme::CLSIA: bits = p.Q * p.sizes.entry_bits(); break;
      case Scheme::SIA:
      case Scheme::NoIslDirect:
        bits = std::min<std::uint64_t>(p.sizes.dim, static_cast<std::uint64_t>(h) * p.Q) *
               p.sizes.entry_bits();
        break;
    }
    t += tx_duration(static_cast<double>(bits), ring.rate_bps) + prop;
  }
  return t;
}

// Satellite whose next window starts earliest at/after t (ties: lower id).
inline int select_source(GroundVisibility& vis, std::span<const int> sat_ids, double t) {
  int best = -1;
  double best_t = std::numeric_limits<double>::infinity();
  for (int id : sat_ids) {
    const auto c = vis.contact(id, t);
    if (!c) continue;
    if (c->start_s < best_t || (c->start_s == best_t && id < best)) {
      best_t = c->start_s;
      best = id;
    }
  }
  if (best < 0) throw ConfigurationError("select_source: no satellite ever becomes visible");
  return best;
}

// Satellite minimising the wait for a ground contact after the estimated
// aggregation finish time t_source_rx + est_round_duration.
inline int select_sink(GroundVisibility& vis, std::span<const int> sat_ids, double t_source_rx,
                       double est_round_duration) {
  return select_source(vis, sat_ids, t_source_rx + est_round_duration);
}

namespace detail {

struct Payload {
  DenseVector dense;  // DENSE_IA
  SparseGradient sparse;
  std::uint64_t bits = 0;
  std::size_t nnz = 0;
};

}  // namespace detail

// Runs one round of `scheme` (DENSE_IA, SIA or CLSIA) for the plane
// described by `ring`. `sats` is indexed like ring.sat_ids. Returns the sum
// of what reached the GS, i.e. the plane's weighted gradient aggregate.
inline RoundResult run_round(const RingTopology& ring, std::span<SatelliteState> sats,
                             GroundVisibility& vis, Scheme scheme, const ProtocolParams& params,
                             const GradientFn& local_gradient, double t_start, int round_n = 0) {
  if (scheme == Scheme::NoIslDirect)
    throw ContractViolation("run_round: NO_ISL_DIRECT is handled by run_no_isl_round");
  if (sats.size() != ring.sat_ids.size())
    throw ContractViolation("run_round: satellite states do not match the ring");
  if (!(ring.rate_bps > 0.0)) throw NoLinkError("run_round: ring has no usable ISL rate");

  const int n = ring.size();
  const auto& pc = params.constants;
  const std::size_t dim = params.sizes.dim;
  const double hop_prop = propagation_delay(ring.distance_m, pc);

  RoundResult res;
  res.metrics.round_n = round_n;
  res.metrics.start_s = t_start;

  // Parameter distribution: GS -> source during its next window.
  const int source = select_source(vis, ring.sat_ids, t_start);
  const auto up = vis.contact(source, t_start);
  const auto dense = dense_bits(params.sizes);
  const double t_source_rx =
      up->start_s + tx_duration(static_cast<double>(dense), up->rate_bps) + propagation_delay(up->distance_m, pc);
  res.metrics.gs_bits += dense;

  const int sink = select_sink(vis, ring.sat_ids, t_source_rx, est_round_duration(ring, scheme, params));
  res.plan = make_plan(ring, round_n, source, sink, scheme);

  // Expected incoming aggregation messages and next hop per satellite.
  std::vector<int> expected(static_cast<std::size_t>(n), 0);
  std::vector<int> next_hop(static_cast<std::size_t>(n), -1);
  std::vector<int> arc_of(static_cast<std::size_t>(n), -1);
  for (int a = 0; a < 2; ++a) {
    const auto& arc = res.plan.arcs[static_cast<std::size_t>(a)];
    for (std::size_t i = 0; i + 1 < arc.size(); ++i) {
      const int pos = ring.position_of(arc[i]);
      next_hop[static_cast<std::size_t>(pos)] = arc[i + 1];
      arc_of[static_cast<std::size_t>(pos)] = a;
      ++expected[static_cast<std::size_t>(ring.position_of(arc[i + 1]))];
    }
  }

  // Flood quota: clockwise reaches floor(n/2) satellites, counter-clockwise
  // the remaining ones.
  const int src_pos = ring.position_of(source);
  const int cw_reach = n / 2, ccw_reach = n - 1 - n / 2;
  const auto dist_payload = distribution_bits(params.sizes, n);

  std::vector<bool> received(static_cast<std::size_t>(n), false), trained(static_cast<std::size_t>(n), false),
      done(static_cast<std::size_t>(n), false);
  std::vector<DenseVector> grads(static_cast<std::size_t>(n));
  // Incoming payload per arc slot so the sink merges in a fixed order.
  std::vector<std::array<std::optional<detail::Payload>, 2>> inbox(static_cast<std::size_t>(n));
  // Each satellite sends one aggregation message per round: keyed by sender.
  std::map<int, std::pair<int, detail::Payload>> in_flight;

  EventQueue q(t_start);
  q.push({t_source_rx, EventKind::ReceiveGlobal, dense, kGroundStationId, source});

  double t_end = t_start;
  detail::Payload sink_out;

  auto apply_step = [&](int pos) {
    auto& sat = sats[static_cast<std::size_t>(pos)];
    auto& box = inbox[static_cast<std::size_t>(pos)];
    const auto& g = grads[static_cast<std::size_t>(pos)];
    detail::Payload out;
    if (scheme == Scheme::DenseIA) {
      DenseVector acc(dim);
      for (auto& m : box)
        if (m) acc += m->dense;
      for (std::size_t i = 0; i < dim; ++i) acc[i] += sat.data_size * g[i];
      out.dense = std::move(acc);
      out.bits = dense;
      out.nnz = dim;
      return out;
    }
    SparseGradient incoming(dim);
    for (auto& m : box)
      if (m) incoming = sparse_add(incoming, m->sparse);
    if (sat.error.residual.dim() != dim) sat.error = ErrorState(dim);
    auto step = scheme == Scheme::SIA ? sia_step(g, sat.data_size, sat.error, incoming, params.Q)
                                      : clsia_step(g, sat.data_size, sat.error, incoming, params.Q);
    res.contributions[sat.id] = std::move(step.contribution);
    out.sparse = std::move(step.outgoing);
    out.nnz = out.sparse.nnz();
    out.bits = message_bits(out.sparse, params.sizes);
    return out;
  };

  auto try_aggregate = [&](int pos, double now) {
    const auto p = static_cast<std::size_t>(pos);
    if (done[p] || !trained[p]) return;
    int have = 0;
    for (auto& m : inbox[p]) have += m ? 1 : 0;
    if (have < expected[p]) return;
    done[p] = true;
    auto out = apply_step(pos);
    res.metrics.per_hop_bits.push_back(out.bits);
    if (ring.at(pos) == sink) {
      q.push({now, EventKind::SinkReady, out.bits, sink, sink});
      sink_out = std::move(out);
      return;
    }
    const int dst = next_hop[p];
    const double arrive = now + tx_duration(static_cast<double>(out.bits), ring.rate_bps) + hop_prop;
    res.hops.push_back({ring.at(pos), dst, out.bits, out.nnz, now, arrive});
    q.push({arrive, EventKind::IslDeliver, out.bits, ring.at(pos), dst});
    in_flight.emplace(ring.at(pos), std::make_pair(arc_of[p], std::move(out)));
  };

  while (!q.empty()) {
    const Event e = q.pop();
    res.trace.push_back(e);
    switch (e.kind) {
      case EventKind::ReceiveGlobal: {
        const int pos = ring.position_of(e.dst_id);
        if (received[static_cast<std::size_t>(pos)]) break;
        received[static_cast<std::size_t>(pos)] = true;
        q.push({e.time_s + params.compute_time_s, EventKind::TrainDone, 0, e.dst_id, e.dst_id});
        const int offset = ((pos - src_pos) % n + n) % n;  // clockwise steps from source
        auto forward = [&](int step) {
          const int nb = ring.at(pos + step);
          res.metrics.dist_bits += dist_payload;
          q.push({e.time_s + tx_duration(static_cast<double>(dist_payload), ring.rate_bps) + hop_prop,
                  EventKind::ReceiveGlobal, dist_payload, e.dst_id, nb});
        };
        if (offset == 0) {
          if (cw_reach > 0) forward(+1);
          if (ccw_reach > 0) forward(-1);
        } else if (offset <= cw_reach) {
          if (offset < cw_reach) forward(+1);
        } else if (n - offset < ccw_reach) {
          forward(-1);
        }
        break;
      }
      case EventKind::TrainDone: {
        const int pos = ring.position_of(e.dst_id);
        grads[static_cast<std::size_t>(pos)] = local_gradient(e.dst_id);
        if (grads[static_cast<std::size_t>(pos)].dim() != dim)
          throw ContractViolation("run_round: local gradient has the wrong dimension");
        trained[static_cast<std::size_t>(pos)] = true;
        try_aggregate(pos, e.time_s);
        break;
      }
      case EventKind::IslDeliver: {
        auto node = in_flight.extract(e.src_id);
        const int pos = ring.position_of(e.dst_id);
        auto& [arc, payload] = node.mapped();
        inbox[static_cast<std::size_t>(pos)][static_cast<std::size_t>(arc)] = std::move(payload);
        try_aggregate(pos, e.time_s);
        break;
      }
      case EventKind::SinkReady: {
        const auto down = vis.contact(sink, e.time_s);
        if (!down) throw ConfigurationError("run_round: sink never becomes visible");
        const double arrive = down->start_s + tx_duration(static_cast<double>(sink_out.bits), down->rate_bps) +
                              propagation_delay(down->distance_m, pc);
        res.hops.push_back({sink, kGroundStationId, sink_out.bits, sink_out.nnz, down->start_s, arrive});
        res.metrics.gs_bits += sink_out.bits;
        q.push({arrive, EventKind::GsDeliver, sink_out.bits, sink, kGroundStationId});
        break;
      }
      case EventKind::GsDeliver:
        t_end = e.time_s;
        break;
    }
  }

  for (std::size_t p = 0; p < done.size(); ++p)
    if (!done[p]) throw ConfigurationError("run_round: aggregation did not reach every satellite");

  for (auto b : res.metrics.per_hop_bits) res.metrics.total_plane_bits += b;
  res.metrics.wallclock_s = t_end;
  if (scheme == Scheme::DenseIA) {
    res.aggregate = std::move(sink_out.dense);
  } else {
    res.aggregate = sink_out.sparse.densify();
    res.sparse_aggregate = std::move(sink_out.sparse);
  }
  return res;
}

// No-ISL baseline: each satellite receives w over its own ground contact,
// trains, then returns its error-compensated Top-Q gradient at its next
// contact (the same window if it is still visible).
inline RoundResult run_no_isl_round(std::span<SatelliteState> sats, GroundVisibility& vis,
                                    const ProtocolParams& params, const GradientFn& local_gradient,
                                    double t_start, int round_n = 0) {
  const auto& pc = params.constants;
  const std::size_t dim = params.sizes.dim;
  const auto dense = dense_bits(params.sizes);

  RoundResult res;
  res.plan.round_n = round_n;
  res.plan.scheme = Scheme::NoIslDirect;
  res.metrics.round_n = round_n;
  res.metrics.start_s = t_start;
  res.aggregate = DenseVector(dim);

  std::map<int, std::size_t> index;
  for (std::size_t i = 0; i < sats.size(); ++i) index[sats[i].id] = i;

  EventQueue q(t_start);
  for (const auto& sat : sats) {
    const auto up = vis.contact(sat.id, t_start);
    if (!up) throw ConfigurationError("run_no_isl_round: satellite " + std::to_string(sat.id) +
                                      " never becomes visible");
    const double rx =
        up->start_s + tx_duration(static_cast<double>(dense), up->rate_bps) + propagation_delay(up->distance_m, pc);
    res.metrics.gs_bits += dense;
    q.push({rx, EventKind::ReceiveGlobal, dense, kGroundStationId, sat.id});
  }

  // Per-satellite sparse messages, summed at the GS in satellite order.
  std::vector<SparseGradient> reports(sats.size());
  double t_end = t_start;
  while (!q.empty()) {
    const Event e = q.pop();
    res.trace.push_back(e);
    switch (e.kind) {
      case EventKind::ReceiveGlobal:
        q.push({e.time_s + params.compute_time_s, EventKind::TrainDone, 0, e.dst_id, e.dst_id});
        break;
      case EventKind::TrainDone: {
        auto& sat = sats[index.at(e.dst_id)];
        const auto g = local_gradient(sat.id);
        if (sat.error.residual.dim() != dim) sat.error = ErrorState(dim);
        auto step = sia_step(g, sat.data_size, sat.error, SparseGradient(dim), params.Q);
        const auto bits = message_bits(step.outgoing, params.sizes);
        const auto down = vis.contact(sat.id, e.time_s);
        if (!down) throw ConfigurationError("run_no_isl_round: satellite never visible again");
        const double arrive =
            down->start_s + tx_duration(static_cast<double>(bits), down->rate_bps) + propagation_delay(down->distance_m, pc);
        res.hops.push_back({sat.id, kGroundStationId, bits, step.outgoing.nnz(), down->start_s, arrive});
        res.metrics.per_hop_bits.push_back(bits);
        res.metrics.gs_bits += bits;
        res.contributions[sat.id] = step.contribution;
        reports[index.at(sat.id)] = std::move(step.outgoing);
        q.push({arrive, EventKind::GsDeliver, bits, sat.id, kGroundStationId});
        break;
      }
      case EventKind::GsDeliver:
        t_end = std::max(t_end, e.time_s);
        break;
      default:
        break;
    }
  }
  for (const auto& r : reports) r.scatter_add(res.aggregate);
  for (auto b : res.metrics.per_hop_bits) res.metrics.total_plane_bits += b;
  res.metrics.wallclock_s = t_end;
  return res;
}

}  // namespace satfl

#pragma once

#include <cstdint>
#include <queue>
#include <string_view>
#include <vector>

#include "satfl/errors.hpp"

namespace satfl {

enum class EventKind { ReceiveGlobal, TrainDone, IslDeliver, SinkReady, GsDeliver };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::ReceiveGlobal: return "RECEIVE_GLOBAL";
    case EventKind::TrainDone: return "TRAIN_DONE";
    case EventKind::IslDeliver: return "ISL_DELIVER";
    case EventKind::SinkReady: return "SINK_READY";
    case EventKind::GsDeliver: return "GS_DELIVER";
  }
  return "?";
}

inline constexpr int kGroundStationId = -1;

struct Event {
  double time_s = 0.0;
  EventKind kind = EventKind::ReceiveGlobal;
  std::uint64_t payload_bits = 0;
  int src_id = kGroundStationId;
  int dst_id = kGroundStationId;
  std::uint64_t seq = 0;  // insertion order, FIFO among equal times
};

// Min-heap on (time, seq). pop() advances the clock; scheduling into the
// past is rejected.
class EventQueue {
 public:
  explicit EventQueue(double start_s = 0.0) : now_(start_s) {}

  void push(Event e) {
    if (e.time_s < now_) throw ContractViolation("EventQueue: event scheduled before the clock");
    e.seq = next_seq_++;
    heap_.push(e);
  }

  Event pop() {
    if (heap_.empty()) throw ContractViolation("EventQueue: pop on empty queue");
    Event e = heap_.top();
    heap_.pop();
    now_ = e.time_s;
    return e;
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  double now() const { return now_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time_s > b.time_s || (a.time_s == b.time_s && a.seq > b.seq);
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  double now_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace satfl

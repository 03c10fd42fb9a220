#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_set>
#include <vector>

namespace qosim {

/// Simulated time in seconds.
using SimTime = double;

enum class EventKind : std::uint8_t {
  PacketArrival,
  TransmissionComplete,
  SourceEmit,
  MetricSnapshot,
  Other,
};

struct EventHandle {
  std::uint64_t sequence = 0;
};

struct RunSummary {
  std::uint64_t events_fired = 0;
  SimTime final_clock = 0.0;
};

/// Single-threaded discrete-event engine.
///
/// Events fire in (fire_time, sequence) order; the sequence is the insertion
/// counter, so equal-time events run in the order they were scheduled.
/// Cancelled events stay in the heap as tombstones and are skipped when they
/// surface.
class Simulator {
 public:
  using Action = std::function<void()>;
  /// Observer invoked just before each event fires (used by trace tests).
  using TraceHook = std::function<void(SimTime, std::uint64_t, EventKind)>;

  SimTime now() const noexcept { return clock_; }

  /// Throws CausalityError if `at` precedes the clock.
  EventHandle schedule(SimTime at, EventKind kind, Action action);
  EventHandle schedule_in(SimTime delay, EventKind kind, Action action) {
    return schedule(clock_ + delay, kind, std::move(action));
  }

  /// Cancelling an event that already fired (or was cancelled) is a no-op.
  void cancel(EventHandle handle);

  /// Fires every pending event with fire_time <= t_end, then sets the clock to
  /// t_end. Events scheduled during the run at times <= t_end also fire.
  RunSummary run_until(SimTime t_end);

  std::size_t pending() const noexcept { return live_.size(); }

  void set_trace_hook(TraceHook hook) { trace_ = std::move(hook); }

 private:
  struct Pending {
    SimTime fire_time;
    std::uint64_t sequence;
    EventKind kind;
    Action action;
  };
  struct Later {
    bool operator()(const Pending& a, const Pending& b) const noexcept {
      if (a.fire_time != b.fire_time) return a.fire_time > b.fire_time;
      return a.sequence > b.sequence;
    }
  };

  SimTime clock_ = 0.0;
  std::uint64_t next_sequence_ = 0;
  std::priority_queue<Pending, std::vector<Pending>, Later> heap_;
  std::unordered_set<std::uint64_t> live_;
  TraceHook trace_;
};

}  // namespace qosim

#include "qosim/sim.hpp"

#include <string>

#include "qosim/error.hpp"

namespace qosim {

EventHandle Simulator::schedule(SimTime at, EventKind kind, Action action) {
  if (at < clock_) {
    throw CausalityError("event at t=" + std::to_string(at) +
                         " precedes clock t=" + std::to_string(clock_));
  }
  const std::uint64_t seq = next_sequence_++;
  heap_.push(Pending{at, seq, kind, std::move(action)});
  live_.insert(seq);
  return EventHandle{seq};
}

void Simulator::cancel(EventHandle handle) {
  live_.erase(handle.sequence);
}

RunSummary Simulator::run_until(SimTime t_end) {
  if (t_end < clock_) {
    throw CausalityError("run_until(" + std::to_string(t_end) +
                         ") precedes clock t=" + std::to_string(clock_));
  }
  RunSummary summary;
  while (!heap_.empty() && heap_.top().fire_time <= t_end) {
    // priority_queue::top is const; the action is moved out before pop.
    Pending ev = std::move(const_cast<Pending&>(heap_.top()));
    heap_.pop();
    if (live_.erase(ev.sequence) == 0) continue;  // tombstone
    clock_ = ev.fire_time;
    if (trace_) trace_(ev.fire_time, ev.sequence, ev.kind);
    ev.action();
    ++summary.events_fired;
  }
  clock_ = t_end;
  summary.final_clock = clock_;
  return summary;
}

}  // namespace qosim

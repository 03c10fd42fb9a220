#include "qosim/qdisc.hpp"

#include <string>

#include "qosim/error.hpp"

namespace qosim {

std::string_view to_string(Discipline d) noexcept {
  switch (d) {
    case Discipline::Fifo: return "fifo";
    case Discipline::Pq: return "pq";
    case Discipline::Wfq: return "wfq";
  }
  return "unknown";
}

Discipline parse_discipline(std::string_view name) {
  for (Discipline d : {Discipline::Fifo, Discipline::Pq, Discipline::Wfq}) {
    if (to_string(d) == name) return d;
  }
  throw PreconditionError("unknown discipline '" + std::string(name) +
                          "' (expected fifo, pq or wfq)");
}

std::string_view to_string(BufferScope s) noexcept {
  return s == BufferScope::PerQueue ? "per-queue" : "shared";
}

BufferScope parse_buffer_scope(std::string_view name) {
  if (name == "per-queue") return BufferScope::PerQueue;
  if (name == "shared") return BufferScope::Shared;
  throw PreconditionError("unknown buffer scope '" + std::string(name) +
                          "' (expected per-queue or shared)");
}

std::string_view to_string(DropReason r) noexcept {
  return r == DropReason::RedEarly ? "red-early" : "buffer-overflow";
}

// --- ClassifierTable -------------------------------------------------------

ClassifierTable ClassifierTable::diffserv_default() {
  ClassifierTable t;
  for (TrafficClass c : kAllClasses) {
    t.set(dscp_for_class(c), index_of(c), static_cast<int>(index_of(c)));
  }
  t.set_default_queue(index_of(TrafficClass::Ftp));
  return t;
}

void ClassifierTable::set(Dscp code, std::size_t queue, int rank) {
  for (const auto& [bits, entry] : entries_) {
    if (bits != code.bits() && entry.rank == rank && entry.queue != queue) {
      throw PreconditionError("priority rank " + std::to_string(rank) +
                              " already assigned to queue " +
                              std::to_string(entry.queue));
    }
  }
  entries_[code.bits()] = Entry{queue, rank};
}

std::size_t ClassifierTable::classify(Dscp code) const noexcept {
  const auto it = entries_.find(code.bits());
  return it == entries_.end() ? default_queue_ : it->second.queue;
}

int ClassifierTable::rank_of_queue(std::size_t queue) const noexcept {
  for (const auto& [bits, entry] : entries_) {
    if (entry.queue == queue) return entry.rank;
  }
  return static_cast<int>(queue);
}

// --- QosInterface ----------------------------------------------------------

QosInterface::QosInterface(InterfaceConfig config, ClassifierTable classifier,
                           RngStream red_rng)
    : config_(std::move(config)),
      classifier_(std::move(classifier)),
      red_rng_(std::move(red_rng)) {
  if (!(config_.link_rate_bps > 0.0)) {
    throw PreconditionError("link rate must be > 0");
  }
  if (config_.buffer_limit == 0) {
    throw PreconditionError("buffer limit must be > 0");
  }
  const std::size_t n = config_.discipline == Discipline::Fifo ? 1 : kNumClasses;
  queues_.resize(n);
  for (std::size_t q = 0; q < n; ++q) {
    ClassQueue& cq = queues_[q];
    cq.weight = config_.weights[q];
    if (cq.weight == 0) throw PreconditionError("queue weights must be > 0");
    cq.quantum = static_cast<std::uint64_t>(cq.weight) * config_.quantum_per_weight;
    if (cq.quantum == 0) throw PreconditionError("DWRR quantum must be > 0");
    cq.limit_bytes = config_.buffer_limit;
    if (config_.red.enabled && config_.buffer_limit != kUnlimitedBuffer) {
      cq.red = RedState::from_params(config_.red, share_bytes(q));
    }
  }
}

double QosInterface::share_bytes(std::size_t queue) const noexcept {
  const auto limit = static_cast<double>(config_.buffer_limit);
  if (config_.buffer_scope == BufferScope::PerQueue ||
      config_.discipline == Discipline::Fifo) {
    return limit;
  }
  double total = 0.0;
  for (std::size_t q = 0; q < queues_.size(); ++q) total += config_.weights[q];
  return limit * config_.weights[queue] / total;
}

std::size_t QosInterface::classify(const Packet& packet) const noexcept {
  if (config_.discipline == Discipline::Fifo) return 0;
  return classifier_.classify(packet.dscp);
}

bool QosInterface::fits(std::size_t q, std::uint32_t size) const noexcept {
  if (config_.buffer_limit == kUnlimitedBuffer) return true;
  const std::uint64_t held = config_.buffer_scope == BufferScope::Shared
                                 ? buffer_used_
                                 : queues_[q].bytes_held;
  return held + size <= config_.buffer_limit;
}

EnqueueOutcome QosInterface::enqueue(Packet packet, double now) {
  const std::size_t q = classify(packet);
  ClassQueue& cq = queue_for(q);

  if (cq.red) {
    const double slot =
        config_.red.typical_packet_bytes * 8.0 / config_.link_rate_bps;
    red_update_avg(*cq.red, static_cast<double>(cq.bytes_held), now, slot);
    if (red_drop_decision(*cq.red, red_rng_) != RedVerdict::Accept) {
      return EnqueueOutcome::dropped(DropReason::RedEarly);
    }
  }
  if (!fits(q, packet.size_bytes)) {
    return EnqueueOutcome::dropped(DropReason::BufferOverflow);
  }

  const bool was_empty = cq.packets.empty();
  packet.enqueued_at = now;
  cq.bytes_held += packet.size_bytes;
  buffer_used_ += packet.size_bytes;
  class_bytes_[index_of(packet.cls)] += packet.size_bytes;
  ++packets_;
  cq.packets.push_back(std::move(packet));
  if (was_empty && config_.discipline == Discipline::Wfq) active_.push_back(q);
  return EnqueueOutcome::ok();
}

Packet QosInterface::pop_head(std::size_t q, double now) {
  ClassQueue& cq = queue_for(q);
  Packet p = std::move(cq.packets.front());
  cq.packets.pop_front();
  cq.bytes_held -= p.size_bytes;
  buffer_used_ -= p.size_bytes;
  class_bytes_[index_of(p.cls)] -= p.size_bytes;
  --packets_;
  if (cq.packets.empty() && cq.red) cq.red->idle_since = now;
  return p;
}

std::optional<Packet> QosInterface::dequeue(double now) {
  switch (config_.discipline) {
    case Discipline::Fifo: return dequeue_fifo(now);
    case Discipline::Pq: return dequeue_pq(now);
    case Discipline::Wfq: return dequeue_dwrr(now);
  }
  return std::nullopt;
}

std::optional<Packet> QosInterface::dequeue_fifo(double now) {
  if (queues_[0].packets.empty()) return std::nullopt;
  return pop_head(0, now);
}

std::optional<Packet> QosInterface::dequeue_pq(double now) {
  std::optional<std::size_t> best;
  int best_rank = 0;
  for (std::size_t q = 0; q < queues_.size(); ++q) {
    if (queues_[q].packets.empty()) continue;
    const int rank = classifier_.rank_of_queue(q);
    if (!best || rank < best_rank) {
      best = q;
      best_rank = rank;
    }
  }
  if (!best) return std::nullopt;
  return pop_head(*best, now);
}

std::optional<Packet> QosInterface::dequeue_dwrr(double now) {
  while (!active_.empty()) {
    const std::size_t q = active_.front();
    ClassQueue& cq = queue_for(q);
    if (!in_visit_) {
      cq.deficit += cq.quantum;
      in_visit_ = true;
    }
    const std::uint32_t head = cq.packets.front().size_bytes;
    if (head <= cq.deficit) {
      cq.deficit -= head;
      Packet p = pop_head(q, now);
      if (cq.packets.empty()) {
        cq.deficit = 0;
        active_.pop_front();
        in_visit_ = false;
      }
      return p;
    }
    // Visit over: carry the deficit, rotate to the back.
    in_visit_ = false;
    active_.pop_front();
    active_.push_back(q);
  }
  return std::nullopt;
}

// --- EgressPort ------------------------------------------------------------

EgressPort::Started EgressPort::start_transmission(Packet packet, double now) {
  if (in_service_) {
    throw PreconditionError("transmitter busy: packet " +
                            std::to_string(in_service_->id) + " in service");
  }
  packet.dequeued_at = now;
  Started s;
  s.queuing_delay = packet.enqueued_at ? now - *packet.enqueued_at : 0.0;
  s.completion_time = now + service_time(packet.size_bytes);
  in_service_ = std::move(packet);
  return s;
}

Packet EgressPort::finish_transmission() {
  if (!in_service_) throw PreconditionError("no packet in service");
  Packet p = std::move(*in_service_);
  in_service_.reset();
  return p;
}

}  // namespace qosim

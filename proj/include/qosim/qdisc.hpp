#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "qosim/packet.hpp"
#include "qosim/red.hpp"
#include "qosim/rng.hpp"

namespace qosim {

enum class Discipline : std::uint8_t { Fifo, Pq, Wfq };
std::string_view to_string(Discipline d) noexcept;
Discipline parse_discipline(std::string_view name);

/// Whether `buffer_limit` caps each class queue on its own or the sum over
/// all queues of the interface.
enum class BufferScope : std::uint8_t { PerQueue, Shared };
std::string_view to_string(BufferScope s) noexcept;
BufferScope parse_buffer_scope(std::string_view name);

enum class DropReason : std::uint8_t { RedEarly, BufferOverflow };
std::string_view to_string(DropReason r) noexcept;

inline constexpr std::uint64_t kUnlimitedBuffer =
    std::numeric_limits<std::uint64_t>::max();

/// DSCP -> queue map. Queue ids double as priority ranks for PQ (0 = highest).
class ClassifierTable {
 public:
  struct Entry {
    std::size_t queue = 0;
    int rank = 0;
  };

  /// EF -> voice(0), AF41 -> video(1), AF21 -> database(2), DF -> ftp(3);
  /// anything else falls to the best-effort queue.
  static ClassifierTable diffserv_default();

  /// Throws PreconditionError if `rank` is already taken by another queue.
  void set(Dscp code, std::size_t queue, int rank);
  void set_default_queue(std::size_t queue) noexcept { default_queue_ = queue; }

  std::size_t classify(Dscp code) const noexcept;
  std::size_t default_queue() const noexcept { return default_queue_; }
  /// Rank recorded for `queue` (the queue index if never set).
  int rank_of_queue(std::size_t queue) const noexcept;
  const std::map<std::uint8_t, Entry>& entries() const noexcept { return entries_; }

 private:
  std::map<std::uint8_t, Entry> entries_;
  std::size_t default_queue_ = 0;
};

struct ClassQueue {
  std::deque<Packet> packets;
  std::uint64_t bytes_held = 0;
  std::uint32_t weight = 1;
  std::uint64_t quantum = 0;
  std::uint64_t deficit = 0;
  std::uint64_t limit_bytes = kUnlimitedBuffer;
  std::optional<RedState> red;
};

struct InterfaceConfig {
  Discipline discipline = Discipline::Pq;
  std::array<std::uint32_t, kNumClasses> weights{40, 30, 20, 10};
  /// DWRR quantum per unit of weight, in bytes.
  std::uint32_t quantum_per_weight = 150;
  RedParams red;
  std::uint64_t buffer_limit = kUnlimitedBuffer;
  BufferScope buffer_scope = BufferScope::Shared;
  double link_rate_bps = 10e6;
};

struct EnqueueOutcome {
  bool accepted = true;
  DropReason reason = DropReason::BufferOverflow;

  static EnqueueOutcome ok() { return {true, DropReason::BufferOverflow}; }
  static EnqueueOutcome dropped(DropReason r) { return {false, r}; }
};

/// A router egress discipline: classifier, per-class queues, scheduler, RED
/// and byte-accounted buffer.
class QosInterface {
 public:
  QosInterface(InterfaceConfig config, ClassifierTable classifier,
               RngStream red_rng);

  const InterfaceConfig& config() const noexcept { return config_; }
  const ClassifierTable& classifier() const noexcept { return classifier_; }

  /// Queue index the packet would join (always 0 under FIFO).
  std::size_t classify(const Packet& packet) const noexcept;

  /// RED first, then the byte limit; accepted packets get enqueued_at = now.
  EnqueueOutcome enqueue(Packet packet, double now);

  /// Dispatches on the configured discipline.
  std::optional<Packet> dequeue(double now);
  std::optional<Packet> dequeue_fifo(double now);
  /// Head of the highest-priority non-empty queue.
  std::optional<Packet> dequeue_pq(double now);
  /// Deficit weighted round-robin over the active list.
  std::optional<Packet> dequeue_dwrr(double now);

  bool empty() const noexcept { return packets_ == 0; }
  std::size_t queued_packets() const noexcept { return packets_; }
  std::uint64_t buffer_used() const noexcept { return buffer_used_; }
  /// Bytes held for packets of traffic class `c`, whichever queue they sit in.
  std::uint64_t class_bytes(TrafficClass c) const noexcept {
    return class_bytes_[index_of(c)];
  }
  const std::vector<ClassQueue>& queues() const noexcept { return queues_; }
  /// Byte share used for RED thresholds and, under PerQueue, the queue cap.
  double share_bytes(std::size_t queue) const noexcept;

 private:
  ClassQueue& queue_for(std::size_t q) { return queues_[q]; }
  Packet pop_head(std::size_t q, double now);
  bool fits(std::size_t q, std::uint32_t size) const noexcept;

  InterfaceConfig config_;
  ClassifierTable classifier_;
  RngStream red_rng_;
  std::vector<ClassQueue> queues_;
  std::array<std::uint64_t, kNumClasses> class_bytes_{};
  std::uint64_t buffer_used_ = 0;
  std::size_t packets_ = 0;

  // DWRR bookkeeping: queues with backlog in service order, and whether the
  // front queue has already received its quantum for the current visit.
  std::deque<std::size_t> active_;
  bool in_visit_ = false;
};

/// A QosInterface bound to a transmitter with a fixed line rate.
class EgressPort {
 public:
  struct Started {
    double completion_time = 0.0;
    double queuing_delay = 0.0;
  };

  EgressPort(QosInterface qdisc, double rate_bps, double propagation)
      : qdisc_(std::move(qdisc)), rate_bps_(rate_bps), propagation_(propagation) {}

  QosInterface& qdisc() noexcept { return qdisc_; }
  const QosInterface& qdisc() const noexcept { return qdisc_; }
  double rate_bps() const noexcept { return rate_bps_; }
  double propagation() const noexcept { return propagation_; }
  bool busy() const noexcept { return in_service_.has_value(); }
  const std::optional<Packet>& in_service() const noexcept { return in_service_; }

  /// Service time of `bytes` on this line.
  double service_time(std::uint32_t bytes) const noexcept {
    return bytes * 8.0 / rate_bps_;
  }

  /// Puts a dequeued packet on the wire. Stamps dequeued_at = now.
  /// Throws PreconditionError if the transmitter is already busy.
  Started start_transmission(Packet packet, double now);

  /// Releases the packet whose transmission just completed.
  Packet finish_transmission();

 private:
  QosInterface qdisc_;
  double rate_bps_;
  double propagation_;
  std::optional<Packet> in_service_;
};

}  // namespace qosim

#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qosim/metrics.hpp"
#include "qosim/packet.hpp"
#include "qosim/qdisc.hpp"
#include "qosim/rng.hpp"
#include "qosim/sim.hpp"
#include "qosim/topology.hpp"
#include "qosim/traffic.hpp"

namespace qosim {

/// Request/reply server with a single FIFO service queue shared by every
/// requester. Reply emission is paced at `service_rate_bps`.
struct ServerModel {
  NodeId id = kNoNode;
  double service_rate_bps = 1e6;
  std::uint32_t reply_payload_bytes = 500;
  std::uint32_t header_bytes = kHeaderBytes;
};

/// Reply for `request`: same class and DSCP, addressed back to the requester.
Packet make_reply(const Packet& request, const ServerModel& server,
                  std::uint64_t id);

class ServerQueue {
 public:
  explicit ServerQueue(ServerModel model);

  const ServerModel& model() const noexcept { return model_; }
  /// Queues the reply; returns its completion time if service starts now.
  std::optional<double> submit(Packet reply, double now);
  /// Ends the reply in service (its created_at becomes `now`) and starts the
  /// next one, whose completion time lands in `next_completion`.
  Packet finish(double now, std::optional<double>& next_completion);

  bool busy() const noexcept { return busy_; }
  std::size_t backlog() const noexcept { return queue_.size(); }

 private:
  double service_time(const Packet& p) const noexcept {
    return p.size_bytes * 8.0 / model_.service_rate_bps;
  }

  ServerModel model_;
  std::deque<Packet> queue_;  // front is in service while busy_
  bool busy_ = false;
};

/// One traffic source instance. `name` keys its random stream.
struct SourceSpec {
  std::string name;
  TrafficSource source;
};

struct NetworkConfig {
  Topology topology;
  /// QoS applied on every router egress; link_rate_bps is taken per link.
  InterfaceConfig router_qos;
  /// Port whose queuing delay and buffer usage are reported.
  std::string monitored_port = "ho-router>bo-router";
  std::vector<SourceSpec> sources;
  std::optional<ServerModel> server;
  MetricsConfig metrics;
  std::uint64_t seed = 1;
};

struct Counters {
  std::uint64_t generated = 0;  // source emissions + server replies
  std::uint64_t delivered = 0;
  std::uint64_t dropped_red = 0;
  std::uint64_t dropped_overflow = 0;
  std::uint64_t blocked = 0;
  std::uint64_t in_flight = 0;  // filled at end of run
  std::array<std::uint64_t, kNumClasses> generated_bytes{};
  std::array<std::uint64_t, kNumClasses> delivered_bytes{};
  std::map<std::string, std::uint64_t> delivered_bytes_to;    // by node name
  std::map<std::string, std::uint64_t> delivered_bytes_from;  // by node name
  /// Largest byte count any single router queue held, and the largest total
  /// held by one router interface.
  std::uint64_t peak_queue_bytes = 0;
  std::uint64_t peak_interface_bytes = 0;
  std::uint64_t buffer_violations = 0;
  std::uint64_t server_replies = 0;

  bool conserved() const noexcept {
    return generated == delivered + dropped_red + dropped_overflow + blocked + in_flight;
  }
  /// Flat name/value list in a fixed order.
  std::vector<std::pair<std::string, std::uint64_t>> rows() const;
};

/// Per-hop timing reported after every transmission completes.
struct HopRecord {
  std::size_t port = 0;
  std::uint64_t packet_id = 0;
  TrafficClass cls = TrafficClass::Voice;
  std::uint32_t size_bytes = 0;
  double start = 0.0;
  double finish = 0.0;
  double arrival = 0.0;
};

struct RunResult {
  std::vector<MetricSeries> series;
  Counters counters;
  RunSummary sim;
  std::uint64_t peak_buffer_bytes = 0;
  std::array<std::uint64_t, kNumClasses> peak_buffer_class{};
};

/// The event-driven network: sources, per-link egress ports, node processing,
/// tunnel handling and the server. One instance is one run.
class Network {
 public:
  explicit Network(NetworkConfig config);
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  /// Runs to the configured duration and collects results. Call once.
  RunResult run();

  void set_hop_observer(std::function<void(const HopRecord&)> f) {
    hop_observer_ = std::move(f);
  }
  Simulator& simulator() noexcept { return sim_; }
  const Topology& topology() const noexcept { return config_.topology; }
  const EgressPort& port(std::size_t i) const { return ports_.at(i); }
  std::size_t monitored_port() const noexcept { return monitored_; }
  const Counters& counters() const noexcept { return counters_; }

 private:
  void schedule_source(std::size_t index, double at);
  void emit_source(std::size_t index);
  void arrive(NodeId node, Packet packet);
  void forward(NodeId node, Packet packet);
  void deliver(NodeId node, Packet packet);
  void enqueue(std::size_t port, Packet packet);
  void try_start(std::size_t port);
  void complete(std::size_t port);
  void server_done();
  void sample_buffer(bool tick);
  std::uint64_t in_flight() const;

  NetworkConfig config_;
  Simulator sim_;
  Collector collector_;
  PacketIds ids_;
  std::vector<EgressPort> ports_;
  std::vector<bool> qos_port_;
  std::size_t monitored_ = 0;
  std::vector<RngStream> source_rng_;
  std::optional<ServerQueue> server_;
  Counters counters_;
  std::uint64_t in_transit_ = 0;
  std::function<void(const HopRecord&)> hop_observer_;
  bool ran_ = false;
};

}  // namespace qosim

#include "qosim/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qosim/error.hpp"

namespace qosim {

Packet make_reply(const Packet& request, const ServerModel& server,
                  std::uint64_t id) {
  Packet r;
  r.id = id;
  r.cls = request.cls;
  r.dscp = request.dscp;
  r.role = PacketRole::Reply;
  r.payload_bytes = server.reply_payload_bytes;
  r.size_bytes = server.reply_payload_bytes + server.header_bytes;
  r.src = server.id;
  r.dst = request.src;
  return r;
}

// --- ServerQueue -----------------------------------------------------------

ServerQueue::ServerQueue(ServerModel model) : model_(model) {
  if (!(model_.service_rate_bps > 0.0)) {
    throw PreconditionError("server service rate must be > 0");
  }
  if (model_.reply_payload_bytes + model_.header_bytes == 0) {
    throw PreconditionError("server reply size must be > 0");
  }
}

std::optional<double> ServerQueue::submit(Packet reply, double now) {
  queue_.push_back(std::move(reply));
  if (busy_) return std::nullopt;
  busy_ = true;
  return now + service_time(queue_.front());
}

Packet ServerQueue::finish(double now, std::optional<double>& next_completion) {
  if (!busy_ || queue_.empty()) throw PreconditionError("server is idle");
  Packet done = std::move(queue_.front());
  queue_.pop_front();
  done.created_at = now;
  next_completion.reset();
  if (queue_.empty()) {
    busy_ = false;
  } else {
    next_completion = now + service_time(queue_.front());
  }
  return done;
}

// --- Counters --------------------------------------------------------------

std::vector<std::pair<std::string, std::uint64_t>> Counters::rows() const {
  std::vector<std::pair<std::string, std::uint64_t>> out = {
      {"generated", generated},
      {"delivered", delivered},
      {"dropped_red", dropped_red},
      {"dropped_overflow", dropped_overflow},
      {"blocked", blocked},
      {"in_flight", in_flight},
      {"server_replies", server_replies},
      {"peak_queue_bytes", peak_queue_bytes},
      {"peak_interface_bytes", peak_interface_bytes},
      {"buffer_violations", buffer_violations},
  };
  for (TrafficClass c : kAllClasses) {
    out.emplace_back("generated_bytes." + std::string(to_string(c)),
                     generated_bytes[index_of(c)]);
  }
  for (TrafficClass c : kAllClasses) {
    out.emplace_back("delivered_bytes." + std::string(to_string(c)),
                     delivered_bytes[index_of(c)]);
  }
  for (const auto& [node, bytes] : delivered_bytes_to) {
    out.emplace_back("delivered_bytes_to." + node, bytes);
  }
  for (const auto& [node, bytes] : delivered_bytes_from) {
    out.emplace_back("delivered_bytes_from." + node, bytes);
  }
  return out;
}

// --- Network ---------------------------------------------------------------

Network::Network(NetworkConfig config)
    : config_(std::move(config)), collector_(config_.metrics) {
  Topology& topo = config_.topology;
  if (!(config_.metrics.duration > 0.0)) {
    throw PreconditionError("duration must be > 0");
  }

  bool found_monitor = false;
  for (const Port& p : topo.ports()) {
    const Link& link = topo.links()[p.link];
    const bool router = topo.node(p.from).kind == NodeKind::Router;
    InterfaceConfig ic;
    if (router) {
      ic = config_.router_qos;
    } else {
      ic.discipline = Discipline::Fifo;
      ic.red.enabled = false;
      ic.buffer_limit = kUnlimitedBuffer;
    }
    ic.link_rate_bps = link.rate_bps;
    const std::string name = topo.port_name(p.index);
    ports_.emplace_back(QosInterface(ic, ClassifierTable::diffserv_default(),
                                     RngStream("red/" + name, config_.seed)),
                        link.rate_bps, link.propagation);
    qos_port_.push_back(router);
    if (name == config_.monitored_port) {
      monitored_ = p.index;
      found_monitor = true;
    }
  }
  if (!found_monitor) {
    throw PreconditionError("monitored port '" + config_.monitored_port +
                            "' does not exist");
  }

  for (const SourceSpec& s : config_.sources) {
    s.source.validate();
    if (s.source.src >= topo.nodes().size() || s.source.dst >= topo.nodes().size()) {
      throw PreconditionError("source '" + s.name + "' has unknown endpoints");
    }
    source_rng_.emplace_back("source/" + s.name, config_.seed);
  }
  if (config_.server) server_.emplace(*config_.server);
}

void Network::schedule_source(std::size_t index, double at) {
  if (at > config_.metrics.duration) return;
  sim_.schedule(at, EventKind::SourceEmit, [this, index] { emit_source(index); });
}

void Network::emit_source(std::size_t index) {
  const TrafficSource& src = config_.sources[index].source;
  Emission e = emit(src, sim_.now(), source_rng_[index], ids_);
  for (Packet& p : e.packets) {
    ++counters_.generated;
    counters_.generated_bytes[index_of(p.cls)] += p.size_bytes;
    forward(src.src, std::move(p));
  }
  schedule_source(index, e.next_emit);
}

void Network::arrive(NodeId node, Packet packet) {
  const double delay = config_.topology.node(node).processing_delay;
  if (delay > 0.0) {
    ++in_transit_;
    sim_.schedule_in(delay, EventKind::PacketArrival,
                     [this, node, p = std::move(packet)]() mutable {
                       --in_transit_;
                       forward(node, std::move(p));
                     });
    return;
  }
  forward(node, std::move(packet));
}

void Network::forward(NodeId node, Packet packet) {
  const RouteDecision d = config_.topology.route(packet, node);
  switch (d.kind) {
    case RouteDecision::Kind::Deliver:
      deliver(node, std::move(packet));
      return;
    case RouteDecision::Kind::Blocked:
      ++counters_.blocked;
      return;
    case RouteDecision::Kind::Forward:
      enqueue(d.port, std::move(packet));
      return;
  }
}

void Network::deliver(NodeId node, Packet packet) {
  const double now = sim_.now();
  packet.delivered_at = now;
  const Topology& topo = config_.topology;
  const Node& at = topo.node(node);

  ++counters_.delivered;
  counters_.delivered_bytes[index_of(packet.cls)] += packet.size_bytes;
  counters_.delivered_bytes_to[at.name] += packet.size_bytes;
  counters_.delivered_bytes_from[topo.node(packet.src).name] += packet.size_bytes;

  collector_.record_e2e_delay(packet.cls, now - packet.created_at, now);
  const bool end_station =
      at.kind == NodeKind::Host || at.kind == NodeKind::LanAggregate;
  if (end_station && !at.remote) {
    collector_.record_delivery(packet.cls, packet.size_bytes, now);
  }

  if (server_ && node == server_->model().id && packet.role == PacketRole::Request) {
    if (auto done = server_->submit(make_reply(packet, server_->model(), ids_.take()), now)) {
      sim_.schedule(*done, EventKind::Other, [this] { server_done(); });
    }
  }
}

void Network::server_done() {
  std::optional<double> next;
  Packet reply = server_->finish(sim_.now(), next);
  if (next) sim_.schedule(*next, EventKind::Other, [this] { server_done(); });
  ++counters_.generated;
  ++counters_.server_replies;
  counters_.generated_bytes[index_of(reply.cls)] += reply.size_bytes;
  forward(server_->model().id, std::move(reply));
}

void Network::enqueue(std::size_t port, Packet packet) {
  const double now = sim_.now();
  QosInterface& q = ports_[port].qdisc();
  const TrafficClass cls = packet.cls;
  const std::uint32_t size = packet.size_bytes;
  const EnqueueOutcome out = q.enqueue(std::move(packet), now);
  if (!out.accepted) {
    if (out.reason == DropReason::RedEarly) {
      ++counters_.dropped_red;
    } else {
      ++counters_.dropped_overflow;
    }
    collector_.record_drop(cls, size, out.reason, now);
    return;
  }
  if (qos_port_[port]) {
    const std::uint64_t limit = q.config().buffer_limit;
    for (const ClassQueue& cq : q.queues()) {
      counters_.peak_queue_bytes = std::max(counters_.peak_queue_bytes, cq.bytes_held);
      if (cq.bytes_held > limit) ++counters_.buffer_violations;
    }
    counters_.peak_interface_bytes =
        std::max(counters_.peak_interface_bytes, q.buffer_used());
    if (q.config().buffer_scope == BufferScope::Shared && q.buffer_used() > limit) {
      ++counters_.buffer_violations;
    }
  }
  if (port == monitored_) sample_buffer(false);
  try_start(port);
}

void Network::try_start(std::size_t port) {
  EgressPort& ep = ports_[port];
  if (ep.busy()) return;
  const double now = sim_.now();
  std::optional<Packet> next = ep.qdisc().dequeue(now);
  if (!next) return;
  const TrafficClass cls = next->cls;
  const EgressPort::Started s = ep.start_transmission(std::move(*next), now);
  if (port == monitored_) {
    collector_.record_queuing_delay(cls, s.queuing_delay, now);
    sample_buffer(false);
  }
  sim_.schedule(s.completion_time, EventKind::TransmissionComplete,
                [this, port] { complete(port); });
}

void Network::complete(std::size_t port) {
  EgressPort& ep = ports_[port];
  Packet p = ep.finish_transmission();
  const double now = sim_.now();
  const double arrival = now + ep.propagation();
  if (hop_observer_) {
    hop_observer_({port, p.id, p.cls, p.size_bytes, p.dequeued_at.value_or(now),
                   now, arrival});
  }
  const NodeId to = config_.topology.ports()[port].to;
  ++in_transit_;
  sim_.schedule(arrival, EventKind::PacketArrival,
                [this, to, p = std::move(p)]() mutable {
                  --in_transit_;
                  arrive(to, std::move(p));
                });
  try_start(port);
}

void Network::sample_buffer(bool tick) {
  const QosInterface& q = ports_[monitored_].qdisc();
  std::array<std::uint64_t, kNumClasses> per_class{};
  for (TrafficClass c : kAllClasses) per_class[index_of(c)] = q.class_bytes(c);
  if (tick) {
    collector_.tick_buffer_usage(per_class, sim_.now());
  } else {
    collector_.record_buffer_usage(per_class, sim_.now());
  }
}

std::uint64_t Network::in_flight() const {
  std::uint64_t n = in_transit_;
  for (const EgressPort& ep : ports_) {
    n += ep.qdisc().queued_packets();
    if (ep.busy()) ++n;
  }
  return n;
}

RunResult Network::run() {
  if (ran_) throw PreconditionError("a network instance runs once");
  ran_ = true;
  const double duration = config_.metrics.duration;

  for (std::size_t i = 0; i < config_.sources.size(); ++i) {
    schedule_source(i, config_.sources[i].source.start_time);
  }
  const double tick = config_.metrics.tick;
  const auto ticks = static_cast<std::uint64_t>(std::floor(duration / tick + 1e-9));
  for (std::uint64_t k = 1; k <= ticks; ++k) {
    sim_.schedule(static_cast<double>(k) * tick, EventKind::MetricSnapshot,
                  [this] { sample_buffer(true); });
  }

  RunResult r;
  r.sim = sim_.run_until(duration);
  counters_.in_flight = in_flight();
  r.series = collector_.finalize();
  r.counters = counters_;
  r.peak_buffer_bytes = collector_.peak_buffer_usage();
  for (TrafficClass c : kAllClasses) {
    r.peak_buffer_class[index_of(c)] = collector_.peak_buffer_usage(c);
  }
  return r;
}

}  // namespace qosim

#include "qosim/topology.hpp"

#include <deque>
#include <string>

#include "qosim/error.hpp"

namespace qosim {

std::string_view to_string(NodeKind k) noexcept {
  switch (k) {
    case NodeKind::Host: return "host";
    case NodeKind::LanAggregate: return "lan-aggregate";
    case NodeKind::Router: return "router";
    case NodeKind::Server: return "server";
    case NodeKind::Firewall: return "firewall";
    case NodeKind::Cloud: return "cloud";
  }
  return "unknown";
}

NodeKind parse_node_kind(std::string_view name) {
  for (NodeKind k : {NodeKind::Host, NodeKind::LanAggregate, NodeKind::Router,
                     NodeKind::Server, NodeKind::Firewall, NodeKind::Cloud}) {
    if (to_string(k) == name) return k;
  }
  throw PreconditionError("unknown node kind '" + std::string(name) + "'");
}

// --- VPN -------------------------------------------------------------------

bool VpnTunnel::permits(const Packet& p) const noexcept {
  for (const FlowGrant& g : permitted) {
    if (g.app != p.cls) continue;
    if (g.user == p.src && g.server == p.dst) return true;
    if (g.user == p.dst && g.server == p.src) return true;
  }
  return false;
}

Packet vpn_encapsulate(const Packet& packet, const VpnTunnel& tunnel,
                       NodeId outer_dst) {
  if (packet.encapsulated) {
    throw PreconditionError("packet " + std::to_string(packet.id) +
                            " is already encapsulated");
  }
  if (!tunnel.permits(packet)) {
    throw PreconditionError("flow of packet " + std::to_string(packet.id) +
                            " is not permitted through the tunnel");
  }
  Packet out = packet;
  out.encapsulated = true;
  out.inner_dst = packet.dst;
  out.inner_size_bytes = packet.size_bytes;
  out.dst = outer_dst;
  out.size_bytes = packet.size_bytes + tunnel.overhead_bytes;
  return out;
}

Packet vpn_decapsulate(const Packet& packet, const VpnTunnel&) {
  if (!packet.encapsulated) {
    throw PreconditionError("packet " + std::to_string(packet.id) +
                            " is not encapsulated");
  }
  Packet out = packet;
  out.encapsulated = false;
  out.dst = packet.inner_dst;
  out.size_bytes = packet.inner_size_bytes;
  out.inner_dst = kNoNode;
  out.inner_size_bytes = 0;
  return out;
}

// --- Topology --------------------------------------------------------------

NodeId Topology::add_node(std::string name, NodeKind kind,
                          double processing_delay, bool remote) {
  if (by_name_.count(name) != 0) {
    throw PreconditionError("duplicate node '" + name + "'");
  }
  if (processing_delay < 0.0) {
    throw PreconditionError("node '" + name + "': processing delay must be >= 0");
  }
  const auto id = static_cast<NodeId>(nodes_.size());
  by_name_.emplace(name, id);
  nodes_.push_back({id, std::move(name), kind, processing_delay, remote});
  out_ports_.emplace_back();
  next_.clear();
  return id;
}

std::size_t Topology::add_link(NodeId a, NodeId b, double rate_bps,
                               double propagation) {
  if (a >= nodes_.size() || b >= nodes_.size() || a == b) {
    throw PreconditionError("link endpoints must be two distinct known nodes");
  }
  if (!(rate_bps > 0.0)) {
    throw PreconditionError("link " + nodes_[a].name + "-" + nodes_[b].name +
                            ": rate must be > 0");
  }
  if (propagation < 0.0) {
    throw PreconditionError("link " + nodes_[a].name + "-" + nodes_[b].name +
                            ": propagation must be >= 0");
  }
  const std::size_t l = links_.size();
  links_.push_back({a, b, rate_bps, propagation});
  ports_.push_back({2 * l, l, a, b});
  ports_.push_back({2 * l + 1, l, b, a});
  out_ports_[a].push_back(2 * l);
  out_ports_[b].push_back(2 * l + 1);
  next_.clear();
  return l;
}

void Topology::set_tunnel(VpnTunnel tunnel) {
  if (tunnel.entry >= nodes_.size() || tunnel.exit >= nodes_.size() ||
      tunnel.entry == tunnel.exit) {
    throw PreconditionError("tunnel endpoints must be two distinct known nodes");
  }
  tunnel_ = std::move(tunnel);
}

void Topology::finalize() {
  const std::size_t n = nodes_.size();
  next_.assign(n, std::vector<NodeId>(n, kNoNode));
  // BFS outward from each destination; the parent toward dst is the next hop.
  for (NodeId dst = 0; dst < n; ++dst) {
    std::vector<bool> seen(n, false);
    std::deque<NodeId> frontier{dst};
    seen[dst] = true;
    while (!frontier.empty()) {
      const NodeId u = frontier.front();
      frontier.pop_front();
      for (std::size_t port : out_ports_[u]) {
        const NodeId v = ports_[port].to;
        if (seen[v]) continue;
        seen[v] = true;
        next_[v][dst] = u;
        frontier.push_back(v);
      }
    }
    for (NodeId src = 0; src < n; ++src) {
      if (!seen[src]) {
        throw PreconditionError("no route from '" + nodes_[src].name + "' to '" +
                                nodes_[dst].name + "'");
      }
    }
  }
}

std::optional<NodeId> Topology::find(std::string_view name) const {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

NodeId Topology::require(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw PreconditionError("unknown node '" + std::string(name) + "'");
}

std::size_t Topology::port_between(NodeId from, NodeId to) const {
  if (from < out_ports_.size()) {
    for (std::size_t port : out_ports_[from]) {
      if (ports_[port].to == to) return port;
    }
  }
  throw PreconditionError("no link between nodes " + std::to_string(from) +
                          " and " + std::to_string(to));
}

std::string Topology::port_name(std::size_t port) const {
  const Port& p = ports_.at(port);
  return nodes_[p.from].name + ">" + nodes_[p.to].name;
}

std::optional<NodeId> Topology::next_hop(NodeId at, NodeId dst) const {
  if (next_.empty()) throw PreconditionError("topology not finalized");
  if (at == dst) return std::nullopt;
  return next_.at(at).at(dst);
}

std::vector<NodeId> Topology::path(NodeId src, NodeId dst) const {
  std::vector<NodeId> hops{src};
  while (auto nh = next_hop(hops.back(), dst)) hops.push_back(*nh);
  return hops;
}

bool Topology::crosses_tunnel(NodeId at, NodeId dst) const {
  const NodeId far = at == tunnel_->entry ? tunnel_->exit : tunnel_->entry;
  if (dst == far) return false;
  for (NodeId hop : path(at, dst)) {
    if (hop == far) return true;
  }
  return false;
}

RouteDecision Topology::route(Packet& packet, NodeId at) const {
  using K = RouteDecision::Kind;
  if (packet.encapsulated && packet.dst == at) {
    packet = vpn_decapsulate(packet, *tunnel_);
  }
  if (packet.dst == at) return {K::Deliver, 0};

  if (tunnel_ && !packet.encapsulated &&
      (at == tunnel_->entry || at == tunnel_->exit) &&
      crosses_tunnel(at, packet.dst)) {
    if (!tunnel_->enabled || !tunnel_->permits(packet)) return {K::Blocked, 0};
    const NodeId far = at == tunnel_->entry ? tunnel_->exit : tunnel_->entry;
    packet = vpn_encapsulate(packet, *tunnel_, far);
  }
  return {K::Forward, port_between(at, *next_hop(at, packet.dst))};
}

// --- presets ---------------------------------------------------------------

std::string station_name(std::string_view base, std::uint32_t index,
                         std::uint32_t count) {
  std::string name(base);
  if (count > 1) name += "-" + std::to_string(index + 1);
  return name;
}

Topology enterprise_topology(const TopologyParams& p) {
  Topology t;
  const NodeId ho = t.add_node("ho-router", NodeKind::Router);
  const NodeId bo = t.add_node("bo-router", NodeKind::Router);
  t.add_link(ho, bo, p.bottleneck_bps, p.bottleneck_propagation);

  for (std::uint32_t i = 0; i < p.voice_pairs; ++i) {
    const NodeId tx = t.add_node(station_name("voice-tx", i, p.voice_pairs), NodeKind::Host);
    const NodeId rx = t.add_node(station_name("voice-rx", i, p.voice_pairs), NodeKind::Host);
    t.add_link(tx, ho, p.access_bps, p.lan_propagation);
    t.add_link(bo, rx, p.access_bps, p.lan_propagation);
  }
  for (std::uint32_t i = 0; i < p.video_pairs; ++i) {
    const NodeId tx = t.add_node(station_name("video-tx", i, p.video_pairs), NodeKind::Host);
    const NodeId rx = t.add_node(station_name("video-rx", i, p.video_pairs), NodeKind::Host);
    t.add_link(tx, ho, p.access_bps, p.lan_propagation);
    t.add_link(bo, rx, p.access_bps, p.lan_propagation);
  }
  const NodeId users = t.add_node("data-users", NodeKind::LanAggregate);
  const NodeId server = t.add_node("data-server", NodeKind::Server);
  t.add_link(users, ho, p.lan_bps, p.lan_propagation);
  t.add_link(bo, server, p.server_bps, p.lan_propagation);
  t.finalize();
  return t;
}

Topology enterprise_vpn_topology(const TopologyParams& p, std::uint32_t overhead_bytes,
                                 bool vpn_enabled) {
  Topology t = enterprise_topology(p);
  const NodeId bo = t.require("bo-router");
  const NodeId fw = t.add_node("firewall", NodeKind::Firewall, p.firewall_processing);
  const NodeId cloud = t.add_node("internet", NodeKind::Cloud, p.cloud_processing);
  const NodeId gw = t.add_node("remote-gw", NodeKind::Router, 0.0, true);
  const NodeId r1 = t.add_node("r-user1", NodeKind::Host, 0.0, true);
  const NodeId r2 = t.add_node("r-user2", NodeKind::Host, 0.0, true);
  t.add_link(bo, fw, p.lan_bps, p.lan_propagation);
  t.add_link(fw, cloud, p.internet_bps, p.cloud_propagation);
  t.add_link(cloud, gw, p.internet_bps, p.internet_propagation);
  t.add_link(gw, r1, p.lan_bps, p.lan_propagation);
  t.add_link(gw, r2, p.lan_bps, p.lan_propagation);

  VpnTunnel tunnel;
  tunnel.entry = gw;
  tunnel.exit = fw;
  tunnel.overhead_bytes = overhead_bytes;
  tunnel.enabled = vpn_enabled;
  tunnel.permitted.push_back({r1, t.require("data-server"), TrafficClass::Database});
  t.set_tunnel(std::move(tunnel));
  t.finalize();
  return t;
}

}  // namespace qosim

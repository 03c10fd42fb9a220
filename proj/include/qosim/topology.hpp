#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qosim/packet.hpp"

namespace qosim {

enum class NodeKind : std::uint8_t { Host, LanAggregate, Router, Server, Firewall, Cloud };
std::string_view to_string(NodeKind k) noexcept;
NodeKind parse_node_kind(std::string_view name);

struct Node {
  NodeId id = kNoNode;
  std::string name;
  NodeKind kind = NodeKind::Host;
  /// Fixed per-packet delay before forwarding (firewall / cloud).
  double processing_delay = 0.0;
  /// Stations outside the enterprise (excluded from internal throughput).
  bool remote = false;
};

struct Link {
  NodeId a = kNoNode;
  NodeId b = kNoNode;
  double rate_bps = 0.0;
  double propagation = 0.0;
};

/// Directed half of a link; ports are numbered 2*link + (0 for a->b, 1 for b->a).
struct Port {
  std::size_t index = 0;
  std::size_t link = 0;
  NodeId from = kNoNode;
  NodeId to = kNoNode;
};

struct FlowGrant {
  NodeId user = kNoNode;
  NodeId server = kNoNode;
  TrafficClass app = TrafficClass::Database;
  friend bool operator==(const FlowGrant&, const FlowGrant&) = default;
};

/// Bidirectional tunnel between `entry` (remote side) and `exit` (enterprise
/// side). Only granted (user, server, app) flows may cross it.
struct VpnTunnel {
  NodeId entry = kNoNode;
  NodeId exit = kNoNode;
  std::uint32_t overhead_bytes = 60;
  std::vector<FlowGrant> permitted;
  /// With `enabled` false the tunnel exists but admits nothing.
  bool enabled = true;

  /// True if `p` belongs to a granted flow in either direction.
  bool permits(const Packet& p) const noexcept;
};

/// Adds the outer header; outer destination is `outer_dst` (the far tunnel
/// end). Throws PreconditionError on double encapsulation or an unpermitted
/// flow.
Packet vpn_encapsulate(const Packet& packet, const VpnTunnel& tunnel,
                       NodeId outer_dst);
inline Packet vpn_encapsulate(const Packet& packet, const VpnTunnel& tunnel) {
  return vpn_encapsulate(packet, tunnel, tunnel.exit);
}
/// Restores the inner packet. Throws PreconditionError on a plain packet.
Packet vpn_decapsulate(const Packet& packet, const VpnTunnel& tunnel);

struct RouteDecision {
  enum class Kind : std::uint8_t { Deliver, Forward, Blocked };
  Kind kind = Kind::Deliver;
  std::size_t port = 0;  // valid for Forward
};

/// Nodes, links and static shortest-hop routes (precomputed by finalize()).
class Topology {
 public:
  NodeId add_node(std::string name, NodeKind kind, double processing_delay = 0.0,
                  bool remote = false);
  /// Throws PreconditionError for unknown nodes, rate <= 0 or propagation < 0.
  std::size_t add_link(NodeId a, NodeId b, double rate_bps, double propagation);
  void set_tunnel(VpnTunnel tunnel);

  /// Computes next hops for every (node, destination) pair. Throws
  /// PreconditionError naming the pair if the graph is disconnected.
  void finalize();

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Link>& links() const noexcept { return links_; }
  const std::vector<Port>& ports() const noexcept { return ports_; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  Node& node(NodeId id) { return nodes_.at(id); }
  const std::optional<VpnTunnel>& tunnel() const noexcept { return tunnel_; }
  std::optional<VpnTunnel>& tunnel() noexcept { return tunnel_; }

  std::optional<NodeId> find(std::string_view name) const;
  /// Throws PreconditionError if absent.
  NodeId require(std::string_view name) const;
  /// Throws PreconditionError if the nodes are not adjacent.
  std::size_t port_between(NodeId from, NodeId to) const;
  /// Port name "<from>><to>", e.g. "ho-router>bo-router".
  std::string port_name(std::size_t port) const;

  /// Next node from `at` toward `dst`; nullopt when at == dst.
  std::optional<NodeId> next_hop(NodeId at, NodeId dst) const;
  /// Hop sequence from src to dst inclusive.
  std::vector<NodeId> path(NodeId src, NodeId dst) const;

  /// Forwarding decision at `at`. Decapsulates at the tunnel end a packet is
  /// addressed to and encapsulates permitted flows that must cross the
  /// tunnel; unpermitted crossings are Blocked.
  RouteDecision route(Packet& packet, NodeId at) const;

 private:
  bool crosses_tunnel(NodeId at, NodeId dst) const;

  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<Port> ports_;
  std::vector<std::vector<std::size_t>> out_ports_;
  std::map<std::string, NodeId, std::less<>> by_name_;
  std::optional<VpnTunnel> tunnel_;
  // next_[at][dst]; kNoNode on the diagonal.
  std::vector<std::vector<NodeId>> next_;
};

/// Link rates and delays for the two built-in topologies.
struct TopologyParams {
  double bottleneck_bps = 49e6;
  double bottleneck_propagation = 1e-3;
  /// Voice / video station access links.
  double access_bps = 100e6;
  /// Data-users LAN uplink and server uplink ("10 Base-T").
  double lan_bps = 10e6;
  double server_bps = 10e6;
  double lan_propagation = 5e-6;
  double internet_bps = 10e6;
  double internet_propagation = 1e-3;
  double cloud_propagation = 30e-3;
  double cloud_processing = 1e-3;
  double firewall_processing = 0.5e-3;
  std::uint32_t voice_pairs = 1;
  std::uint32_t video_pairs = 1;
};

/// Head office and branch office joined by one WAN link:
///   voice-tx*, video-tx*, data-users -> ho-router -> bo-router -> voice-rx*,
///   video-rx*, data-server.
/// With several pairs, stations are suffixed -1, -2, ...
Topology enterprise_topology(const TopologyParams& p);

/// enterprise_topology() plus firewall, internet cloud, remote gateway and two remote users.
/// A tunnel remote-gw <-> firewall grants r-user1 database access to
/// data-server; r-user2 holds no grant.
Topology enterprise_vpn_topology(const TopologyParams& p, std::uint32_t overhead_bytes,
                                 bool vpn_enabled);

/// Station names used by the presets.
std::string station_name(std::string_view base, std::uint32_t index,
                         std::uint32_t count);

}  // namespace qosim

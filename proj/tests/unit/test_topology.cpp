#include <string>
#include <vector>

#include "doctest.h"
#include "qosim/error.hpp"
#include "qosim/topology.hpp"
#include "support.hpp"

using namespace qosim;
using K = RouteDecision::Kind;

namespace {

std::vector<std::string> names(const Topology& t, const std::vector<NodeId>& ids) {
  std::vector<std::string> out;
  for (NodeId id : ids) out.push_back(t.node(id).name);
  return out;
}

Packet request(const Topology& t, const char* from, const char* to) {
  auto p = qt::packet(1, TrafficClass::Database, 240);
  p.src = t.require(from);
  p.dst = t.require(to);
  return p;
}

// Walks route() hop by hop; returns visited nodes and the final decision.
std::pair<std::vector<std::string>, K> walk(const Topology& t, Packet p) {
  std::vector<std::string> seen;
  NodeId at = p.src;
  for (int guard = 0; guard < 32; ++guard) {
    seen.push_back(t.node(at).name);
    const auto d = t.route(p, at);
    if (d.kind != K::Forward) return {seen, d.kind};
    at = t.ports()[d.port].to;
  }
  FAIL("routing loop");
  return {seen, K::Blocked};
}

}  // namespace

TEST_SUITE("topology") {

TEST_CASE("enterprise data path crosses the head office router") {
  const auto t = enterprise_topology({});
  const auto p = t.path(t.require("data-users"), t.require("data-server"));
  CHECK(names(t, p) == std::vector<std::string>{"data-users", "ho-router", "bo-router", "data-server"});
  CHECK(t.port_name(t.port_between(t.require("ho-router"), t.require("bo-router"))) ==
        "ho-router>bo-router");
}

TEST_CASE("paths are deterministic and ports numbered 2*link+dir") {
  const auto a = enterprise_vpn_topology({}, 60, true);
  const auto b = enterprise_vpn_topology({}, 60, true);
  for (NodeId s = 0; s < a.nodes().size(); ++s) {
    for (NodeId d = 0; d < a.nodes().size(); ++d) CHECK(a.path(s, d) == b.path(s, d));
  }
  for (const auto& port : a.ports()) {
    const auto& l = a.links()[port.link];
    CHECK(port.index / 2 == port.link);
    CHECK(port.from == (port.index % 2 ? l.b : l.a));
  }
}

TEST_CASE("deliver at destination") {
  const auto t = enterprise_topology({});
  auto p = request(t, "data-users", "data-server");
  CHECK(t.route(p, t.require("data-server")).kind == K::Deliver);
}

TEST_CASE("disconnected graph fails at finalize") {
  Topology t;
  t.add_node("a", NodeKind::Host);
  t.add_node("b", NodeKind::Host);
  CHECK_THROWS_AS(t.finalize(), PreconditionError);
}

TEST_CASE("bad links and duplicate nodes rejected") {
  Topology t;
  const auto a = t.add_node("a", NodeKind::Host);
  const auto b = t.add_node("b", NodeKind::Host);
  CHECK_THROWS_AS(t.add_node("a", NodeKind::Host), PreconditionError);
  CHECK_THROWS_AS(t.add_link(a, b, 0.0, 0.0), PreconditionError);
  CHECK_THROWS_AS(t.add_link(a, b, 1e6, -1.0), PreconditionError);
  CHECK_THROWS_AS(t.add_link(a, a, 1e6, 0.0), PreconditionError);
  CHECK_THROWS_AS(t.require("zz"), PreconditionError);
  CHECK_THROWS_AS(parse_node_kind("switch"), PreconditionError);
}

TEST_CASE("encapsulation adds 60 B and decapsulation restores the packet") {
  const auto t = enterprise_vpn_topology({}, 60, true);
  const auto& tun = *t.tunnel();
  const auto p = request(t, "r-user1", "data-server");
  const auto e = vpn_encapsulate(p, tun);
  CHECK(e.size_bytes == 300);
  CHECK(e.encapsulated);
  CHECK(e.dst == tun.exit);
  CHECK_THROWS_AS(vpn_encapsulate(e, tun), PreconditionError);
  const auto d = vpn_decapsulate(e, tun);
  CHECK(d.size_bytes == 240);
  CHECK(d == p);
  CHECK_THROWS_AS(vpn_decapsulate(p, tun), PreconditionError);
  auto zero = tun;
  zero.overhead_bytes = 0;
  CHECK(vpn_encapsulate(p, zero).size_bytes == 240);
}

TEST_CASE("unpermitted flows cannot be encapsulated") {
  const auto t = enterprise_vpn_topology({}, 60, true);
  CHECK_THROWS_AS(vpn_encapsulate(request(t, "r-user2", "data-server"), *t.tunnel()),
                  PreconditionError);
  auto voice = request(t, "r-user1", "data-server");
  voice.cls = TrafficClass::Voice;
  CHECK_THROWS_AS(vpn_encapsulate(voice, *t.tunnel()), PreconditionError);
}

TEST_CASE("granted remote request crosses the tunnel both ways") {
  const auto t = enterprise_vpn_topology({}, 60, true);
  const auto [hops, kind] = walk(t, request(t, "r-user1", "data-server"));
  CHECK(kind == K::Deliver);
  CHECK(hops == std::vector<std::string>{"r-user1", "remote-gw", "internet", "firewall",
                                         "bo-router", "data-server"});
  auto reply = request(t, "data-server", "r-user1");
  const auto back = walk(t, reply);
  CHECK(back.second == K::Deliver);
}

TEST_CASE("size on the tunnel includes overhead, not elsewhere") {
  const auto t = enterprise_vpn_topology({}, 60, true);
  auto p = request(t, "r-user1", "data-server");
  NodeId at = p.src;
  while (true) {
    const auto d = t.route(p, at);
    if (d.kind != K::Forward) break;
    const auto& port = t.ports()[d.port];
    const bool inside = (port.from == t.require("remote-gw") || port.from == t.require("internet")) &&
                        port.to != t.require("r-user1");
    CHECK(p.size_bytes == (inside ? 300u : 240u));
    at = port.to;
  }
  CHECK(p.size_bytes == 240);
  CHECK_FALSE(p.encapsulated);
}

TEST_CASE("r-user2 is blocked at the tunnel entry") {
  const auto t = enterprise_vpn_topology({}, 60, true);
  const auto [hops, kind] = walk(t, request(t, "r-user2", "data-server"));
  CHECK(kind == K::Blocked);
  CHECK(hops.back() == "remote-gw");
}

TEST_CASE("disabled tunnel blocks every crossing flow") {
  const auto t = enterprise_vpn_topology({}, 60, false);
  CHECK(walk(t, request(t, "r-user1", "data-server")).second == K::Blocked);
  CHECK(walk(t, request(t, "data-server", "r-user1")).second == K::Blocked);
  CHECK(walk(t, request(t, "data-users", "data-server")).second == K::Deliver);
}

TEST_CASE("station names") {
  CHECK(station_name("voice-tx", 0, 1) == "voice-tx");
  CHECK(station_name("voice-tx", 1, 3) == "voice-tx-2");
  TopologyParams p;
  p.voice_pairs = 2;
  const auto t = enterprise_topology(p);
  CHECK(t.find("voice-tx-1").has_value());
  CHECK(t.find("voice-rx-2").has_value());
  CHECK_FALSE(t.find("voice-tx").has_value());
}

}

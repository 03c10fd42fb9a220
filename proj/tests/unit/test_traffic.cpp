#include <cmath>
#include <cstdint>
#include <numeric>

#include "doctest.h"
#include "qosim/error.hpp"
#include "qosim/packet.hpp"
#include "qosim/traffic.hpp"

using namespace qosim;

namespace {

TrafficSource voice_source() {
  TrafficSource s;
  s.cls = TrafficClass::Voice;
  s.interval = Distribution::constant(0.02);
  s.unit_bytes = Distribution::constant(codec_frame_bytes(64000.0, 0.02));
  return s;
}

TrafficSource video_source() {
  TrafficSource s;
  s.cls = TrafficClass::Video;
  s.interval = Distribution::constant(0.1);
  s.unit_bytes = Distribution::constant(video_frame_bytes(128, 120, 9.0));
  return s;
}

TrafficSource db_source() {
  TrafficSource s;
  s.cls = TrafficClass::Database;
  s.interval = Distribution::exponential(30.0);
  s.unit_bytes = Distribution::constant(200.0);
  return s;
}

TrafficSource ftp_source() {
  TrafficSource s;
  s.cls = TrafficClass::Ftp;
  s.interval = Distribution::exponential(3600.0);
  s.unit_bytes = Distribution::exponential(1000.0);
  return s;
}

// Drives one source for `seconds` and returns on-wire bytes emitted.
std::uint64_t offered_bytes(const TrafficSource& s, double seconds) {
  PacketIds ids;
  RngStream rng("load", 1);
  std::uint64_t bytes = 0;
  double t = 0.0;
  while (t < seconds - 1e-9) {
    auto e = emit(s, t, rng, ids);
    for (const auto& p : e.packets) bytes += p.size_bytes;
    t = e.next_emit;
  }
  return bytes;
}

}  // namespace

TEST_SUITE("traffic") {

TEST_CASE("DSCP codes per class") {
  CHECK(dscp_for_class(TrafficClass::Voice).to_binary() == "101110");
  CHECK(dscp_for_class(TrafficClass::Video).to_binary() == "100010");
  CHECK(dscp_for_class(TrafficClass::Database).to_binary() == "010010");
  CHECK(dscp_for_class(TrafficClass::Ftp).to_binary() == "000000");
  CHECK_THROWS_AS(Dscp(64), PreconditionError);
  CHECK_THROWS_AS(parse_traffic_class("telnet"), PreconditionError);
  CHECK(parse_traffic_class("ftp") == TrafficClass::Ftp);
}

TEST_CASE("voice framing: 160 B payload, 200 B packet, 50 pps") {
  CHECK(codec_frame_bytes(64000.0, 0.02) == 160);
  CHECK(64000 / 8 / 160 == 50);
  PacketIds ids;
  const auto e = voice_emit(voice_source(), 1.0, ids);
  REQUIRE(e.packets.size() == 1);
  CHECK(e.packets[0].size_bytes == 200);
  CHECK(e.packets[0].dscp == dscp::EF);
  CHECK(e.packets[0].created_at == 1.0);
  CHECK(e.next_emit == doctest::Approx(1.02));
  CHECK(offered_bytes(voice_source(), 1.0) == 10000);
}

TEST_CASE("voice offered load is 80 kbps over 10 s") {
  CHECK(offered_bytes(voice_source(), 10.0) * 8 / 10 == 80000);
}

TEST_CASE("video frame 17280 B in 12 segments") {
  const std::uint32_t frame = video_frame_bytes(128, 120, 9.0);
  CHECK(frame == 128 * 120 * 9 / 8);
  CHECK(frame == 17280);
  PacketIds ids;
  const auto e = video_emit(video_source(), 0.0, ids);
  REQUIRE(e.packets.size() == 12);
  std::uint64_t payload = 0;
  for (std::size_t i = 0; i < 11; ++i) CHECK(e.packets[i].size_bytes == 1500);
  // 17280 - 11 * 1460 = 1220 payload bytes in the tail.
  CHECK(e.packets[11].payload_bytes == 17280 - 11 * 1460);
  CHECK(e.packets[11].size_bytes == 1220 + 40);
  for (const auto& p : e.packets) {
    CHECK(p.size_bytes <= 1500);
    CHECK(p.dscp == dscp::AF41);
    payload += p.payload_bytes;
  }
  CHECK(payload == frame);
  CHECK(e.next_emit == doctest::Approx(0.1));
}

TEST_CASE("video offered load over 10 s") {
  const std::uint64_t expected = 10ull * 10 * (17280 + 12 * 40);
  CHECK(offered_bytes(video_source(), 10.0) == expected);
  CHECK(expected * 8 / 10.0 == doctest::Approx(1.4208e6));
}

TEST_CASE("segmentation conserves payload") {
  for (std::uint64_t n : {0ull, 1ull, 1459ull, 1460ull, 1461ull, 17280ull, 100000ull}) {
    const auto segs = segment_payload(n, 1460);
    CHECK(std::accumulate(segs.begin(), segs.end(), std::uint64_t{0}) == n);
    CHECK(segs.size() == (n + 1459) / 1460);
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) CHECK(segs[i] == 1460);
  }
  CHECK_THROWS_AS(segment_payload(10, 0), PreconditionError);
}

TEST_CASE("database: 240 B requests, exponential(30) gaps") {
  PacketIds ids;
  RngStream rng("db", 3);
  const auto src = db_source();
  double t = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    auto e = db_emit(src, t, rng, ids);
    REQUIRE(e.packets.size() == 1);
    CHECK(e.packets[0].payload_bytes == 200);
    CHECK(e.packets[0].size_bytes == 240);
    CHECK(e.packets[0].dscp == dscp::AF21);
    CHECK(e.packets[0].role == PacketRole::Request);
    REQUIRE(e.next_emit > t);
    t = e.next_emit;
  }
  // sigma of the mean = 30/sqrt(1e4) = 0.3; tolerance 1 s.
  CHECK(std::abs(t / n - 30.0) < 1.0);
}

TEST_CASE("ftp: exponential(1000 B) files segmented at 1460") {
  PacketIds ids;
  RngStream rng("ftp", 4);
  const auto src = ftp_source();
  const int n = 10000;
  std::uint64_t payload = 0;
  for (int i = 0; i < n; ++i) {
    auto e = ftp_emit(src, 0.0, rng, ids);
    REQUIRE(!e.packets.empty());
    for (const auto& p : e.packets) {
      CHECK(p.dscp == dscp::DF);
      CHECK(p.size_bytes <= 1500);
      payload += p.payload_bytes;
    }
  }
  // Rounding up adds ~0.5 B on average; sigma of the mean = 10 B.
  CHECK(std::abs(static_cast<double>(payload) / n - 1000.0) < 30.0);
}

TEST_CASE("ftp: one-byte file yields one 41 B packet") {
  PacketIds ids;
  RngStream rng("ftp", 1);
  auto src = ftp_source();
  src.unit_bytes = Distribution::constant(1.0);
  const auto e = ftp_emit(src, 0.0, rng, ids);
  REQUIRE(e.packets.size() == 1);
  CHECK(e.packets[0].size_bytes == 41);
}

TEST_CASE("ten users emit ten times the per-user rate") {
  std::uint64_t one = offered_bytes(voice_source(), 10.0);
  std::uint64_t ten = 0;
  for (int u = 0; u < 10; ++u) ten += offered_bytes(voice_source(), 10.0);
  CHECK(ten == 10 * one);
}

TEST_CASE("emitters reject the wrong class and bad parameters") {
  PacketIds ids;
  RngStream rng("x", 1);
  CHECK_THROWS_AS(voice_emit(video_source(), 0.0, ids), PreconditionError);
  CHECK_THROWS_AS(db_emit(ftp_source(), 0.0, rng, ids), PreconditionError);
  auto bad = voice_source();
  bad.interval = Distribution::constant(0.0);
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  bad = voice_source();
  bad.unit_bytes = Distribution::constant(-5.0);
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  CHECK_NOTHROW(voice_source().validate());
}

TEST_CASE("packet ids are unique and monotone") {
  PacketIds ids;
  const auto e = video_emit(video_source(), 0.0, ids);
  for (std::size_t i = 1; i < e.packets.size(); ++i) {
    CHECK(e.packets[i].id == e.packets[i - 1].id + 1);
  }
  CHECK(ids.issued() == 12);
}

}

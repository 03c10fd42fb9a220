#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace qosim {

enum class TrafficClass : std::uint8_t { Voice = 0, Video = 1, Database = 2, Ftp = 3 };

inline constexpr std::array<TrafficClass, 4> kAllClasses = {
    TrafficClass::Voice, TrafficClass::Video, TrafficClass::Database,
    TrafficClass::Ftp};
inline constexpr std::size_t kNumClasses = kAllClasses.size();

constexpr std::size_t index_of(TrafficClass c) noexcept {
  return static_cast<std::size_t>(c);
}

std::string_view to_string(TrafficClass c) noexcept;
/// Accepts "voice", "video", "database", "ftp". Throws PreconditionError.
TrafficClass parse_traffic_class(std::string_view name);

/// Six-bit Differentiated Services Code Point.
class Dscp {
 public:
  constexpr Dscp() = default;
  /// Throws PreconditionError if `bits` does not fit in six bits.
  explicit Dscp(unsigned bits);

  constexpr std::uint8_t bits() const noexcept { return bits_; }
  /// Binary rendering, e.g. "101110".
  std::string to_binary() const;

  friend constexpr bool operator==(Dscp, Dscp) = default;

 private:
  std::uint8_t bits_ = 0;
};

namespace dscp {
inline const Dscp EF{0b101110};
inline const Dscp AF41{0b100010};
inline const Dscp AF21{0b010010};
inline const Dscp DF{0b000000};
}  // namespace dscp

/// Code point marked on packets of each application class.
Dscp dscp_for_class(TrafficClass c);

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;

enum class PacketRole : std::uint8_t { Stream, Request, Reply, File };

/// The unit flowing through the network. Sizes include the flat per-packet
/// header; the timestamp trail is filled in as the packet moves.
struct Packet {
  std::uint64_t id = 0;
  TrafficClass cls = TrafficClass::Voice;
  Dscp dscp;
  PacketRole role = PacketRole::Stream;
  std::uint32_t size_bytes = 0;
  std::uint32_t payload_bytes = 0;
  double created_at = 0.0;
  std::optional<double> enqueued_at;
  std::optional<double> dequeued_at;
  std::optional<double> delivered_at;
  NodeId src = kNoNode;
  NodeId dst = kNoNode;

  // Tunnel state: while encapsulated, `dst` is the tunnel exit and the inner
  // destination and size are parked here.
  bool encapsulated = false;
  NodeId inner_dst = kNoNode;
  std::uint32_t inner_size_bytes = 0;

  friend bool operator==(const Packet&, const Packet&) = default;
};

}  // namespace qosim

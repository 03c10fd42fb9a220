#pragma once

#include <cstdint>
#include <vector>

#include "qosim/packet.hpp"
#include "qosim/rng.hpp"

namespace qosim {

inline constexpr std::uint32_t kHeaderBytes = 40;
inline constexpr std::uint32_t kMtuPayloadBytes = 1460;

struct Distribution {
  enum class Kind : std::uint8_t { Constant, Exponential };

  Kind kind = Kind::Constant;
  double value = 0.0;  // the constant, or the exponential mean

  static Distribution constant(double v) { return {Kind::Constant, v}; }
  static Distribution exponential(double mean) { return {Kind::Exponential, mean}; }

  double sample(RngStream& rng) const;
  double mean() const noexcept { return value; }
};

/// Generator parameters for one user of one application class.
struct TrafficSource {
  TrafficClass cls = TrafficClass::Voice;
  double start_time = 0.0;
  Distribution interval;    // time between emissions
  Distribution unit_bytes;  // application payload per emission
  std::uint32_t header_bytes = kHeaderBytes;
  std::uint32_t mtu_payload = kMtuPayloadBytes;
  NodeId src = kNoNode;
  NodeId dst = kNoNode;

  /// Throws PreconditionError unless interval/unit/mtu are strictly positive.
  void validate() const;
};

struct Emission {
  std::vector<Packet> packets;
  double next_emit = 0.0;
};

/// Monotone packet-id allocator shared by every source of a run.
class PacketIds {
 public:
  std::uint64_t take() noexcept { return next_++; }
  std::uint64_t issued() const noexcept { return next_ - 1; }

 private:
  std::uint64_t next_ = 1;
};

/// Splits `payload` into MTU-sized segments; every segment but the last is
/// exactly `mtu_payload`. A zero payload yields no segments.
std::vector<std::uint32_t> segment_payload(std::uint64_t payload,
                                           std::uint32_t mtu_payload);

/// Bytes per frame for a raw frame geometry, rounded up to whole bytes.
std::uint32_t video_frame_bytes(std::uint32_t width, std::uint32_t height,
                                double bits_per_pixel);

/// Payload bytes for one codec frame (e.g. 64 kb/s * 20 ms = 160 B).
std::uint32_t codec_frame_bytes(double codec_bps, double frame_period);

// One emission per call; `clock` is the emission instant. Each throws
// PreconditionError if the source is of the wrong class.
Emission voice_emit(const TrafficSource& source, double clock, PacketIds& ids);
Emission video_emit(const TrafficSource& source, double clock, PacketIds& ids);
Emission db_emit(const TrafficSource& source, double clock, RngStream& rng,
                 PacketIds& ids);
Emission ftp_emit(const TrafficSource& source, double clock, RngStream& rng,
                  PacketIds& ids);

/// Dispatches on `source.cls`.
Emission emit(const TrafficSource& source, double clock, RngStream& rng,
              PacketIds& ids);

}  // namespace qosim

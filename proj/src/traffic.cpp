#include "qosim/traffic.hpp"

#include <cmath>
#include <string>

#include "qosim/error.hpp"

namespace qosim {
namespace {

void require_class(const TrafficSource& s, TrafficClass expected) {
  if (s.cls != expected) {
    throw PreconditionError(std::string(to_string(expected)) +
                            " emitter called with a " +
                            std::string(to_string(s.cls)) + " source");
  }
}

Packet make_packet(const TrafficSource& s, PacketRole role,
                   std::uint32_t payload, double clock, PacketIds& ids) {
  Packet p;
  p.id = ids.take();
  p.cls = s.cls;
  p.dscp = dscp_for_class(s.cls);
  p.role = role;
  p.payload_bytes = payload;
  p.size_bytes = payload + s.header_bytes;
  p.created_at = clock;
  p.src = s.src;
  p.dst = s.dst;
  return p;
}

Emission segmented(const TrafficSource& s, PacketRole role,
                   std::uint64_t payload, double clock, double next,
                   PacketIds& ids) {
  Emission e;
  e.next_emit = next;
  for (std::uint32_t seg : segment_payload(payload, s.mtu_payload)) {
    e.packets.push_back(make_packet(s, role, seg, clock, ids));
  }
  return e;
}

}  // namespace

double Distribution::sample(RngStream& rng) const {
  switch (kind) {
    case Kind::Constant: return sample_constant(value);
    case Kind::Exponential: return sample_exponential(rng, value);
  }
  return value;
}

void TrafficSource::validate() const {
  if (!(interval.value > 0.0)) {
    throw PreconditionError("emission interval must be > 0");
  }
  if (!(unit_bytes.value > 0.0)) {
    throw PreconditionError("emission unit size must be > 0");
  }
  if (mtu_payload == 0) throw PreconditionError("MTU payload must be > 0");
  if (start_time < 0.0) throw PreconditionError("start time must be >= 0");
}

std::vector<std::uint32_t> segment_payload(std::uint64_t payload,
                                           std::uint32_t mtu_payload) {
  if (mtu_payload == 0) throw PreconditionError("MTU payload must be > 0");
  std::vector<std::uint32_t> out;
  out.reserve(static_cast<std::size_t>(payload / mtu_payload + 1));
  while (payload > 0) {
    const auto seg = static_cast<std::uint32_t>(
        payload < mtu_payload ? payload : mtu_payload);
    out.push_back(seg);
    payload -= seg;
  }
  return out;
}

std::uint32_t video_frame_bytes(std::uint32_t width, std::uint32_t height,
                                double bits_per_pixel) {
  const double bits = static_cast<double>(width) * height * bits_per_pixel;
  return static_cast<std::uint32_t>(std::ceil(bits / 8.0));
}

std::uint32_t codec_frame_bytes(double codec_bps, double frame_period) {
  return static_cast<std::uint32_t>(std::llround(codec_bps * frame_period / 8.0));
}

Emission voice_emit(const TrafficSource& source, double clock, PacketIds& ids) {
  require_class(source, TrafficClass::Voice);
  const auto payload = static_cast<std::uint64_t>(source.unit_bytes.value);
  return segmented(source, PacketRole::Stream, payload, clock,
                   clock + source.interval.value, ids);
}

Emission video_emit(const TrafficSource& source, double clock, PacketIds& ids) {
  require_class(source, TrafficClass::Video);
  const auto payload = static_cast<std::uint64_t>(source.unit_bytes.value);
  return segmented(source, PacketRole::Stream, payload, clock,
                   clock + source.interval.value, ids);
}

Emission db_emit(const TrafficSource& source, double clock, RngStream& rng,
                 PacketIds& ids) {
  require_class(source, TrafficClass::Database);
  const auto payload =
      static_cast<std::uint64_t>(std::ceil(source.unit_bytes.sample(rng)));
  const double gap = source.interval.sample(rng);
  return segmented(source, PacketRole::Request, payload < 1 ? 1 : payload,
                   clock, clock + gap, ids);
}

Emission ftp_emit(const TrafficSource& source, double clock, RngStream& rng,
                  PacketIds& ids) {
  require_class(source, TrafficClass::Ftp);
  // File sizes are drawn continuous and rounded up to whole bytes (>= 1).
  auto file = static_cast<std::uint64_t>(std::ceil(source.unit_bytes.sample(rng)));
  if (file < 1) file = 1;
  const double gap = source.interval.sample(rng);
  return segmented(source, PacketRole::File, file, clock, clock + gap, ids);
}

Emission emit(const TrafficSource& source, double clock, RngStream& rng,
              PacketIds& ids) {
  switch (source.cls) {
    case TrafficClass::Voice: return voice_emit(source, clock, ids);
    case TrafficClass::Video: return video_emit(source, clock, ids);
    case TrafficClass::Database: return db_emit(source, clock, rng, ids);
    case TrafficClass::Ftp: return ftp_emit(source, clock, rng, ids);
  }
  throw PreconditionError("unknown traffic class");
}

}  // namespace qosim

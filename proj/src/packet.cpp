#include "qosim/packet.hpp"

#include "qosim/error.hpp"

namespace qosim {

std::string_view to_string(TrafficClass c) noexcept {
  switch (c) {
    case TrafficClass::Voice: return "voice";
    case TrafficClass::Video: return "video";
    case TrafficClass::Database: return "database";
    case TrafficClass::Ftp: return "ftp";
  }
  return "unknown";
}

TrafficClass parse_traffic_class(std::string_view name) {
  for (TrafficClass c : kAllClasses) {
    if (to_string(c) == name) return c;
  }
  throw PreconditionError("unknown traffic class '" + std::string(name) + "'");
}

Dscp::Dscp(unsigned bits) : bits_(static_cast<std::uint8_t>(bits)) {
  if (bits > 0x3f) {
    throw PreconditionError("DSCP must fit in 6 bits, got " +
                            std::to_string(bits));
  }
}

std::string Dscp::to_binary() const {
  std::string out(6, '0');
  for (int i = 0; i < 6; ++i) {
    if (bits_ & (1u << (5 - i))) out[static_cast<std::size_t>(i)] = '1';
  }
  return out;
}

Dscp dscp_for_class(TrafficClass c) {
  switch (c) {
    case TrafficClass::Voice: return dscp::EF;
    case TrafficClass::Video: return dscp::AF41;
    case TrafficClass::Database: return dscp::AF21;
    case TrafficClass::Ftp: return dscp::DF;
  }
  throw PreconditionError("unknown traffic class");
}

}  // namespace qosim

#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "qosim/packet.hpp"

namespace qt {

inline qosim::Packet packet(std::uint64_t id, qosim::TrafficClass cls,
                            std::uint32_t size) {
  qosim::Packet p;
  p.id = id;
  p.cls = cls;
  p.dscp = qosim::dscp_for_class(cls);
  p.size_bytes = size;
  p.payload_bytes = size > 40 ? size - 40 : 0;
  return p;
}

// Two-pass population variance, kept apart from the library's Welford form.
inline double two_pass_variance(const std::vector<double>& xs) {
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / xs.size();
}

}  // namespace qt

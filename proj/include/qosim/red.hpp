#pragma once

#include <cstdint>
#include <optional>

#include "qosim/rng.hpp"

namespace qosim {

/// Configuration for Random Early Detection; thresholds are fractions of the
/// byte share the queue is allowed to hold.
struct RedParams {
  bool enabled = true;
  double weight = 0.002;
  double max_p = 0.1;
  double min_th_frac = 0.25;
  double max_th_frac = 0.75;
  /// Packet size used to convert idle time into "transmission slots".
  std::uint32_t typical_packet_bytes = 500;
};

/// Per-queue RED state. Thresholds are absolute bytes.
struct RedState {
  double avg_queue = 0.0;
  double weight = 0.002;
  double min_th = 0.0;
  double max_th = 0.0;
  double max_p = 0.1;
  /// Packets accepted since the last drop.
  std::int64_t count = 0;
  std::optional<double> idle_since;

  /// Builds thresholds against `share_bytes`. Throws PreconditionError when the
  /// invariant 0 < min_th < max_th <= share, 0 < max_p <= 1, 0 < w < 1 fails.
  static RedState from_params(const RedParams& params, double share_bytes);
  void validate(double share_bytes) const;
};

/// Updates the EWMA. A non-empty queue moves avg toward `instantaneous_queue`
/// with weight w; an arrival to an idle queue decays avg by (1-w)^m with
/// m = idle time / `slot_seconds`. Returns the new average.
double red_update_avg(RedState& red, double instantaneous_queue, double now,
                      double slot_seconds);

struct RedProbability {
  double base = 0.0;      // p_b
  double adjusted = 0.0;  // p_a, count-corrected
};

/// p_b = max_p (avg-min)/(max-min) and p_a = p_b / (1 - count p_b), clamped
/// to [0, 1]. Zero below min_th, one at or above max_th.
RedProbability red_probability(const RedState& red);

enum class RedVerdict : std::uint8_t { Accept, RandomDrop, ForcedDrop };

/// Drop decision for one arrival; red_update_avg must already have run.
RedVerdict red_drop_decision(RedState& red, RngStream& rng);

}  // namespace qosim

#include "qosim/red.hpp"

#include <cmath>
#include <string>

#include "qosim/error.hpp"

namespace qosim {

RedState RedState::from_params(const RedParams& params, double share_bytes) {
  RedState s;
  s.weight = params.weight;
  s.max_p = params.max_p;
  s.min_th = params.min_th_frac * share_bytes;
  s.max_th = params.max_th_frac * share_bytes;
  s.validate(share_bytes);
  return s;
}

void RedState::validate(double share_bytes) const {
  if (!(min_th > 0.0 && min_th < max_th && max_th <= share_bytes)) {
    throw PreconditionError("RED thresholds must satisfy 0 < min_th < max_th <= share (min_th=" +
                            std::to_string(min_th) + ", max_th=" +
                            std::to_string(max_th) + ", share=" +
                            std::to_string(share_bytes) + ")");
  }
  if (!(max_p > 0.0 && max_p <= 1.0)) {
    throw PreconditionError("RED max_p must be in (0, 1]");
  }
  if (!(weight > 0.0 && weight < 1.0)) {
    throw PreconditionError("RED weight must be in (0, 1)");
  }
}

double red_update_avg(RedState& red, double instantaneous_queue, double now,
                      double slot_seconds) {
  if (instantaneous_queue < 0.0) {
    throw PreconditionError("instantaneous queue must be >= 0");
  }
  if (instantaneous_queue == 0.0 && red.idle_since) {
    const double idle = now - *red.idle_since;
    const double m = slot_seconds > 0.0 ? idle / slot_seconds : 0.0;
    red.avg_queue *= std::pow(1.0 - red.weight, m);
  } else {
    red.avg_queue =
        (1.0 - red.weight) * red.avg_queue + red.weight * instantaneous_queue;
  }
  red.idle_since.reset();
  return red.avg_queue;
}

RedProbability red_probability(const RedState& red) {
  if (red.avg_queue < red.min_th) return {0.0, 0.0};
  if (red.avg_queue >= red.max_th) return {1.0, 1.0};
  const double pb =
      red.max_p * (red.avg_queue - red.min_th) / (red.max_th - red.min_th);
  const double denom = 1.0 - static_cast<double>(red.count) * pb;
  const double pa = denom <= pb ? 1.0 : pb / denom;
  return {pb, pa > 1.0 ? 1.0 : pa};
}

RedVerdict red_drop_decision(RedState& red, RngStream& rng) {
  if (red.avg_queue < red.min_th) {
    red.count = 0;
    return RedVerdict::Accept;
  }
  if (red.avg_queue >= red.max_th) {
    red.count = 0;
    return RedVerdict::ForcedDrop;
  }
  const RedProbability p = red_probability(red);
  if (rng.uniform() < p.adjusted) {
    red.count = 0;
    return RedVerdict::RandomDrop;
  }
  ++red.count;
  return RedVerdict::Accept;
}

}  // namespace qosim

#include "qosim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <tuple>

#include "qosim/error.hpp"

namespace qosim {

std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::QueuingDelay: return "queuing_delay";
    case Metric::QueueDelayVariation: return "queue_delay_variation";
    case Metric::E2eDelay: return "e2e_delay";
    case Metric::PacketDelayVariation: return "packet_delay_variation";
    case Metric::TrafficDropBps: return "traffic_drop_bps";
    case Metric::BufferUsageBytes: return "buffer_usage_bytes";
    case Metric::ThroughputBps: return "throughput_Bps";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  for (Metric m : kAllMetrics) {
    if (to_string(m) == name) return m;
  }
  throw PreconditionError("unknown metric '" + std::string(name) + "'");
}

int csv_decimals(Metric m) noexcept {
  switch (m) {
    case Metric::QueuingDelay:
    case Metric::E2eDelay:
      return 6;  // seconds, microsecond resolution
    case Metric::QueueDelayVariation:
    case Metric::PacketDelayVariation:
      return 12;  // s^2
    case Metric::TrafficDropBps:
    case Metric::BufferUsageBytes:
    case Metric::ThroughputBps:
      return 3;
  }
  return 6;
}

std::optional<double> delay_variation(std::span<const double> delays) {
  if (delays.empty()) return std::nullopt;
  // Welford's update keeps the accumulation stable for long windows.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double x : delays) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  return m2 / static_cast<double>(n);
}

double throughput(std::uint64_t window_bytes, double window) {
  if (!(window > 0.0)) throw PreconditionError("throughput window must be > 0");
  return static_cast<double>(window_bytes) / window;
}

// --- Collector -------------------------------------------------------------

Collector::Collector(MetricsConfig config) : config_(config) {
  if (!(config_.window > 0.0)) throw PreconditionError("metric window must be > 0");
  if (!(config_.tick > 0.0)) throw PreconditionError("buffer tick must be > 0");
  if (!(config_.duration > 0.0)) throw PreconditionError("duration must be > 0");
  const std::size_t n = window_count();
  for (TrafficClass c : kAllClasses) {
    const auto i = index_of(c);
    const std::string name(to_string(c));
    queue_mean_[i] = {Metric::QueuingDelay, name, config_.window, {}};
    queue_var_[i] = {Metric::QueueDelayVariation, name, config_.window, {}};
    e2e_mean_[i] = {Metric::E2eDelay, name, config_.window, {}};
    e2e_var_[i] = {Metric::PacketDelayVariation, name, config_.window, {}};
    buffer_series_[i] = {Metric::BufferUsageBytes, name, config_.tick, {}};
    dropped_bits_[i].assign(n, 0);
    delivered_bytes_[i].assign(n, 0);
  }
  buffer_total_ = {Metric::BufferUsageBytes, std::string(kAggregate),
                   config_.tick, {}};
}

std::size_t Collector::window_count() const noexcept {
  return static_cast<std::size_t>(
      std::ceil(config_.duration / config_.window - 1e-9));
}

std::int64_t Collector::window_of(double t) const noexcept {
  auto k = static_cast<std::int64_t>(std::floor(t / config_.window));
  const auto last = static_cast<std::int64_t>(window_count()) - 1;
  return std::clamp<std::int64_t>(k, 0, last);
}

bool Collector::in_warmup_window(std::int64_t index) const noexcept {
  return static_cast<double>(index) * config_.window < config_.warmup;
}

void Collector::close_window(DelayWindow& w, MetricSeries& mean_series,
                             MetricSeries& var_series) {
  if (w.index < 0 || w.values.empty()) return;
  double sum = 0.0;
  for (double v : w.values) sum += v;
  const double t = static_cast<double>(w.index + 1) * config_.window;
  const bool warm = in_warmup_window(w.index);
  mean_series.samples.push_back({t, sum / static_cast<double>(w.values.size()), warm});
  var_series.samples.push_back({t, *delay_variation(w.values), warm});
  w.values.clear();
}

void Collector::add_delay(std::array<DelayWindow, kNumClasses>& open,
                          std::array<MetricSeries, kNumClasses>& mean_series,
                          std::array<MetricSeries, kNumClasses>& var_series,
                          TrafficClass c, double delay, double now) {
  const auto i = index_of(c);
  const std::int64_t k = window_of(now);
  DelayWindow& w = open[i];
  if (k != w.index) {
    close_window(w, mean_series[i], var_series[i]);
    w.index = k;
  }
  w.values.push_back(delay);
}

void Collector::record_queuing_delay(TrafficClass c, double delay, double now) {
  if (delay < 0.0) {
    throw RuntimeFault("negative queuing delay " + std::to_string(delay) +
                       " at t=" + std::to_string(now));
  }
  add_delay(queue_open_, queue_mean_, queue_var_, c, delay, now);
}

void Collector::record_e2e_delay(TrafficClass c, double delay, double now) {
  if (delay < 0.0) {
    throw RuntimeFault("negative end-to-end delay " + std::to_string(delay) +
                       " at t=" + std::to_string(now));
  }
  add_delay(e2e_open_, e2e_mean_, e2e_var_, c, delay, now);
}

void Collector::record_drop(TrafficClass c, std::uint32_t bytes,
                            DropReason reason, double now) {
  const auto i = index_of(c);
  const auto r = static_cast<std::size_t>(reason);
  dropped_bits_[i][static_cast<std::size_t>(window_of(now))] += 8ULL * bytes;
  ++drop_packets_[i][r];
  drop_bytes_[i][r] += bytes;
}

void Collector::record_delivery(TrafficClass c, std::uint32_t bytes, double now) {
  delivered_bytes_[index_of(c)][static_cast<std::size_t>(window_of(now))] += bytes;
}

void Collector::record_buffer_usage(
    const std::array<std::uint64_t, kNumClasses>& per_class, double now) {
  const double dt = now - last_change_;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    occupancy_integral_[i] += static_cast<double>(occupancy_[i]) * dt;
    occupancy_[i] = per_class[i];
    peak_class_[i] = std::max(peak_class_[i], per_class[i]);
    total += per_class[i];
  }
  last_change_ = now;
  peak_total_ = std::max(peak_total_, total);
}

void Collector::tick_buffer_usage(
    const std::array<std::uint64_t, kNumClasses>& per_class, double now) {
  record_buffer_usage(per_class, now);
  const double span = now - last_tick_;
  const bool warm = last_tick_ < config_.warmup;
  double total = 0.0;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    const double avg = span > 0.0 ? occupancy_integral_[i] / span
                                  : static_cast<double>(per_class[i]);
    buffer_series_[i].samples.push_back({now, avg, warm});
    total += avg;
    occupancy_integral_[i] = 0.0;
  }
  buffer_total_.samples.push_back({now, total, warm});
  last_tick_ = now;
}

std::uint64_t Collector::dropped_packets(TrafficClass c, DropReason r) const noexcept {
  return drop_packets_[index_of(c)][static_cast<std::size_t>(r)];
}

std::uint64_t Collector::dropped_bytes(TrafficClass c, DropReason r) const noexcept {
  return drop_bytes_[index_of(c)][static_cast<std::size_t>(r)];
}

std::vector<MetricSeries> Collector::finalize() {
  if (!finalized_) {
    for (std::size_t i = 0; i < kNumClasses; ++i) {
      close_window(queue_open_[i], queue_mean_[i], queue_var_[i]);
      close_window(e2e_open_[i], e2e_mean_[i], e2e_var_[i]);
    }
    finalized_ = true;
  }

  std::vector<MetricSeries> out;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    out.push_back(queue_mean_[i]);
    out.push_back(queue_var_[i]);
    out.push_back(e2e_mean_[i]);
    out.push_back(e2e_var_[i]);
    out.push_back(buffer_series_[i]);
  }
  out.push_back(buffer_total_);

  const std::size_t n = window_count();
  auto windowed = [&](Metric metric, std::string cls, auto value_of) {
    MetricSeries s{metric, std::move(cls), config_.window, {}};
    s.samples.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      s.samples.push_back({static_cast<double>(k + 1) * config_.window,
                           value_of(k),
                           in_warmup_window(static_cast<std::int64_t>(k))});
    }
    return s;
  };
  for (TrafficClass c : kAllClasses) {
    const auto i = index_of(c);
    out.push_back(windowed(Metric::TrafficDropBps, std::string(to_string(c)),
                           [&](std::size_t k) {
                             return dropped_bits_[i][k] / config_.window;
                           }));
    out.push_back(windowed(Metric::ThroughputBps, std::string(to_string(c)),
                           [&](std::size_t k) {
                             return throughput(delivered_bytes_[i][k], config_.window);
                           }));
  }
  out.push_back(windowed(Metric::TrafficDropBps, std::string(kAggregate),
                         [&](std::size_t k) {
                           std::uint64_t bits = 0;
                           for (const auto& v : dropped_bits_) bits += v[k];
                           return bits / config_.window;
                         }));
  out.push_back(windowed(Metric::ThroughputBps, std::string(kAggregate),
                         [&](std::size_t k) {
                           std::uint64_t bytes = 0;
                           for (const auto& v : delivered_bytes_) bytes += v[k];
                           return throughput(bytes, config_.window);
                         }));
  return out;
}

// --- CSV -------------------------------------------------------------------

std::string format_row(double time, std::string_view cls, Metric metric,
                       double value) {
  char buf[160];
  const std::string c(cls);
  std::snprintf(buf, sizeof buf, "%.6f,%s,%s,%.*f", time, c.c_str(),
                std::string(to_string(metric)).c_str(), csv_decimals(metric),
                value);
  return buf;
}

double quantize(Metric metric, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", csv_decimals(metric), value);
  return std::strtod(buf, nullptr);
}

void export_csv(const std::vector<MetricSeries>& series,
                const std::filesystem::path& path) {
  struct Row {
    std::string_view metric;
    std::string_view cls;
    double time;
    std::string text;
  };
  std::vector<Row> rows;
  for (const MetricSeries& s : series) {
    for (const Sample& p : s.samples) {
      rows.push_back({to_string(s.metric), s.cls, p.time,
                      format_row(p.time, s.cls, s.metric, p.value) +
                          (p.warmup ? ",1" : ",0")});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.metric, a.cls, a.time) < std::tie(b.metric, b.cls, b.time);
  });

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write metrics CSV '" + path.string() + "'");
  out << kCsvHeader << '\n';
  for (const Row& r : rows) out << r.text << '\n';
  if (!out) throw Error("failed writing metrics CSV '" + path.string() + "'");
}

std::vector<SummaryRow> summarize(const std::vector<MetricSeries>& series,
                                  bool quantized) {
  std::vector<SummaryRow> rows;
  for (const MetricSeries& s : series) {
    std::vector<double> v;
    for (const Sample& p : s.samples) {
      if (p.warmup) continue;
      v.push_back(quantized ? quantize(s.metric, p.value) : p.value);
    }
    if (v.empty()) continue;
    SummaryRow r;
    r.cls = s.cls;
    r.metric = s.metric;
    r.points = v.size();
    double sum = 0.0;
    for (double x : v) sum += x;
    r.mean = sum / static_cast<double>(v.size());
    std::sort(v.begin(), v.end());
    r.max = v.back();
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(v.size())));
    r.p95 = v[rank == 0 ? 0 : rank - 1];
    rows.push_back(std::move(r));
  }
  std::sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    return std::tuple(a.cls, to_string(a.metric)) < std::tuple(b.cls, to_string(b.metric));
  });
  return rows;
}

void export_summary(const std::vector<SummaryRow>& rows,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write summary CSV '" + path.string() + "'");
  out << kSummaryHeader << '\n';
  char buf[256];
  for (const SummaryRow& r : rows) {
    // Round-trip precision, so a reader recomputing from metrics.csv can
    // compare exactly.
    std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g\n", r.cls.c_str(),
                  std::string(to_string(r.metric)).c_str(), r.mean, r.max, r.p95);
    out << buf;
  }
  if (!out) throw Error("failed writing summary CSV '" + path.string() + "'");
}

const SummaryRow* find_summary(const std::vector<SummaryRow>& rows,
                               std::string_view cls, Metric metric) {
  for (const SummaryRow& r : rows) {
    if (r.cls == cls && r.metric == metric) return &r;
  }
  return nullptr;
}

}  // namespace qosim

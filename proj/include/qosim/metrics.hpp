#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qosim/packet.hpp"
#include "qosim/qdisc.hpp"

namespace qosim {

enum class Metric : std::uint8_t {
  QueuingDelay,
  QueueDelayVariation,
  E2eDelay,
  PacketDelayVariation,
  TrafficDropBps,
  BufferUsageBytes,
  ThroughputBps,
};

inline constexpr std::array<Metric, 7> kAllMetrics = {
    Metric::QueuingDelay,   Metric::QueueDelayVariation, Metric::E2eDelay,
    Metric::PacketDelayVariation, Metric::TrafficDropBps,
    Metric::BufferUsageBytes,     Metric::ThroughputBps};

std::string_view to_string(Metric m) noexcept;
Metric parse_metric(std::string_view name);
/// Fixed number of decimals used when the metric is written to CSV.
int csv_decimals(Metric m) noexcept;

inline constexpr std::string_view kAggregate = "aggregate";

struct Sample {
  double time = 0.0;
  double value = 0.0;
  bool warmup = false;
};

/// Timestamped samples of one statistic for one class (or "aggregate").
struct MetricSeries {
  Metric metric = Metric::QueuingDelay;
  std::string cls;
  double window = 0.0;
  std::vector<Sample> samples;
};

/// Population variance of the delays in one window; nullopt for an empty
/// window (no output point rather than zero).
std::optional<double> delay_variation(std::span<const double> delays);

/// Bytes per second over a window. Throws PreconditionError if window <= 0.
double throughput(std::uint64_t window_bytes, double window);

struct MetricsConfig {
  double window = 1.0;
  double warmup = 10.0;
  double tick = 0.1;
  double duration = 300.0;
};

/// Collects per-class statistics during one run and turns them into windowed
/// series at the end. Samples must arrive in non-decreasing time order.
class Collector {
 public:
  explicit Collector(MetricsConfig config);

  const MetricsConfig& config() const noexcept { return config_; }

  /// Throws RuntimeFault on a negative delay.
  void record_queuing_delay(TrafficClass c, double delay, double now);
  void record_e2e_delay(TrafficClass c, double delay, double now);
  void record_drop(TrafficClass c, std::uint32_t bytes, DropReason reason,
                   double now);
  /// Bytes delivered to an observed end station.
  void record_delivery(TrafficClass c, std::uint32_t bytes, double now);
  /// Event-level buffer sample (every enqueue/dequeue): the occupancy from
  /// `now` on. Tracks the peak and the time integral.
  void record_buffer_usage(const std::array<std::uint64_t, kNumClasses>& per_class,
                           double now);
  /// Periodic point: time-averaged occupancy since the previous tick.
  void tick_buffer_usage(const std::array<std::uint64_t, kNumClasses>& per_class,
                         double now);

  std::uint64_t peak_buffer_usage() const noexcept { return peak_total_; }
  std::uint64_t peak_buffer_usage(TrafficClass c) const noexcept {
    return peak_class_[index_of(c)];
  }
  std::uint64_t dropped_packets(TrafficClass c, DropReason r) const noexcept;
  std::uint64_t dropped_bytes(TrafficClass c, DropReason r) const noexcept;

  /// Flushes open windows and returns every series.
  std::vector<MetricSeries> finalize();

 private:
  struct DelayWindow {
    std::int64_t index = -1;
    std::vector<double> values;
  };

  std::size_t window_count() const noexcept;
  std::int64_t window_of(double t) const noexcept;
  bool in_warmup_window(std::int64_t index) const noexcept;
  void add_delay(std::array<DelayWindow, kNumClasses>& open,
                 std::array<MetricSeries, kNumClasses>& mean_series,
                 std::array<MetricSeries, kNumClasses>& var_series,
                 TrafficClass c, double delay, double now);
  void close_window(DelayWindow& w, MetricSeries& mean_series,
                    MetricSeries& var_series);

  MetricsConfig config_;

  std::array<DelayWindow, kNumClasses> queue_open_;
  std::array<DelayWindow, kNumClasses> e2e_open_;
  std::array<MetricSeries, kNumClasses> queue_mean_;
  std::array<MetricSeries, kNumClasses> queue_var_;
  std::array<MetricSeries, kNumClasses> e2e_mean_;
  std::array<MetricSeries, kNumClasses> e2e_var_;

  // Dense per-window accumulators, indexed [class][window].
  std::array<std::vector<std::uint64_t>, kNumClasses> dropped_bits_;
  std::array<std::vector<std::uint64_t>, kNumClasses> delivered_bytes_;
  std::array<std::array<std::uint64_t, 2>, kNumClasses> drop_packets_{};
  std::array<std::array<std::uint64_t, 2>, kNumClasses> drop_bytes_{};

  std::array<MetricSeries, kNumClasses> buffer_series_;
  MetricSeries buffer_total_;
  std::array<std::uint64_t, kNumClasses> peak_class_{};
  std::array<std::uint64_t, kNumClasses> occupancy_{};
  std::array<double, kNumClasses> occupancy_integral_{};
  double last_change_ = 0.0;
  double last_tick_ = 0.0;
  std::uint64_t peak_total_ = 0;
  bool finalized_ = false;
};

/// One `time_s,class,metric,value` row with fixed decimals.
std::string format_row(double time, std::string_view cls, Metric metric,
                       double value);

/// Value as written to CSV, parsed back (what CSV readers will see).
double quantize(Metric metric, double value);

inline constexpr std::string_view kCsvHeader = "time_s,class,metric,value,warmup";

/// Writes all series to one CSV sorted by (metric, class, time). The trailing
/// `warmup` column is 1 for points inside the warm-up interval. Throws Error
/// naming the path if it cannot be written.
void export_csv(const std::vector<MetricSeries>& series,
                const std::filesystem::path& path);

struct SummaryRow {
  std::string cls;
  Metric metric = Metric::QueuingDelay;
  double mean = 0.0;
  double max = 0.0;
  double p95 = 0.0;
  std::size_t points = 0;
};

/// mean / max / nearest-rank p95 over post-warm-up points of each series;
/// series with no such points are omitted. With `quantized`, values are
/// taken as they appear in the CSV so a reader can recompute the summary.
std::vector<SummaryRow> summarize(const std::vector<MetricSeries>& series,
                                  bool quantized);

inline constexpr std::string_view kSummaryHeader = "class,metric,mean,max,p95";

void export_summary(const std::vector<SummaryRow>& rows,
                    const std::filesystem::path& path);

const SummaryRow* find_summary(const std::vector<SummaryRow>& rows,
                               std::string_view cls, Metric metric);

}  // namespace qosim

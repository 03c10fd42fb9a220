#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "qosim/error.hpp"
#include "qosim/metrics.hpp"
#include "qosim/rng.hpp"
#include "support.hpp"

using namespace qosim;
namespace fs = std::filesystem;

namespace {

const MetricSeries* find(const std::vector<MetricSeries>& all, Metric m, std::string_view cls) {
  for (const auto& s : all) {
    if (s.metric == m && s.cls == cls) return &s;
  }
  return nullptr;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "qosim-unit";
  fs::create_directories(d);
  return d / name;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("variance of constant delays is zero") {
  const std::vector<double> d{2e-3, 2e-3, 2e-3};
  CHECK(*delay_variation(d) == 0.0);
}

TEST_CASE("two-point variance") {
  const std::vector<double> d{1e-3, 3e-3};
  CHECK(*delay_variation(d) == doctest::Approx(1e-6).epsilon(1e-12));
}

TEST_CASE("empty window yields no point") {
  CHECK_FALSE(delay_variation(std::vector<double>{}).has_value());
}

TEST_CASE("variance matches two-pass oracle to 1e-12") {
  RngStream rng("delays", 2);
  std::vector<double> d;
  for (int i = 0; i < 1000; ++i) d.push_back(sample_exponential(rng, 1e-3) + 5e-3);
  CHECK(std::abs(*delay_variation(d) - qt::two_pass_variance(d)) < 1e-12);
  CHECK(*delay_variation(d) >= 0.0);
}

TEST_CASE("throughput definition") {
  CHECK(throughput(10000, 1.0) == 10000.0);
  CHECK(throughput(0, 1.0) == 0.0);
  CHECK(throughput(5000, 0.5) == 10000.0);
  CHECK_THROWS_AS(throughput(1, 0.0), PreconditionError);
}

TEST_CASE("windowed delay mean and variance, warm-up flags") {
  Collector c({1.0, 2.0, 0.1, 5.0});
  c.record_queuing_delay(TrafficClass::Voice, 1e-3, 0.2);
  c.record_queuing_delay(TrafficClass::Voice, 3e-3, 0.7);
  c.record_queuing_delay(TrafficClass::Voice, 4e-3, 2.5);
  c.record_queuing_delay(TrafficClass::Voice, 4e-3, 5.0);  // clamped into the last window
  const auto all = c.finalize();
  const auto* mean = find(all, Metric::QueuingDelay, "voice");
  const auto* var = find(all, Metric::QueueDelayVariation, "voice");
  REQUIRE(mean);
  REQUIRE(var);
  REQUIRE(mean->samples.size() == 3);
  CHECK(mean->samples[0].time == 1.0);
  CHECK(mean->samples[0].value == doctest::Approx(2e-3));
  CHECK(mean->samples[0].warmup);
  CHECK(var->samples[0].value == doctest::Approx(1e-6));
  CHECK(mean->samples[1].time == 3.0);
  CHECK_FALSE(mean->samples[1].warmup);
  CHECK(var->samples[1].value == 0.0);
  CHECK(mean->samples[2].time == 5.0);
  CHECK(find(all, Metric::QueuingDelay, "video")->samples.empty());
}

TEST_CASE("negative delay is a runtime fault") {
  Collector c({});
  CHECK_THROWS_AS(c.record_queuing_delay(TrafficClass::Video, -1e-9, 1.0), RuntimeFault);
  CHECK_THROWS_AS(c.record_e2e_delay(TrafficClass::Video, -1e-9, 1.0), RuntimeFault);
}

TEST_CASE("no drops: all-zero drop series and zero counters") {
  Collector c({1.0, 0.0, 0.1, 10.0});
  const auto all = c.finalize();
  const auto* d = find(all, Metric::TrafficDropBps, "video");
  REQUIRE(d);
  CHECK(d->samples.size() == 10);
  for (const auto& s : d->samples) CHECK(s.value == 0.0);
  CHECK(c.dropped_packets(TrafficClass::Video, DropReason::BufferOverflow) == 0);
}

TEST_CASE("drop series in bits per second, cumulative per reason") {
  Collector c({1.0, 0.0, 0.1, 3.0});
  c.record_drop(TrafficClass::Video, 1500, DropReason::BufferOverflow, 1.2);
  c.record_drop(TrafficClass::Video, 1500, DropReason::BufferOverflow, 1.9);
  c.record_drop(TrafficClass::Video, 500, DropReason::RedEarly, 2.1);
  const auto all = c.finalize();
  const auto* d = find(all, Metric::TrafficDropBps, "video");
  CHECK(d->samples[0].value == 0.0);
  CHECK(d->samples[1].value == 24000.0);
  CHECK(d->samples[2].value == 4000.0);
  CHECK(find(all, Metric::TrafficDropBps, kAggregate)->samples[1].value == 24000.0);
  CHECK(c.dropped_packets(TrafficClass::Video, DropReason::BufferOverflow) == 2);
  CHECK(c.dropped_bytes(TrafficClass::Video, DropReason::BufferOverflow) == 3000);
  CHECK(c.dropped_packets(TrafficClass::Video, DropReason::RedEarly) == 1);
}

TEST_CASE("voice receiver throughput over 10 s is 10000 B/s") {
  Collector c({1.0, 0.0, 0.1, 10.0});
  for (int k = 0; k < 500; ++k) c.record_delivery(TrafficClass::Voice, 200, k * 0.02 + 0.001);
  const auto all = c.finalize();
  const auto* t = find(all, Metric::ThroughputBps, "voice");
  REQUIRE(t->samples.size() == 10);
  for (const auto& s : t->samples) CHECK(s.value == 10000.0);
}

TEST_CASE("buffer ticks carry the time-averaged occupancy") {
  Collector c({1.0, 0.0, 0.1, 1.0});
  std::array<std::uint64_t, kNumClasses> occ{};
  occ[1] = 3000;
  c.record_buffer_usage(occ, 0.0);
  occ[1] = 0;
  c.record_buffer_usage(occ, 0.025);
  c.tick_buffer_usage(occ, 0.1);
  c.tick_buffer_usage(occ, 0.2);
  CHECK(c.peak_buffer_usage() == 3000);
  CHECK(c.peak_buffer_usage(TrafficClass::Video) == 3000);
  const auto all = c.finalize();
  const auto* b = find(all, Metric::BufferUsageBytes, "video");
  REQUIRE(b->samples.size() == 2);
  CHECK(b->samples[0].value == doctest::Approx(3000.0 * 0.025 / 0.1));
  CHECK(b->samples[1].value == 0.0);
  CHECK(find(all, Metric::BufferUsageBytes, kAggregate)->samples[0].value ==
        doctest::Approx(750.0));
}

TEST_CASE("row formatting") {
  CHECK(format_row(1.5, "voice", Metric::QueuingDelay, 0.0002) ==
        "1.500000,voice,queuing_delay,0.000200");
  CHECK(quantize(Metric::QueuingDelay, 0.00012345678) == 0.000123);
  CHECK(quantize(Metric::ThroughputBps, 12.34567) == doctest::Approx(12.346));
}

TEST_CASE("empty series export is header only") {
  const auto p = scratch("empty.csv");
  export_csv({}, p);
  CHECK(slurp(p) == std::string(kCsvHeader) + "\n");
}

TEST_CASE("export sorts by metric, class, time and flags warm-up") {
  MetricSeries a{Metric::QueuingDelay, "video", 1.0, {{2.0, 0.001, false}, {1.0, 0.002, true}}};
  MetricSeries b{Metric::E2eDelay, "voice", 1.0, {{1.0, 0.01, true}}};
  MetricSeries c{Metric::QueuingDelay, "database", 1.0, {{3.0, 0.0, false}}};
  const auto p = scratch("sorted.csv");
  export_csv({a, b, c}, p);
  CHECK(slurp(p) ==
        "time_s,class,metric,value,warmup\n"
        "1.000000,voice,e2e_delay,0.010000,1\n"
        "3.000000,database,queuing_delay,0.000000,0\n"
        "1.000000,video,queuing_delay,0.002000,1\n"
        "2.000000,video,queuing_delay,0.001000,0\n");
}

TEST_CASE("unwritable path is named in the error") {
  const fs::path bad = "/nonexistent-dir/x/metrics.csv";
  try {
    export_csv({}, bad);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(bad.string()) != std::string::npos);
  }
}

TEST_CASE("summary recomputed from the CSV matches exactly") {
  RngStream rng("s", 4);
  Collector col({1.0, 5.0, 0.1, 40.0});
  std::array<std::uint64_t, kNumClasses> occ{};
  for (int i = 0; i < 4000; ++i) {
    const double t = i * 0.01;
    const auto cls = kAllClasses[i % 4];
    col.record_queuing_delay(cls, sample_exponential(rng, 1e-3), t);
    col.record_e2e_delay(cls, sample_exponential(rng, 5e-3), t);
    col.record_delivery(cls, 200 + i % 977, t);
    occ[i % 4] = rng.next_u64() % 5000;
    col.record_buffer_usage(occ, t);
    if (i % 10 == 0 && t > 0.0) col.tick_buffer_usage(occ, t);
  }
  const auto series = col.finalize();
  const auto p = scratch("recompute.csv");
  export_csv(series, p);
  const auto sp = scratch("recompute-summary.csv");
  const auto rows = summarize(series, true);
  export_summary(rows, sp);

  // Independent recomputation from CSV text.
  std::map<std::pair<std::string, std::string>, std::vector<double>> pts;
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto f = split(line);
    REQUIRE(f.size() == 5);
    if (f[4] == "1") continue;
    pts[{f[1], f[2]}].push_back(std::strtod(f[3].c_str(), nullptr));
  }
  std::ifstream sin(sp);
  std::getline(sin, line);
  CHECK(line == kSummaryHeader);
  std::size_t n = 0;
  while (std::getline(sin, line)) {
    const auto f = split(line);
    auto v = pts.at({f[0], f[1]});
    double sum = 0.0;
    for (double x : v) sum += x;
    std::sort(v.begin(), v.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * v.size()));
    CHECK(std::strtod(f[2].c_str(), nullptr) == sum / v.size());
    CHECK(std::strtod(f[3].c_str(), nullptr) == v.back());
    CHECK(std::strtod(f[4].c_str(), nullptr) == v[rank - 1]);
    ++n;
  }
  CHECK(n == pts.size());
  CHECK(n == rows.size());
}

TEST_CASE("metric names round-trip") {
  for (Metric m : kAllMetrics) CHECK(parse_metric(to_string(m)) == m);
  CHECK_THROWS_AS(parse_metric("latency"), PreconditionError);
}

}

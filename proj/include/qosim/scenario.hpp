#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qosim/metrics.hpp"
#include "qosim/network.hpp"
#include "qosim/qdisc.hpp"
#include "qosim/topology.hpp"

namespace qosim {

struct VoiceSpec {
  std::uint32_t users = 1;
  double codec_bps = 64000.0;
  double frame_period = 0.020;
  std::uint32_t header_bytes = kHeaderBytes;
  double start = 0.0;
  /// Offset each user's first packet by U[0, period) from its own stream.
  bool random_phase = true;
};

struct VideoSpec {
  std::uint32_t users = 1;
  std::uint32_t width = 128;
  std::uint32_t height = 120;
  double bits_per_pixel = 9.0;
  double frame_interval = 0.1;
  std::uint32_t header_bytes = kHeaderBytes;
  std::uint32_t mtu_payload = kMtuPayloadBytes;
  double start = 0.0;
  bool random_phase = true;
};

/// Database or FTP population on the data-users LAN.
struct DataSpec {
  std::uint32_t users = 10;
  Distribution unit;      // payload (transaction or file) bytes
  Distribution interval;  // seconds between requests
  std::uint32_t header_bytes = kHeaderBytes;
  std::uint32_t mtu_payload = kMtuPayloadBytes;
  double start = 0.0;
};

struct ServerSpec {
  std::string node = "data-server";
  double service_rate_bps = 1e6;
  std::uint32_t reply_bytes = 500;
};

struct VpnSpec {
  bool enabled = false;
  std::uint32_t overhead_bytes = 60;
  /// Database request load offered by each remote user.
  std::vector<std::string> remote_users{"r-user1", "r-user2"};
  Distribution remote_unit = Distribution::constant(200.0);
  Distribution remote_interval = Distribution::exponential(0.003);
};

struct NodeDecl {
  std::string name;
  NodeKind kind = NodeKind::Host;
  double processing = 0.0;
  bool remote = false;
};

struct LinkDecl {
  std::string id;
  std::string a;
  std::string b;
  double rate_bps = 0.0;
  double propagation = 0.0;
};

struct GrantDecl {
  std::string user;
  std::string server;
  TrafficClass app = TrafficClass::Database;
};

/// Runs one member per value of `key`, each written under its label.
struct SweepSpec {
  std::string key;
  std::vector<std::string> values;
  std::vector<std::string> labels;
  bool active() const noexcept { return !key.empty(); }
};

/// A complete experiment description.
struct Scenario {
  std::string name = "custom";
  std::string preset;
  std::uint64_t seed = 1;
  double duration = 300.0;
  double warmup = 10.0;

  std::string topology = "enterprise";  // enterprise | enterprise-vpn | custom
  TopologyParams topo;
  std::vector<NodeDecl> nodes;  // custom topology only
  std::vector<LinkDecl> links;
  std::string tunnel_entry;
  std::string tunnel_exit;
  std::vector<GrantDecl> grants;

  InterfaceConfig qos;
  std::string monitor = "ho-router>bo-router";

  VoiceSpec voice;
  VideoSpec video;
  DataSpec database{10, Distribution::constant(200.0), Distribution::exponential(30.0)};
  DataSpec ftp{10, Distribution::exponential(1000.0), Distribution::exponential(3600.0)};
  ServerSpec server;
  VpnSpec vpn;

  double window = 1.0;
  double tick = 0.1;

  SweepSpec sweep;
};

/// Built-in experiment names, in listing order.
const std::vector<std::string>& preset_names();
std::string preset_description(std::string_view name);

/// Parses the `key = value` / `[section]` format, layering documented
/// defaults, then the named `preset`, then the file's keys, then `overrides`
/// ("key=value"; a bare key resolves to the unique section key it names).
/// Throws ConfigError carrying the line number (0 for overrides) and key path.
Scenario load_scenario(std::string_view text,
                       const std::vector<std::string>& overrides = {});
Scenario load_scenario_file(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides = {});
/// Equivalent to a file holding only `preset = <name>`.
Scenario preset_scenario(std::string_view name,
                         const std::vector<std::string>& overrides = {});

/// Every key with its resolved value; load_scenario() of the text reproduces
/// the scenario.
std::string dump_scenario(const Scenario& s);

/// Throws ConfigError on a constraint violation.
void validate(const Scenario& s);

/// Topology, sources and QoS for one run (sweep ignored).
NetworkConfig build_network(const Scenario& s);

struct SweepMember {
  std::string label;  // empty for a single run
  Scenario scenario;
};
/// One member per sweep value, or the scenario itself.
std::vector<SweepMember> expand(const Scenario& s);

struct RunOutput {
  std::string label;
  Scenario scenario;
  RunResult result;
  std::vector<SummaryRow> summary;            // full precision
  std::vector<SummaryRow> summary_quantized;  // as written to summary.csv
};

/// Runs a scenario with no sweep.
RunOutput run_scenario(const Scenario& s);

/// Writes metrics.csv, summary.csv, counters.csv and resolved.ini into `dir`.
void write_run(const RunOutput& run, const std::filesystem::path& dir);

/// Expands and runs every member (in parallel threads when `parallel`). With a
/// non-empty `out`, results go to out/<name>/ or out/<name>/<label>/.
std::vector<RunOutput> run_all(const Scenario& s, const std::filesystem::path& out,
                               bool parallel = true);

}  // namespace qosim

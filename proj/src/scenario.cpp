#include "qosim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "qosim/error.hpp"

namespace qosim {
namespace {

using LineMap = std::map<std::string, int, std::less<>>;

// --- value codecs ----------------------------------------------------------

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string join(const std::vector<std::string>& v, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

double parse_double(std::string_view v) {
  const std::string t = trim(v);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw PreconditionError("expected a number, got '" + t + "'");
  }
  return x;
}

std::uint64_t parse_u64(std::string_view v) {
  const std::string t = trim(v);
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw PreconditionError("expected a non-negative integer, got '" + t + "'");
  }
  return x;
}

std::uint32_t parse_u32(std::string_view v) {
  const std::uint64_t x = parse_u64(v);
  if (x > 0xffffffffULL) throw PreconditionError("value out of range");
  return static_cast<std::uint32_t>(x);
}

bool parse_bool(std::string_view v) {
  const std::string t = trim(v);
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw PreconditionError("expected true or false, got '" + t + "'");
}

/// "10240", "10KB" (x1024) or "unlimited".
std::uint64_t parse_bytes(std::string_view v) {
  std::string t = trim(v);
  if (t == "unlimited") return kUnlimitedBuffer;
  if (t.size() > 2 && (t.ends_with("KB") || t.ends_with("kB"))) {
    return parse_u64(t.substr(0, t.size() - 2)) * 1024;
  }
  return parse_u64(t);
}

std::string fmt_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string fmt_bytes(std::uint64_t b) {
  return b == kUnlimitedBuffer ? "unlimited" : std::to_string(b);
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

/// "constant 200" or "exponential 30".
Distribution parse_distribution(std::string_view v) {
  const auto w = words(v);
  if (w.size() != 2) {
    throw PreconditionError("expected '<constant|exponential> <value>', got '" +
                            trim(v) + "'");
  }
  const double x = parse_double(w[1]);
  if (w[0] == "constant") return Distribution::constant(x);
  if (w[0] == "exponential") return Distribution::exponential(x);
  throw PreconditionError("unknown distribution '" + w[0] + "'");
}

std::string fmt_distribution(const Distribution& d) {
  return std::string(d.kind == Distribution::Kind::Constant ? "constant "
                                                           : "exponential ") +
         fmt_double(d.value);
}

// --- field registry ----------------------------------------------------------

struct Field {
  std::string path;
  std::function<void(Scenario&, std::string_view)> set;
  std::function<std::string(const Scenario&)> get;
};

template <class T>
using Acc = T& (*)(Scenario&);

template <class T, class Parse, class Format>
Field make_field(std::string path, Acc<T> acc, Parse parse, Format format) {
  return {std::move(path),
          [acc, parse](Scenario& s, std::string_view v) { acc(s) = parse(v); },
          [acc, format](const Scenario& s) {
            return format(acc(const_cast<Scenario&>(s)));
          }};
}

Field f_double(std::string p, Acc<double> a) {
  return make_field<double>(std::move(p), a, parse_double, fmt_double);
}
Field f_u32(std::string p, Acc<std::uint32_t> a) {
  return make_field<std::uint32_t>(std::move(p), a, parse_u32,
                                   [](std::uint32_t x) { return std::to_string(x); });
}
Field f_u64(std::string p, Acc<std::uint64_t> a) {
  return make_field<std::uint64_t>(std::move(p), a, parse_u64,
                                   [](std::uint64_t x) { return std::to_string(x); });
}
Field f_bool(std::string p, Acc<bool> a) {
  return make_field<bool>(std::move(p), a, parse_bool, fmt_bool);
}
Field f_string(std::string p, Acc<std::string> a) {
  return make_field<std::string>(std::move(p), a, trim,
                                 [](const std::string& x) { return x; });
}
Field f_dist(std::string p, Acc<Distribution> a) {
  return make_field<Distribution>(std::move(p), a, parse_distribution, fmt_distribution);
}
Field f_list(std::string p, Acc<std::vector<std::string>> a) {
  return make_field<std::vector<std::string>>(
      std::move(p), a, [](std::string_view v) { return split(v, ','); },
      [](const std::vector<std::string>& v) { return join(v, ","); });
}

#define ACC(T, member) +[](Scenario& s) -> T& { return s.member; }

std::vector<Field> build_fields() {
  std::vector<Field> f;
  f.push_back(f_string("name", ACC(std::string, name)));
  f.push_back(f_string("preset", ACC(std::string, preset)));
  f.push_back(f_u64("seed", ACC(std::uint64_t, seed)));
  f.push_back(f_double("duration", ACC(double, duration)));
  f.push_back(f_double("warmup", ACC(double, warmup)));

  f.push_back(f_string("topology.preset", ACC(std::string, topology)));
  f.push_back(f_double("topology.bottleneck_bps", ACC(double, topo.bottleneck_bps)));
  f.push_back(f_double("topology.bottleneck_propagation", ACC(double, topo.bottleneck_propagation)));
  f.push_back(f_double("topology.access_bps", ACC(double, topo.access_bps)));
  f.push_back(f_double("topology.lan_bps", ACC(double, topo.lan_bps)));
  f.push_back(f_double("topology.server_bps", ACC(double, topo.server_bps)));
  f.push_back(f_double("topology.lan_propagation", ACC(double, topo.lan_propagation)));
  f.push_back(f_double("topology.internet_bps", ACC(double, topo.internet_bps)));
  f.push_back(f_double("topology.internet_propagation", ACC(double, topo.internet_propagation)));
  f.push_back(f_double("topology.cloud_propagation", ACC(double, topo.cloud_propagation)));
  f.push_back(f_double("topology.cloud_processing", ACC(double, topo.cloud_processing)));
  f.push_back(f_double("topology.firewall_processing", ACC(double, topo.firewall_processing)));

  f.push_back(f_string("tunnel.entry", ACC(std::string, tunnel_entry)));
  f.push_back(f_string("tunnel.exit", ACC(std::string, tunnel_exit)));
  f.push_back({"tunnel.grants",
               [](Scenario& s, std::string_view v) {
                 s.grants.clear();
                 for (const std::string& g : split(v, ',')) {
                   const auto w = split(g, ':');
                   if (w.size() != 3) {
                     throw PreconditionError("grant must be user:server:class, got '" + g + "'");
                   }
                   s.grants.push_back({w[0], w[1], parse_traffic_class(w[2])});
                 }
               },
               [](const Scenario& s) {
                 std::vector<std::string> out;
                 for (const GrantDecl& g : s.grants) {
                   out.push_back(g.user + ":" + g.server + ":" + std::string(to_string(g.app)));
                 }
                 return join(out, ",");
               }});

  f.push_back({"qos.discipline",
               [](Scenario& s, std::string_view v) { s.qos.discipline = parse_discipline(trim(v)); },
               [](const Scenario& s) { return std::string(to_string(s.qos.discipline)); }});
  f.push_back({"qos.weights",
               [](Scenario& s, std::string_view v) {
                 const auto w = split(v, ',');
                 if (w.size() != kNumClasses) {
                   throw PreconditionError("weights need 4 values (voice,video,database,ftp)");
                 }
                 for (std::size_t i = 0; i < kNumClasses; ++i) s.qos.weights[i] = parse_u32(w[i]);
               },
               [](const Scenario& s) {
                 std::vector<std::string> out;
                 for (auto w : s.qos.weights) out.push_back(std::to_string(w));
                 return join(out, ",");
               }});
  f.push_back(f_u32("qos.quantum_per_weight", ACC(std::uint32_t, qos.quantum_per_weight)));
  f.push_back(make_field<std::uint64_t>("qos.buffer_limit", ACC(std::uint64_t, qos.buffer_limit),
                                        parse_bytes, fmt_bytes));
  f.push_back({"qos.buffer_scope",
               [](Scenario& s, std::string_view v) { s.qos.buffer_scope = parse_buffer_scope(trim(v)); },
               [](const Scenario& s) { return std::string(to_string(s.qos.buffer_scope)); }});
  f.push_back(f_string("qos.monitor", ACC(std::string, monitor)));

  f.push_back(f_bool("red.enabled", ACC(bool, qos.red.enabled)));
  f.push_back(f_double("red.weight", ACC(double, qos.red.weight)));
  f.push_back(f_double("red.max_p", ACC(double, qos.red.max_p)));
  f.push_back(f_double("red.min_th_frac", ACC(double, qos.red.min_th_frac)));
  f.push_back(f_double("red.max_th_frac", ACC(double, qos.red.max_th_frac)));
  f.push_back(f_u32("red.typical_packet_bytes", ACC(std::uint32_t, qos.red.typical_packet_bytes)));

  f.push_back(f_u32("voice.users", ACC(std::uint32_t, voice.users)));
  f.push_back(f_double("voice.codec_bps", ACC(double, voice.codec_bps)));
  f.push_back(f_double("voice.frame_period", ACC(double, voice.frame_period)));
  f.push_back(f_u32("voice.header_bytes", ACC(std::uint32_t, voice.header_bytes)));
  f.push_back(f_double("voice.start", ACC(double, voice.start)));
  f.push_back(f_bool("voice.random_phase", ACC(bool, voice.random_phase)));

  f.push_back(f_u32("video.users", ACC(std::uint32_t, video.users)));
  f.push_back(f_u32("video.width", ACC(std::uint32_t, video.width)));
  f.push_back(f_u32("video.height", ACC(std::uint32_t, video.height)));
  f.push_back(f_double("video.bits_per_pixel", ACC(double, video.bits_per_pixel)));
  f.push_back(f_double("video.frame_interval", ACC(double, video.frame_interval)));
  f.push_back(f_u32("video.header_bytes", ACC(std::uint32_t, video.header_bytes)));
  f.push_back(f_u32("video.mtu_payload", ACC(std::uint32_t, video.mtu_payload)));
  f.push_back(f_double("video.start", ACC(double, video.start)));
  f.push_back(f_bool("video.random_phase", ACC(bool, video.random_phase)));

  f.push_back(f_u32("database.users", ACC(std::uint32_t, database.users)));
  f.push_back(f_dist("database.unit", ACC(Distribution, database.unit)));
  f.push_back(f_dist("database.interval", ACC(Distribution, database.interval)));
  f.push_back(f_u32("database.header_bytes", ACC(std::uint32_t, database.header_bytes)));
  f.push_back(f_u32("database.mtu_payload", ACC(std::uint32_t, database.mtu_payload)));
  f.push_back(f_double("database.start", ACC(double, database.start)));

  f.push_back(f_u32("ftp.users", ACC(std::uint32_t, ftp.users)));
  f.push_back(f_dist("ftp.unit", ACC(Distribution, ftp.unit)));
  f.push_back(f_dist("ftp.interval", ACC(Distribution, ftp.interval)));
  f.push_back(f_u32("ftp.header_bytes", ACC(std::uint32_t, ftp.header_bytes)));
  f.push_back(f_u32("ftp.mtu_payload", ACC(std::uint32_t, ftp.mtu_payload)));
  f.push_back(f_double("ftp.start", ACC(double, ftp.start)));

  f.push_back(f_string("server.node", ACC(std::string, server.node)));
  f.push_back(f_double("server.service_rate_bps", ACC(double, server.service_rate_bps)));
  f.push_back(f_u32("server.reply_bytes", ACC(std::uint32_t, server.reply_bytes)));

  f.push_back(f_bool("vpn.enabled", ACC(bool, vpn.enabled)));
  f.push_back(f_u32("vpn.overhead_bytes", ACC(std::uint32_t, vpn.overhead_bytes)));
  f.push_back(f_list("vpn.remote_users", ACC(std::vector<std::string>, vpn.remote_users)));
  f.push_back(f_dist("vpn.remote_unit", ACC(Distribution, vpn.remote_unit)));
  f.push_back(f_dist("vpn.remote_interval", ACC(Distribution, vpn.remote_interval)));

  f.push_back(f_double("metrics.window", ACC(double, window)));
  f.push_back(f_double("metrics.tick", ACC(double, tick)));

  f.push_back(f_string("sweep.key", ACC(std::string, sweep.key)));
  f.push_back(f_list("sweep.values", ACC(std::vector<std::string>, sweep.values)));
  f.push_back(f_list("sweep.labels", ACC(std::vector<std::string>, sweep.labels)));
  return f;
}

#undef ACC

const std::vector<Field>& fields() {
  static const std::vector<Field> f = build_fields();
  return f;
}

const Field* find_field(std::string_view path) {
  for (const Field& f : fields()) {
    if (f.path == path) return &f;
  }
  return nullptr;
}

// Dynamic sections for custom topologies.
void set_node(Scenario& s, const std::string& name, std::string_view v) {
  const auto w = words(v);
  if (w.empty() || w.size() > 3) {
    throw PreconditionError("expected '<kind> [processing_s] [remote]'");
  }
  NodeDecl d{name, parse_node_kind(w[0]), 0.0, false};
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w[i] == "remote") {
      d.remote = true;
    } else {
      d.processing = parse_double(w[i]);
    }
  }
  auto it = std::find_if(s.nodes.begin(), s.nodes.end(),
                         [&](const NodeDecl& n) { return n.name == name; });
  if (it == s.nodes.end()) {
    s.nodes.push_back(d);
  } else {
    *it = d;
  }
}

void set_link(Scenario& s, const std::string& id, std::string_view v) {
  const auto w = words(v);
  if (w.size() != 4) throw PreconditionError("expected '<a> <b> <rate_bps> <propagation_s>'");
  LinkDecl d{id, w[0], w[1], parse_double(w[2]), parse_double(w[3])};
  auto it = std::find_if(s.links.begin(), s.links.end(),
                         [&](const LinkDecl& l) { return l.id == id; });
  if (it == s.links.end()) {
    s.links.push_back(d);
  } else {
    *it = d;
  }
}

/// Applies `path = value`; returns false for an unknown path.
bool assign(Scenario& s, const std::string& path, std::string_view value) {
  if (path.starts_with("nodes.") && path.size() > 6) {
    set_node(s, path.substr(6), value);
    return true;
  }
  if (path.starts_with("links.") && path.size() > 6) {
    set_link(s, path.substr(6), value);
    return true;
  }
  const Field* f = find_field(path);
  if (!f) return false;
  f->set(s, value);
  return true;
}

// --- presets -----------------------------------------------------------------

struct PresetDef {
  std::string name;
  std::string description;
  std::function<void(Scenario&)> apply;
};

const std::vector<PresetDef>& preset_table() {
  static const std::vector<PresetDef> table = {
      {"pq-baseline", "head and branch office, strict priority queuing",
       [](Scenario& s) { s.qos.discipline = Discipline::Pq; }},
      {"wfq-baseline", "head and branch office, weighted fair queuing (DWRR)",
       [](Scenario& s) { s.qos.discipline = Discipline::Wfq; }},
      {"buffer-sweep", "WFQ with buffer_limit 1, 3, 5, 9 and 10 KB",
       [](Scenario& s) {
         s.qos.discipline = Discipline::Wfq;
         s.sweep.key = "qos.buffer_limit";
         s.sweep.values = {"1KB", "3KB", "5KB", "9KB", "10KB"};
         s.sweep.labels = {"buffer-1KB", "buffer-3KB", "buffer-5KB", "buffer-9KB",
                           "buffer-10KB"};
       }},
      {"vpn-compare", "branch office over VPN, remote database access off then on",
       [](Scenario& s) {
         s.qos.discipline = Discipline::Wfq;
         s.topology = "enterprise-vpn";
         s.sweep.key = "vpn.enabled";
         s.sweep.values = {"false", "true"};
         s.sweep.labels = {"vpn-off", "vpn-on"};
       }},
  };
  return table;
}

void apply_preset(Scenario& s, const std::string& name, int line) {
  for (const PresetDef& p : preset_table()) {
    if (p.name == name) {
      p.apply(s);
      s.preset = name;
      s.name = name;
      return;
    }
  }
  throw ConfigError("unknown preset '" + name + "' (available: " +
                        join(preset_names(), ", ") + ")",
                    line, "preset");
}

// --- parsing -----------------------------------------------------------------

struct Entry {
  int line = 0;
  std::string path;
  std::string value;
};

std::vector<Entry> parse_text(std::string_view text) {
  std::vector<Entry> out;
  std::map<std::string, int> seen;
  std::string section;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError("malformed section header '" + line + "'", line_no, "");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value'", line_no, "");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty() ||
        key.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-") !=
            std::string::npos) {
      throw ConfigError("invalid key '" + key + "'", line_no, key);
    }
    const std::string path = section.empty() ? key : section + "." + key;
    if (auto [it, fresh] = seen.emplace(path, line_no); !fresh) {
      throw ConfigError("duplicate key (first set on line " + std::to_string(it->second) + ")",
                        line_no, path);
    }
    out.push_back({line_no, path, trim(line.substr(eq + 1))});
  }
  return out;
}

/// Maps a bare override key ("buffer_limit") to its full path.
std::string resolve_override_key(const std::string& key) {
  if (find_field(key) || key.find('.') != std::string::npos) return key;
  std::vector<std::string> hits;
  for (const Field& f : fields()) {
    const auto dot = f.path.rfind('.');
    if (dot != std::string::npos && f.path.substr(dot + 1) == key) hits.push_back(f.path);
  }
  if (hits.size() == 1) return hits.front();
  if (hits.size() > 1) {
    throw ConfigError("ambiguous key, use one of: " + join(hits, ", "), 0, key);
  }
  return key;
}

Entry parse_override(const std::string& o) {
  const auto eq = o.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must be key=value, got '" + o + "'", 0, o);
  }
  const std::string key = trim(o.substr(0, eq));
  return {0, resolve_override_key(key), trim(o.substr(eq + 1))};
}

int line_of(const LineMap& lines, std::string_view path) {
  const auto it = lines.find(path);
  return it == lines.end() ? 0 : it->second;
}

Topology build_topology(const Scenario& s) {
  TopologyParams p = s.topo;
  p.voice_pairs = s.voice.users;
  p.video_pairs = s.video.users;
  if (s.topology == "enterprise") return enterprise_topology(p);
  if (s.topology == "enterprise-vpn") return enterprise_vpn_topology(p, s.vpn.overhead_bytes, s.vpn.enabled);
  if (s.topology != "custom") {
    throw PreconditionError("unknown topology '" + s.topology +
                            "' (expected enterprise, enterprise-vpn or custom)");
  }
  Topology t;
  for (const NodeDecl& n : s.nodes) t.add_node(n.name, n.kind, n.processing, n.remote);
  for (const LinkDecl& l : s.links) {
    t.add_link(t.require(l.a), t.require(l.b), l.rate_bps, l.propagation);
  }
  if (!s.tunnel_entry.empty() || !s.tunnel_exit.empty()) {
    VpnTunnel tunnel;
    tunnel.entry = t.require(s.tunnel_entry);
    tunnel.exit = t.require(s.tunnel_exit);
    tunnel.overhead_bytes = s.vpn.overhead_bytes;
    tunnel.enabled = s.vpn.enabled;
    for (const GrantDecl& g : s.grants) {
      tunnel.permitted.push_back({t.require(g.user), t.require(g.server), g.app});
    }
    t.set_tunnel(std::move(tunnel));
  }
  t.finalize();
  return t;
}

void check(bool ok, const LineMap& lines, const std::string& path,
           const std::string& message) {
  if (!ok) throw ConfigError(message, line_of(lines, path), path);
}

void check_distribution(const Distribution& d, const LineMap& lines,
                        const std::string& path) {
  check(d.value > 0.0, lines, path, "distribution parameter must be > 0");
}

void validate_at(const Scenario& s, const LineMap& lines) {
  check(s.duration > 0.0, lines, "duration", "duration must be > 0");
  check(s.warmup >= 0.0, lines, "warmup", "warmup must be >= 0");
  check(s.duration > s.warmup, lines, "duration", "duration must exceed warmup");
  check(s.window > 0.0 && s.window <= s.duration, lines, "metrics.window",
        "window must be in (0, duration]");
  check(s.tick > 0.0, lines, "metrics.tick", "tick must be > 0");

  check(s.qos.buffer_limit > 0, lines, "qos.buffer_limit", "buffer_limit must be > 0");
  for (auto w : s.qos.weights) check(w > 0, lines, "qos.weights", "weights must be > 0");
  check(s.qos.quantum_per_weight > 0, lines, "qos.quantum_per_weight",
        "quantum_per_weight must be > 0");
  if (s.qos.red.enabled) {
    const RedParams& r = s.qos.red;
    check(r.weight > 0.0 && r.weight < 1.0, lines, "red.weight", "RED weight must be in (0, 1)");
    check(r.max_p > 0.0 && r.max_p <= 1.0, lines, "red.max_p", "RED max_p must be in (0, 1]");
    check(r.min_th_frac > 0.0, lines, "red.min_th_frac", "RED min_th_frac must be > 0");
    check(r.max_th_frac > r.min_th_frac && r.max_th_frac <= 1.0, lines, "red.max_th_frac",
          "RED max_th_frac must be in (min_th_frac, 1]");
    check(r.typical_packet_bytes > 0, lines, "red.typical_packet_bytes",
          "typical_packet_bytes must be > 0");
  }

  check(s.voice.codec_bps > 0.0, lines, "voice.codec_bps", "codec_bps must be > 0");
  check(s.voice.frame_period > 0.0, lines, "voice.frame_period", "frame_period must be > 0");
  check(s.voice.start >= 0.0, lines, "voice.start", "start must be >= 0");
  check(s.video.width > 0 && s.video.height > 0, lines, "video.width",
        "frame geometry must be > 0");
  check(s.video.bits_per_pixel > 0.0, lines, "video.bits_per_pixel", "bits_per_pixel must be > 0");
  check(s.video.frame_interval > 0.0, lines, "video.frame_interval", "frame_interval must be > 0");
  check(s.video.mtu_payload > 0, lines, "video.mtu_payload", "mtu_payload must be > 0");
  check(s.video.start >= 0.0, lines, "video.start", "start must be >= 0");
  for (const auto& [name, d] : {std::pair<std::string, const DataSpec*>{"database", &s.database},
                                {"ftp", &s.ftp}}) {
    check_distribution(d->unit, lines, name + ".unit");
    check_distribution(d->interval, lines, name + ".interval");
    check(d->mtu_payload > 0, lines, name + ".mtu_payload", "mtu_payload must be > 0");
    check(d->start >= 0.0, lines, name + ".start", "start must be >= 0");
  }
  check(s.server.service_rate_bps > 0.0, lines, "server.service_rate_bps",
        "service_rate_bps must be > 0");
  check(s.server.reply_bytes > 0, lines, "server.reply_bytes", "reply_bytes must be > 0");
  check_distribution(s.vpn.remote_unit, lines, "vpn.remote_unit");
  check_distribution(s.vpn.remote_interval, lines, "vpn.remote_interval");

  Topology topo;
  try {
    topo = build_topology(s);
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what(), line_of(lines, "topology.preset"), "topology");
  }
  bool has_port = false;
  for (const Port& p : topo.ports()) has_port = has_port || topo.port_name(p.index) == s.monitor;
  check(has_port, lines, "qos.monitor", "no interface named '" + s.monitor + "'");
  check(topo.find(s.server.node).has_value(), lines, "server.node",
        "unknown server node '" + s.server.node + "'");
  if (s.vpn.enabled) {
    check(topo.tunnel().has_value(), lines, "vpn.enabled",
          "vpn enabled but the topology has no tunnel");
  }
  if (topo.tunnel()) {
    for (const std::string& u : s.vpn.remote_users) {
      check(topo.find(u).has_value(), lines, "vpn.remote_users", "unknown remote user '" + u + "'");
    }
  }

  if (s.sweep.active()) {
    check(find_field(s.sweep.key) != nullptr && s.sweep.key != "sweep.key", lines, "sweep.key",
          "unknown sweep key '" + s.sweep.key + "'");
    check(!s.sweep.values.empty(), lines, "sweep.values", "sweep needs at least one value");
    check(s.sweep.labels.empty() || s.sweep.labels.size() == s.sweep.values.size(), lines,
          "sweep.labels", "sweep.labels must match sweep.values in length");
    for (const SweepMember& m : expand(s)) validate_at(m.scenario, lines);
  }
}

Scenario load_entries(const std::vector<Entry>& file_entries,
                      const std::vector<std::string>& overrides) {
  std::vector<Entry> over;
  for (const std::string& o : overrides) over.push_back(parse_override(o));

  Scenario s;
  LineMap lines;
  // The preset layer goes first, whichever layer names it.
  const Entry* preset = nullptr;
  for (const Entry& e : file_entries) {
    if (e.path == "preset") preset = &e;
  }
  for (const Entry& e : over) {
    if (e.path == "preset") preset = &e;
  }
  if (preset && !preset->value.empty()) apply_preset(s, preset->value, preset->line);

  auto apply = [&](const Entry& e) {
    if (e.path == "preset") return;
    try {
      if (!assign(s, e.path, e.value)) throw ConfigError("unknown key", e.line, e.path);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& err) {
      throw ConfigError(err.what(), e.line, e.path);
    }
    lines[e.path] = e.line;
  };
  for (const Entry& e : file_entries) apply(e);
  for (const Entry& e : over) apply(e);
  validate_at(s, lines);
  return s;
}

}  // namespace

// --- public API ----------------------------------------------------------------

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const PresetDef& p : preset_table()) n.push_back(p.name);
    return n;
  }();
  return names;
}

std::string preset_description(std::string_view name) {
  for (const PresetDef& p : preset_table()) {
    if (p.name == name) return p.description;
  }
  return {};
}

Scenario load_scenario(std::string_view text, const std::vector<std::string>& overrides) {
  return load_entries(parse_text(text), overrides);
}

Scenario load_scenario_file(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario file '" + path.string() + "'", 0, "");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str(), overrides);
}

Scenario preset_scenario(std::string_view name, const std::vector<std::string>& overrides) {
  return load_scenario("preset = " + std::string(name) + "\n", overrides);
}

std::string dump_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "# resolved scenario\n";
  std::string section;
  for (const Field& f : fields()) {
    const auto dot = f.path.find('.');
    const std::string sec = dot == std::string::npos ? "" : f.path.substr(0, dot);
    const std::string key = dot == std::string::npos ? f.path : f.path.substr(dot + 1);
    if (sec != section) {
      out << "\n[" << sec << "]\n";
      section = sec;
    }
    out << key << " = " << f.get(s) << '\n';
  }
  if (!s.nodes.empty()) {
    out << "\n[nodes]\n";
    for (const NodeDecl& n : s.nodes) {
      out << n.name << " = " << to_string(n.kind) << ' ' << fmt_double(n.processing)
          << (n.remote ? " remote" : "") << '\n';
    }
  }
  if (!s.links.empty()) {
    out << "\n[links]\n";
    for (const LinkDecl& l : s.links) {
      out << l.id << " = " << l.a << ' ' << l.b << ' ' << fmt_double(l.rate_bps) << ' '
          << fmt_double(l.propagation) << '\n';
    }
  }
  return out.str();
}

void validate(const Scenario& s) { validate_at(s, {}); }

std::vector<SweepMember> expand(const Scenario& s) {
  if (!s.sweep.active()) return {{"", s}};
  std::vector<SweepMember> out;
  for (std::size_t i = 0; i < s.sweep.values.size(); ++i) {
    Scenario m = s;
    m.sweep = {};
    if (!assign(m, s.sweep.key, s.sweep.values[i])) {
      throw ConfigError("unknown sweep key", 0, s.sweep.key);
    }
    std::string label = i < s.sweep.labels.size()
                            ? s.sweep.labels[i]
                            : s.sweep.key.substr(s.sweep.key.rfind('.') + 1) + "-" +
                                  s.sweep.values[i];
    out.push_back({std::move(label), std::move(m)});
  }
  return out;
}

NetworkConfig build_network(const Scenario& s) {
  NetworkConfig cfg;
  cfg.topology = build_topology(s);
  const Topology& t = cfg.topology;
  cfg.router_qos = s.qos;
  cfg.monitored_port = s.monitor;
  cfg.metrics = {s.window, s.warmup, s.tick, s.duration};
  cfg.seed = s.seed;

  auto add = [&](std::string name, TrafficClass cls, NodeId src, NodeId dst,
                 Distribution unit, Distribution interval, std::uint32_t header,
                 std::uint32_t mtu, double start) {
    TrafficSource ts;
    ts.cls = cls;
    ts.start_time = start;
    ts.interval = interval;
    ts.unit_bytes = unit;
    ts.header_bytes = header;
    ts.mtu_payload = mtu;
    ts.src = src;
    ts.dst = dst;
    cfg.sources.push_back({std::move(name), ts});
  };

  // Periodic sources start at a random phase within one period; Poisson
  // sources start one exponential gap after `start`.
  for (std::uint32_t i = 0; i < s.voice.users; ++i) {
    const std::string name = "voice-" + std::to_string(i + 1);
    RngStream phase("phase/" + name, s.seed);
    const double offset = s.voice.random_phase ? phase.uniform() * s.voice.frame_period : 0.0;
    add(name, TrafficClass::Voice, t.require(station_name("voice-tx", i, s.voice.users)),
        t.require(station_name("voice-rx", i, s.voice.users)),
        Distribution::constant(codec_frame_bytes(s.voice.codec_bps, s.voice.frame_period)),
        Distribution::constant(s.voice.frame_period), s.voice.header_bytes,
        kMtuPayloadBytes, s.voice.start + offset);
  }
  for (std::uint32_t i = 0; i < s.video.users; ++i) {
    const std::string name = "video-" + std::to_string(i + 1);
    RngStream phase("phase/" + name, s.seed);
    const double offset = s.video.random_phase ? phase.uniform() * s.video.frame_interval : 0.0;
    add(name, TrafficClass::Video, t.require(station_name("video-tx", i, s.video.users)),
        t.require(station_name("video-rx", i, s.video.users)),
        Distribution::constant(
            video_frame_bytes(s.video.width, s.video.height, s.video.bits_per_pixel)),
        Distribution::constant(s.video.frame_interval), s.video.header_bytes,
        s.video.mtu_payload, s.video.start + offset);
  }
  const NodeId server = t.require(s.server.node);
  auto add_data = [&](const DataSpec& d, TrafficClass cls) {
    if (d.users == 0) return;
    const NodeId users = t.require("data-users");
    for (std::uint32_t i = 0; i < d.users; ++i) {
      const std::string name = std::string(to_string(cls)) + "-" + std::to_string(i + 1);
      RngStream phase("phase/" + name, s.seed);
      add(name, cls, users, server, d.unit, d.interval, d.header_bytes, d.mtu_payload,
          d.start + d.interval.sample(phase));
    }
  };
  add_data(s.database, TrafficClass::Database);
  add_data(s.ftp, TrafficClass::Ftp);

  if (t.tunnel()) {
    for (const std::string& u : s.vpn.remote_users) {
      const std::string name = "remote-" + u;
      RngStream phase("phase/" + name, s.seed);
      add(name, TrafficClass::Database, t.require(u), server, s.vpn.remote_unit,
          s.vpn.remote_interval, kHeaderBytes, kMtuPayloadBytes,
          s.vpn.remote_interval.sample(phase));
    }
  }

  ServerModel sm;
  sm.id = server;
  sm.service_rate_bps = s.server.service_rate_bps;
  sm.reply_payload_bytes = s.server.reply_bytes;
  cfg.server = sm;
  return cfg;
}

RunOutput run_scenario(const Scenario& s) {
  if (s.sweep.active()) {
    throw PreconditionError("run_scenario needs a single run; expand the sweep first");
  }
  Network net(build_network(s));
  RunOutput out;
  out.scenario = s;
  out.result = net.run();
  out.summary = summarize(out.result.series, false);
  out.summary_quantized = summarize(out.result.series, true);
  return out;
}

void write_run(const RunOutput& run, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  export_csv(run.result.series, dir / "metrics.csv");
  export_summary(run.summary_quantized, dir / "summary.csv");

  std::ofstream counters(dir / "counters.csv", std::ios::binary | std::ios::trunc);
  if (!counters) throw Error("cannot write '" + (dir / "counters.csv").string() + "'");
  counters << "name,value\n";
  for (const auto& [name, value] : run.result.counters.rows()) {
    counters << name << ',' << value << '\n';
  }

  std::ofstream resolved(dir / "resolved.ini", std::ios::binary | std::ios::trunc);
  if (!resolved) throw Error("cannot write '" + (dir / "resolved.ini").string() + "'");
  resolved << dump_scenario(run.scenario);
}

std::vector<RunOutput> run_all(const Scenario& s, const std::filesystem::path& out,
                               bool parallel) {
  const std::vector<SweepMember> members = expand(s);
  std::vector<RunOutput> results(members.size());
  std::vector<std::exception_ptr> errors(members.size());

  auto work = [&](std::size_t i) {
    try {
      results[i] = run_scenario(members[i].scenario);
      results[i].label = members[i].label;
      if (!out.empty()) {
        std::filesystem::path dir = out / s.name;
        if (!members[i].label.empty()) dir /= members[i].label;
        write_run(results[i], dir);
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  if (parallel && members.size() > 1) {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < members.size(); ++i) pool.emplace_back(work, i);
    for (std::thread& t : pool) t.join();
  } else {
    for (std::size_t i = 0; i < members.size(); ++i) work(i);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace qosim

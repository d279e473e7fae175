#include "coopmc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "coopmc/hash.hpp"

namespace coopmc {

Topology TopologySpec::build() const {
  switch (builder) {
    case TopologyBuilder::SymmetricRing:
      return build_symmetric_ring(k, rx_radius_um, fc_radius_um);
    case TopologyBuilder::AsymmetricLine:
      return build_asymmetric_line(case_index, rx_radius_um, fc_radius_um);
    case TopologyBuilder::Explicit: {
      Topology topo;
      topo.tx = tx;
      topo.fc = {fc_center, fc_radius_um};
      for (std::size_t i = 0; i + 2 < rx_centers.size(); i += 3)
        topo.receivers.push_back(
            {{rx_centers[i], rx_centers[i + 1], rx_centers[i + 2]}, rx_radius_um});
      topo.validate();
      return topo;
    }
  }
  throw std::logic_error("TopologySpec::build: bad builder");
}

std::size_t TopologySpec::receiver_count() const {
  switch (builder) {
    case TopologyBuilder::SymmetricRing:
      return static_cast<std::size_t>(k);
    case TopologyBuilder::AsymmetricLine:
      return 3;
    case TopologyBuilder::Explicit:
      return rx_centers.size() / 3;
  }
  return 0;
}

std::vector<double> SweepSpec::values() const {
  std::vector<double> vs;
  if (!(step > 0.0)) return vs;
  for (double v = from; v <= to + 1e-12 * std::max(1.0, std::abs(to)); v += step) vs.push_back(v);
  return vs;
}

Thresholds ExperimentConfig::thresholds() const {
  return Thresholds::shared(topology.receiver_count(), xi_rx, xi_fc);
}

AveragingOptions ExperimentConfig::averaging_options(int threads) const {
  AveragingOptions opts;
  opts.isi_window = run.isi_window;
  opts.prior = run.prior;
  opts.threads = threads;
  return opts;
}

SimConfig ExperimentConfig::sim_config(int threads) const {
  SimConfig cfg = sim;
  cfg.scheme = scheme;
  cfg.vote_threshold = vote_threshold;
  cfg.threads = threads;
  return cfg;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* builder_name(TopologyBuilder b) {
  switch (b) {
    case TopologyBuilder::SymmetricRing:
      return "symmetric_ring";
    case TopologyBuilder::AsymmetricLine:
      return "asymmetric_line";
    case TopologyBuilder::Explicit:
      return "explicit";
  }
  return "unknown";
}

}  // namespace

std::string ExperimentConfig::emit() const {
  std::ostringstream out;
  out << "[topology]\n";
  out << "builder = \"" << builder_name(topology.builder) << "\"\n";
  if (topology.builder == TopologyBuilder::SymmetricRing) out << "k = " << topology.k << "\n";
  if (topology.builder == TopologyBuilder::AsymmetricLine)
    out << "case_index = " << topology.case_index << "\n";
  out << "rx_radius_um = " << fmt_double(topology.rx_radius_um) << "\n";
  out << "fc_radius_um = " << fmt_double(topology.fc_radius_um) << "\n";
  if (topology.builder == TopologyBuilder::Explicit) {
    out << "tx = [" << fmt_double(topology.tx.x) << ", " << fmt_double(topology.tx.y) << ", "
        << fmt_double(topology.tx.z) << "]\n";
    out << "fc_center = [" << fmt_double(topology.fc_center.x) << ", "
        << fmt_double(topology.fc_center.y) << ", " << fmt_double(topology.fc_center.z) << "]\n";
    out << "rx_centers = [";
    for (std::size_t i = 0; i < topology.rx_centers.size(); ++i) {
      if (i) out << ", ";
      out << fmt_double(topology.rx_centers[i]);
    }
    out << "]\n";
  }
  out << "\n[diffusion]\n";
  out << "d_a = " << fmt_double(diffusion.d_a) << "\n";
  out << "d_b = " << fmt_double(diffusion.d_b) << "\n";
  out << "s_a = " << diffusion.s_a << "\n";
  out << "s_b = " << diffusion.s_b << "\n";
  out << "\n[timing]\n";
  out << "symbol_interval = " << fmt_double(timing.symbol_interval) << "\n";
  out << "t_trans = " << fmt_double(timing.t_trans) << "\n";
  out << "t_report = " << fmt_double(timing.t_report) << "\n";
  out << "m_rx = " << timing.m_rx << "\n";
  out << "m_fc = " << timing.m_fc << "\n";
  out << "dt_rx = " << fmt_double(timing.dt_rx) << "\n";
  out << "dt_fc = " << fmt_double(timing.dt_fc) << "\n";
  out << "\n[detection]\n";
  out << "xi_rx = " << xi_rx << "\n";
  out << "xi_fc = " << xi_fc << "\n";
  out << "\n[scheme]\n";
  out << "variant = \"" << scheme_name(scheme) << "\"\n";
  out << "vote_threshold = " << vote_threshold << "\n";
  out << "\n[run]\n";
  out << "sequence_length = " << run.sequence_length << "\n";
  out << "p1 = " << fmt_double(run.p1) << "\n";
  out << "averaging = \"" << (run.monte_carlo ? "mc" : "exact") << "\"\n";
  out << "mc_samples = " << run.mc_samples << "\n";
  out << "mc_seed = " << run.mc_seed << "\n";
  out << "prefix_prior = \"" << (run.prior == PrefixPrior::Uniform ? "uniform" : "p1") << "\"\n";
  out << "isi_window = " << run.isi_window << "\n";
  out << "\n[sim]\n";
  out << "trials = " << sim.trials << "\n";
  out << "seed = " << sim.rng_seed << "\n";
  out << "sim_step = " << fmt_double(sim.sim_step) << "\n";
  out << "cull_horizon = " << sim.cull_horizon << "\n";
  out << "aggressive_cull = " << (sim.aggressive_cull ? "true" : "false") << "\n";
  out << "event_jumps = " << (sim.event_jumps ? "true" : "false") << "\n";
  out << "trial_log = " << (sim.trial_log ? "true" : "false") << "\n";
  out << "\n[optimize]\n";
  out << "xi_rx_min = " << optimize.xi_rx.lo << "\n";
  out << "xi_rx_max = " << optimize.xi_rx.hi << "\n";
  out << "xi_fc_min = " << optimize.xi_fc.lo << "\n";
  out << "xi_fc_max = " << optimize.xi_fc.hi << "\n";
  out << "strategy = \""
      << (optimize.strategy == SearchStrategy::Exhaustive ? "exhaustive" : "coarse_to_fine")
      << "\"\n";
  out << "stride = " << optimize.stride << "\n";
  if (sweep) {
    out << "\n[sweep]\n";
    out << "parameter = \"" << sweep->parameter << "\"\n";
    out << "from = " << fmt_double(sweep->from) << "\n";
    out << "to = " << fmt_double(sweep->to) << "\n";
    out << "step = " << fmt_double(sweep->step) << "\n";
  }
  return out.str();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(emit()); }

namespace {

struct RawValue {
  enum Kind { Number, String, Boolean, List } kind = Number;
  double num = 0.0;
  long long inum = 0;
  bool is_integer = false;
  bool boolean = false;
  std::string str;
  std::vector<double> list;
  int line = 0;
  bool consumed = false;
};

using Section = std::map<std::string, RawValue>;
using RawConfig = std::map<std::string, Section>;

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Strips a trailing comment, respecting double quotes.
std::string strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return std::string(s.substr(0, i));
  }
  return std::string(s);
}

bool parse_number(const std::string& text, RawValue& v) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  double d = 0.0;
  auto [p, ec] = std::from_chars(begin, end, d);
  if (ec != std::errc() || p != end) return false;
  v.kind = RawValue::Number;
  v.num = d;
  v.is_integer = text.find_first_of(".eE") == std::string::npos;
  if (v.is_integer) {
    long long i = 0;
    auto [pi, eci] = std::from_chars(begin, end, i);
    if (eci == std::errc() && pi == end)
      v.inum = i;
    else
      v.is_integer = false;
  }
  return true;
}

bool parse_value(const std::string& text, RawValue& v) {
  if (text.empty()) return false;
  if (text == "true" || text == "false") {
    v.kind = RawValue::Boolean;
    v.boolean = text == "true";
    return true;
  }
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') return false;
    v.kind = RawValue::String;
    v.str = text.substr(1, text.size() - 2);
    return true;
  }
  if (text.front() == '[') {
    if (text.back() != ']') return false;
    v.kind = RawValue::List;
    std::string inner = text.substr(1, text.size() - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) return false;
      RawValue elem;
      if (!parse_number(item, elem)) return false;
      v.list.push_back(elem.num);
    }
    return true;
  }
  return parse_number(text, v);
}

RawConfig parse_raw(std::string_view text, std::vector<Diagnostic>& diags) {
  RawConfig raw;
  std::string current_section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line_view =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const std::string line = trim(strip_comment(line_view));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        diags.push_back({line_no, true, "malformed section header: " + line});
        continue;
      }
      current_section = trim(line.substr(1, line.size() - 2));
      raw[current_section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      diags.push_back({line_no, true, "expected key = value: " + line});
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value_text = trim(line.substr(eq + 1));
    if (current_section.empty()) {
      diags.push_back({line_no, true, "key outside of any [section]: " + key});
      continue;
    }
    RawValue v;
    v.line = line_no;
    if (!parse_value(value_text, v)) {
      diags.push_back({line_no, true, "cannot parse value for '" + key + "': " + value_text});
      continue;
    }
    if (raw[current_section].count(key))
      diags.push_back({line_no, true, "duplicate key '" + current_section + "." + key + "'"});
    raw[current_section][key] = std::move(v);
  }
  return raw;
}

class SchemaReader {
 public:
  SchemaReader(RawConfig& raw, std::vector<Diagnostic>& diags) : raw_(raw), diags_(diags) {}

  RawValue* find(const std::string& section, const std::string& key) {
    auto sit = raw_.find(section);
    if (sit == raw_.end()) return nullptr;
    auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return nullptr;
    kit->second.consumed = true;
    return &kit->second;
  }

  int line(const std::string& section, const std::string& key) {
    auto sit = raw_.find(section);
    if (sit == raw_.end()) return 0;
    auto kit = sit->second.find(key);
    return kit == sit->second.end() ? 0 : kit->second.line;
  }

  template <typename T>
  void get_int(const std::string& section, const std::string& key, T& out) {
    if (RawValue* v = find(section, key)) {
      if (v->kind != RawValue::Number || !v->is_integer)
        diags_.push_back({v->line, true, "'" + section + "." + key + "' must be an integer"});
      else
        out = static_cast<T>(v->inum);
    }
  }

  void get_u64(const std::string& section, const std::string& key, std::uint64_t& out) {
    if (RawValue* v = find(section, key)) {
      if (v->kind != RawValue::Number || !v->is_integer || v->inum < 0)
        diags_.push_back(
            {v->line, true, "'" + section + "." + key + "' must be a non-negative integer"});
      else
        out = static_cast<std::uint64_t>(v->inum);
    }
  }

  void get_double(const std::string& section, const std::string& key, double& out) {
    if (RawValue* v = find(section, key)) {
      if (v->kind != RawValue::Number)
        diags_.push_back({v->line, true, "'" + section + "." + key + "' must be a number"});
      else
        out = v->num;
    }
  }

  void get_bool(const std::string& section, const std::string& key, bool& out) {
    if (RawValue* v = find(section, key)) {
      if (v->kind != RawValue::Boolean)
        diags_.push_back({v->line, true, "'" + section + "." + key + "' must be true or false"});
      else
        out = v->boolean;
    }
  }

  void get_string(const std::string& section, const std::string& key, std::string& out) {
    if (RawValue* v = find(section, key)) {
      if (v->kind != RawValue::String)
        diags_.push_back({v->line, true, "'" + section + "." + key + "' must be a quoted string"});
      else
        out = v->str;
    }
  }

  void get_list(const std::string& section, const std::string& key, std::vector<double>& out) {
    if (RawValue* v = find(section, key)) {
      if (v->kind != RawValue::List)
        diags_.push_back({v->line, true, "'" + section + "." + key + "' must be a [list]"});
      else
        out = v->list;
    }
  }

  bool has_section(const std::string& section) const { return raw_.count(section) != 0; }

  void report_unknown(const std::set<std::string>& known_sections) {
    for (auto& [section, entries] : raw_) {
      if (!known_sections.count(section)) {
        diags_.push_back({0, true, "unknown section [" + section + "]"});
        continue;
      }
      for (auto& [key, value] : entries)
        if (!value.consumed)
          diags_.push_back({value.line, true, "unknown key '" + section + "." + key + "'"});
    }
  }

 private:
  RawConfig& raw_;
  std::vector<Diagnostic>& diags_;
};

void require_key(SchemaReader& reader, std::vector<Diagnostic>& diags, const RawConfig& raw,
                 const std::string& section, const std::string& key) {
  auto sit = raw.find(section);
  if (sit == raw.end() || !sit->second.count(key))
    diags.push_back({0, true, "missing required key '" + section + "." + key + "'"});
  (void)reader;
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.topology = {};
  cfg.diffusion = {};
  cfg.timing = {};
  cfg.xi_rx = 20;
  cfg.xi_fc = 6;
  cfg.scheme = SchemeKind::SdConstant;
  cfg.run = {};
  cfg.sim = {};
  cfg.optimize = {};
  cfg.diffusion.s_b = (2000 + cfg.topology.k - 1) / cfg.topology.k;
  return cfg;
}

ConfigResult validate_config(std::string_view text) {
  ConfigResult result;
  auto& diags = result.diagnostics;
  RawConfig raw = parse_raw(text, diags);
  SchemaReader reader(raw, diags);

  ExperimentConfig cfg;

  // required keys
  require_key(reader, diags, raw, "topology", "builder");
  require_key(reader, diags, raw, "scheme", "variant");
  require_key(reader, diags, raw, "run", "sequence_length");
  require_key(reader, diags, raw, "detection", "xi_rx");
  require_key(reader, diags, raw, "detection", "xi_fc");

  std::string builder = "symmetric_ring";
  reader.get_string("topology", "builder", builder);
  if (builder == "symmetric_ring") {
    cfg.topology.builder = TopologyBuilder::SymmetricRing;
  } else if (builder == "asymmetric_line") {
    cfg.topology.builder = TopologyBuilder::AsymmetricLine;
  } else if (builder == "explicit") {
    cfg.topology.builder = TopologyBuilder::Explicit;
  } else {
    diags.push_back({reader.line("topology", "builder"), true,
                     "topology.builder must be symmetric_ring, asymmetric_line or explicit"});
  }
  reader.get_int("topology", "k", cfg.topology.k);
  reader.get_int("topology", "case_index", cfg.topology.case_index);
  reader.get_double("topology", "rx_radius_um", cfg.topology.rx_radius_um);
  reader.get_double("topology", "fc_radius_um", cfg.topology.fc_radius_um);
  std::vector<double> vec3;
  reader.get_list("topology", "tx", vec3);
  if (vec3.size() == 3) cfg.topology.tx = {vec3[0], vec3[1], vec3[2]};
  vec3.clear();
  reader.get_list("topology", "fc_center", vec3);
  if (vec3.size() == 3) cfg.topology.fc_center = {vec3[0], vec3[1], vec3[2]};
  reader.get_list("topology", "rx_centers", cfg.topology.rx_centers);

  std::string variant = "sd_constant";
  reader.get_string("scheme", "variant", variant);
  if (variant == "sd_constant") {
    cfg.scheme = SchemeKind::SdConstant;
  } else if (variant == "majority") {
    cfg.scheme = SchemeKind::Majority;
  } else if (variant == "single_link") {
    cfg.scheme = SchemeKind::SingleLink;
  } else {
    diags.push_back({reader.line("scheme", "variant"), true,
                     "scheme.variant must be sd_constant, majority or single_link"});
  }
  reader.get_int("scheme", "vote_threshold", cfg.vote_threshold);

  // diffusion defaults depend on the scheme / receiver count
  cfg.diffusion.s_a = cfg.scheme == SchemeKind::SingleLink ? 10000 : 8000;
  const std::size_t k_receivers = std::max<std::size_t>(1, cfg.topology.receiver_count());
  cfg.diffusion.s_b = static_cast<long long>((2000 + k_receivers - 1) / k_receivers);
  reader.get_double("diffusion", "d_a", cfg.diffusion.d_a);
  reader.get_double("diffusion", "d_b", cfg.diffusion.d_b);
  reader.get_int("diffusion", "s_a", cfg.diffusion.s_a);
  reader.get_int("diffusion", "s_b", cfg.diffusion.s_b);

  reader.get_double("timing", "symbol_interval", cfg.timing.symbol_interval);
  reader.get_double("timing", "t_trans", cfg.timing.t_trans);
  reader.get_double("timing", "t_report", cfg.timing.t_report);
  reader.get_int("timing", "m_rx", cfg.timing.m_rx);
  reader.get_int("timing", "m_fc", cfg.timing.m_fc);
  reader.get_double("timing", "dt_rx", cfg.timing.dt_rx);
  reader.get_double("timing", "dt_fc", cfg.timing.dt_fc);

  reader.get_int("detection", "xi_rx", cfg.xi_rx);
  reader.get_int("detection", "xi_fc", cfg.xi_fc);

  reader.get_int("run", "sequence_length", cfg.run.sequence_length);
  reader.get_double("run", "p1", cfg.run.p1);
  std::string averaging = "exact";
  reader.get_string("run", "averaging", averaging);
  if (averaging == "exact") {
    cfg.run.monte_carlo = false;
  } else if (averaging == "mc") {
    cfg.run.monte_carlo = true;
  } else {
    diags.push_back({reader.line("run", "averaging"), true, "run.averaging must be exact or mc"});
  }
  reader.get_int("run", "mc_samples", cfg.run.mc_samples);
  reader.get_u64("run", "mc_seed", cfg.run.mc_seed);
  std::string prior = "p1";
  reader.get_string("run", "prefix_prior", prior);
  if (prior == "p1") {
    cfg.run.prior = PrefixPrior::P1Weighted;
  } else if (prior == "uniform") {
    cfg.run.prior = PrefixPrior::Uniform;
  } else {
    diags.push_back(
        {reader.line("run", "prefix_prior"), true, "run.prefix_prior must be p1 or uniform"});
  }
  reader.get_int("run", "isi_window", cfg.run.isi_window);

  reader.get_int("sim", "trials", cfg.sim.trials);
  reader.get_u64("sim", "seed", cfg.sim.rng_seed);
  reader.get_double("sim", "sim_step", cfg.sim.sim_step);
  reader.get_int("sim", "cull_horizon", cfg.sim.cull_horizon);
  reader.get_bool("sim", "aggressive_cull", cfg.sim.aggressive_cull);
  reader.get_bool("sim", "event_jumps", cfg.sim.event_jumps);
  reader.get_bool("sim", "trial_log", cfg.sim.trial_log);

  reader.get_int("optimize", "xi_rx_min", cfg.optimize.xi_rx.lo);
  reader.get_int("optimize", "xi_rx_max", cfg.optimize.xi_rx.hi);
  reader.get_int("optimize", "xi_fc_min", cfg.optimize.xi_fc.lo);
  reader.get_int("optimize", "xi_fc_max", cfg.optimize.xi_fc.hi);
  std::string strategy = "exhaustive";
  reader.get_string("optimize", "strategy", strategy);
  if (strategy == "exhaustive") {
    cfg.optimize.strategy = SearchStrategy::Exhaustive;
  } else if (strategy == "coarse_to_fine") {
    cfg.optimize.strategy = SearchStrategy::CoarseToFine;
  } else {
    diags.push_back({reader.line("optimize", "strategy"), true,
                     "optimize.strategy must be exhaustive or coarse_to_fine"});
  }
  reader.get_int("optimize", "stride", cfg.optimize.stride);

  if (reader.has_section("sweep")) {
    SweepSpec sweep;
    reader.get_string("sweep", "parameter", sweep.parameter);
    reader.get_double("sweep", "from", sweep.from);
    reader.get_double("sweep", "to", sweep.to);
    reader.get_double("sweep", "step", sweep.step);
    cfg.sweep = sweep;
  }

  reader.report_unknown(
      {"topology", "diffusion", "timing", "detection", "scheme", "run", "sim", "optimize", "sweep"});

  // semantic validation; collect everything rather than stopping early
  const auto sem_error = [&](const std::string& section, const std::string& key,
                             const std::string& msg) {
    diags.push_back({reader.line(section, key), true, msg});
  };
  const auto sem_warning = [&](const std::string& section, const std::string& key,
                               const std::string& msg) {
    diags.push_back({reader.line(section, key), false, msg});
  };

  if (cfg.topology.builder == TopologyBuilder::SymmetricRing &&
      (cfg.topology.k < 1 || cfg.topology.k > 6))
    sem_error("topology", "k", "topology.k must be in 1..6 for the ring builder");
  if (cfg.topology.builder == TopologyBuilder::AsymmetricLine &&
      (cfg.topology.case_index < 1 || cfg.topology.case_index > 5))
    sem_error("topology", "case_index", "topology.case_index must be in 1..5");
  if (cfg.topology.builder == TopologyBuilder::Explicit) {
    if (cfg.topology.rx_centers.empty() || cfg.topology.rx_centers.size() % 3 != 0)
      sem_error("topology", "rx_centers",
                "topology.rx_centers must hold x,y,z triples for at least one receiver");
  }
  if (!(cfg.topology.rx_radius_um > 0.0))
    sem_error("topology", "rx_radius_um", "topology.rx_radius_um must be positive");
  if (!(cfg.topology.fc_radius_um > 0.0))
    sem_error("topology", "fc_radius_um", "topology.fc_radius_um must be positive");

  if (!(cfg.diffusion.d_a > 0.0)) sem_error("diffusion", "d_a", "diffusion.d_a must be positive");
  if (!(cfg.diffusion.d_b > 0.0)) sem_error("diffusion", "d_b", "diffusion.d_b must be positive");
  if (cfg.diffusion.s_a < 0) sem_error("diffusion", "s_a", "diffusion.s_a must be >= 0");
  if (cfg.diffusion.s_b < 0) sem_error("diffusion", "s_b", "diffusion.s_b must be >= 0");

  if (!(cfg.timing.symbol_interval > 0.0) || !(cfg.timing.t_trans > 0.0) ||
      !(cfg.timing.t_report > 0.0))
    sem_error("timing", "symbol_interval", "timing intervals must be positive");
  if (cfg.timing.m_rx < 1) sem_error("timing", "m_rx", "timing.m_rx must be >= 1");
  if (cfg.timing.m_fc < 1) sem_error("timing", "m_fc", "timing.m_fc must be >= 1");
  if (!(cfg.timing.dt_rx > 0.0)) sem_error("timing", "dt_rx", "timing.dt_rx must be positive");
  if (!(cfg.timing.dt_fc > 0.0)) sem_error("timing", "dt_fc", "timing.dt_fc must be positive");
  if (cfg.timing.m_rx >= 1 && cfg.timing.dt_rx > 0.0 &&
      !(cfg.timing.m_rx * cfg.timing.dt_rx < cfg.timing.t_trans))
    sem_error("timing", "dt_rx",
              "half-duplex violation: m_rx * dt_rx must be < t_trans so receivers finish "
              "sampling before they report");
  if (cfg.timing.m_fc >= 1 && cfg.timing.dt_fc > 0.0 &&
      !(cfg.timing.m_fc * cfg.timing.dt_fc < cfg.timing.t_report))
    sem_error("timing", "dt_fc", "m_fc * dt_fc must be < t_report");
  if (cfg.timing.t_trans + cfg.timing.t_report > cfg.timing.symbol_interval)
    sem_warning("timing", "t_report",
                "t_trans + t_report exceeds the symbol interval; the last FC samples spill into "
                "the next interval (reference parameters do this)");

  if (cfg.xi_rx < 1) sem_error("detection", "xi_rx", "detection.xi_rx must be >= 1");
  if (cfg.xi_fc < 1) sem_error("detection", "xi_fc", "detection.xi_fc must be >= 1");

  const std::size_t K = cfg.topology.receiver_count();
  if (cfg.scheme == SchemeKind::SingleLink && K != 1)
    sem_error("scheme", "variant", "single_link requires a topology with exactly one receiver");
  if (cfg.scheme == SchemeKind::Majority && cfg.vote_threshold != 0 &&
      (cfg.vote_threshold < 1 || cfg.vote_threshold > static_cast<int>(K)))
    sem_error("scheme", "vote_threshold", "scheme.vote_threshold must be in 1..K (or 0 for default)");

  if (cfg.run.sequence_length < 1)
    sem_error("run", "sequence_length", "run.sequence_length must be >= 1");
  if (!(cfg.run.p1 >= 0.0 && cfg.run.p1 <= 1.0)) sem_error("run", "p1", "run.p1 must be in [0,1]");
  if (cfg.run.mc_samples < 1) sem_error("run", "mc_samples", "run.mc_samples must be >= 1");
  if (cfg.run.isi_window < 0) sem_error("run", "isi_window", "run.isi_window must be >= 0");

  if (cfg.sim.trials < 1) sem_error("sim", "trials", "sim.trials must be >= 1");
  if (!(cfg.sim.sim_step > 0.0)) sem_error("sim", "sim_step", "sim.sim_step must be positive");
  if (cfg.sim.cull_horizon < 0) sem_error("sim", "cull_horizon", "sim.cull_horizon must be >= 0");

  if (cfg.optimize.xi_rx.lo < 1 || cfg.optimize.xi_rx.hi < cfg.optimize.xi_rx.lo)
    sem_error("optimize", "xi_rx_min", "optimize xi_rx range is empty");
  if (cfg.optimize.xi_fc.lo < 1 || cfg.optimize.xi_fc.hi < cfg.optimize.xi_fc.lo)
    sem_error("optimize", "xi_fc_min", "optimize xi_fc range is empty");
  if (cfg.optimize.stride < 1) sem_error("optimize", "stride", "optimize.stride must be >= 1");

  if (cfg.sweep) {
    static const std::set<std::string> known = {"xi_rx", "xi_fc", "s_a",
                                                "s_b",   "p1",    "k",
                                                "case_index"};
    if (!known.count(cfg.sweep->parameter))
      sem_error("sweep", "parameter",
                "sweep.parameter must be one of xi_rx, xi_fc, s_a, s_b, p1, k, case_index");
    if (!(cfg.sweep->step > 0.0)) sem_error("sweep", "step", "sweep.step must be positive");
    if (cfg.sweep->to < cfg.sweep->from) sem_error("sweep", "to", "sweep range is empty");
  }

  bool has_error = false;
  for (const auto& d : diags) has_error = has_error || d.error;
  if (!has_error) result.config = std::move(cfg);
  return result;
}

ConfigResult load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ConfigResult r;
    r.diagnostics.push_back({0, true, "cannot open config file: " + path});
    return r;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return validate_config(ss.str());
}

}  // namespace coopmc

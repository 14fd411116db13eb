#include "aoi/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "aoi/errors.hpp"

namespace aoi::cli {

using nlohmann::json;

namespace {

// ------------------------------------------------------------ config parsing

// A JSON object plus its dotted path, for field-level error messages.
class Section {
 public:
  Section(const json& node, std::string path, std::set<std::string> allowed) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_, "must be a JSON object");
    for (const auto& [key, value] : node_.items()) {
      if (!allowed.count(key)) throw ConfigError(field(key), "unknown field");
    }
  }

  std::string field(const std::string& key) const { return path_ + "." + key; }
  bool has(const std::string& key) const { return node_.contains(key); }
  const json& raw(const std::string& key) const { return node_.at(key); }

  double number(const std::string& key) const {
    if (!has(key)) throw ConfigError(field(key), "is required");
    const json& v = node_.at(key);
    if (!v.is_number()) throw ConfigError(field(key), "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(field(key), "must be finite");
    return d;
  }

  double number_or(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  double positive(const std::string& key) const {
    const double d = number(key);
    if (!(d > 0.0)) throw ConfigError(field(key), "must be > 0");
    return d;
  }

  double non_negative(const std::string& key) const {
    const double d = number(key);
    if (!(d >= 0.0)) throw ConfigError(field(key), "must be >= 0");
    return d;
  }

  std::uint64_t integer(const std::string& key, std::uint64_t min_value) const {
    if (!has(key)) throw ConfigError(field(key), "is required");
    const json& v = node_.at(key);
    if (!v.is_number_integer() && !(v.is_number_float() && v.get<double>() == std::floor(v.get<double>()))) {
      throw ConfigError(field(key), "must be an integer");
    }
    if (v.is_number_integer() && v.get<std::int64_t>() < 0 && !v.is_number_unsigned()) {
      throw ConfigError(field(key), "must be >= " + std::to_string(min_value));
    }
    const auto n = v.is_number_unsigned() ? v.get<std::uint64_t>() : static_cast<std::uint64_t>(v.get<double>());
    if (v.is_number_float() && v.get<double>() < 0.0) {
      throw ConfigError(field(key), "must be >= " + std::to_string(min_value));
    }
    if (n < min_value) throw ConfigError(field(key), "must be >= " + std::to_string(min_value));
    return n;
  }

  std::string string(const std::string& key) const {
    if (!has(key)) throw ConfigError(field(key), "is required");
    if (!node_.at(key).is_string()) throw ConfigError(field(key), "must be a string");
    return node_.at(key).get<std::string>();
  }

 private:
  const json& node_;
  std::string path_;
};

enum class Command { metrics, simulate, sweep, minimize };

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

void parse_link(const json& doc, std::optional<sweep::Variable> swept, RunConfig& cfg) {
  if (!doc.contains("link")) throw ConfigError("link", "section is required");
  Section s(doc.at("link"), "link",
            {"n_antennas", "rician_k", "snr_db", "doppler_hz", "speed_mps", "wavelength_m", "t_packet_s",
             "rate_bps_hz"});
  auto& link = cfg.scenario.link;
  auto& out = cfg.resolved["link"];

  const bool sweeping_n = swept == sweep::Variable::n_antennas;
  const bool sweeping_snr = swept == sweep::Variable::snr_db;
  const bool sweeping_rate = swept == sweep::Variable::rate;

  if (!sweeping_n || s.has("n_antennas")) {
    const auto n = s.integer("n_antennas", 1);
    if (n > 4096) throw ConfigError(s.field("n_antennas"), "must be <= 4096");
    link.n_antennas = static_cast<int>(n);
    out["n_antennas"] = link.n_antennas;
  }
  link.rician_k = s.has("rician_k") ? s.non_negative("rician_k") : 0.0;
  out["rician_k"] = link.rician_k;

  if (!sweeping_snr || s.has("snr_db")) {
    const double db = s.number("snr_db");
    link.avg_snr = channel::db_to_linear(db);
    out["snr_db"] = db;
  } else {
    link.avg_snr = kUnset;
  }

  if (s.has("doppler_hz")) {
    if (s.has("speed_mps") || s.has("wavelength_m")) {
      throw ConfigError(s.field("doppler_hz"), "give either doppler_hz or speed_mps + wavelength_m, not both");
    }
    link.doppler_hz = s.non_negative("doppler_hz");
  } else if (s.has("speed_mps") || s.has("wavelength_m")) {
    link.doppler_hz = s.non_negative("speed_mps") / s.positive("wavelength_m");
  } else {
    throw ConfigError(s.field("doppler_hz"), "is required (or speed_mps + wavelength_m)");
  }
  out["doppler_hz"] = link.doppler_hz;

  link.t_packet_s = s.positive("t_packet_s");
  out["t_packet_s"] = link.t_packet_s;

  if (!sweeping_rate || s.has("rate_bps_hz")) {
    link.rate_bps_hz = s.positive("rate_bps_hz");
    out["rate_bps_hz"] = link.rate_bps_hz;
  } else {
    link.rate_bps_hz = kUnset;
  }
}

void parse_protocol(const json& doc, std::optional<sweep::Variable> swept, RunConfig& cfg) {
  const json empty = json::object();
  Section s(doc.contains("protocol") ? doc.at("protocol") : empty, "protocol", {"max_tx", "a"});
  auto& proto = cfg.scenario.protocol;
  auto& out = cfg.resolved["protocol"];

  if (s.has("max_tx") && s.raw("max_tx").is_string()) {
    if (s.string("max_tx") != "unbounded") throw ConfigError(s.field("max_tx"), "must be an integer >= 1 or \"unbounded\"");
    proto.max_tx = MaxTx::unbounded();
    out["max_tx"] = "unbounded";
  } else if (s.has("max_tx")) {
    proto.max_tx = MaxTx::bounded(s.integer("max_tx", 1));
    out["max_tx"] = proto.max_tx.count();
  } else if (swept != sweep::Variable::max_tx) {
    proto.max_tx = MaxTx::unbounded();
    out["max_tx"] = "unbounded";
  }

  if (s.has("a") && s.raw("a").is_string()) {
    const std::string mode = s.string("a");
    if (mode == "linear") {
      proto.a = 0.0;
    } else if (mode == "one_minus_p") {
      proto.couple_a_to_p = true;
    } else {
      throw ConfigError(s.field("a"), "must be a number, \"linear\" or \"one_minus_p\"");
    }
    out["a"] = mode;
  } else {
    proto.a = s.number_or("a", 0.0);
    if (proto.a == 0.0) {
      out["a"] = "linear";
    } else {
      out["a"] = proto.a;
    }
  }
}

void parse_power(const json& doc, RunConfig& cfg) {
  const json empty = json::object();
  Section s(doc.contains("power") ? doc.at("power") : empty, "power", {"p_sense_w", "p_tx_w", "p_rx_w"});
  auto& pw = cfg.scenario.power;
  pw.p_sense_w = s.has("p_sense_w") ? s.positive("p_sense_w") : 1.0;
  pw.p_tx_w = s.has("p_tx_w") ? s.positive("p_tx_w") : 1.0;
  pw.p_rx_w = s.has("p_rx_w") ? s.positive("p_rx_w") : 1.0;
  cfg.resolved["power"] = {{"p_sense_w", pw.p_sense_w}, {"p_tx_w", pw.p_tx_w}, {"p_rx_w", pw.p_rx_w}};
}

void parse_simulation(const json& doc, RunConfig& cfg) {
  if (!doc.contains("simulation")) return;
  Section s(doc.at("simulation"), "simulation",
            {"seed", "n_packets", "sim_duration_s", "replication_count", "time_step_s", "n_sinusoids", "workers", "p"});
  auto& sim = cfg.sim;
  json out = json::object();
  if (s.has("seed")) {
    sim.seed = s.integer("seed", 0);
    cfg.sim_seed_given = true;
    out["seed"] = sim.seed;
  }
  if (s.has("n_packets")) sim.n_packets = s.integer("n_packets", 1);
  if (s.has("sim_duration_s")) sim.sim_duration_s = s.positive("sim_duration_s");
  if (s.has("replication_count")) sim.replication_count = s.integer("replication_count", 2);
  if (s.has("time_step_s")) sim.time_step_s = s.positive("time_step_s");
  if (s.has("n_sinusoids")) {
    const auto n = s.integer("n_sinusoids", 32);
    if (n > 65536) throw ConfigError(s.field("n_sinusoids"), "must be <= 65536");
    sim.n_sinusoids = static_cast<int>(n);
  }
  if (s.has("workers")) sim.workers = static_cast<unsigned>(s.integer("workers", 0));
  if (s.has("p")) {
    const double p = s.non_negative("p");
    if (!(p < 1.0)) throw ConfigError(s.field("p"), "must be < 1");
    cfg.sim_p = p;
    out["p"] = p;
  }
  out["n_packets"] = sim.n_packets;
  if (sim.sim_duration_s > 0.0) out["sim_duration_s"] = sim.sim_duration_s;
  out["replication_count"] = sim.replication_count;
  if (sim.time_step_s > 0.0) out["time_step_s"] = sim.time_step_s;
  out["n_sinusoids"] = sim.n_sinusoids;
  cfg.resolved["simulation"] = out;
}

std::vector<double> parse_grid(const Section& s) {
  if (!s.has("grid")) throw ConfigError(s.field("grid"), "is required");
  const json& g = s.raw("grid");
  std::vector<double> grid;
  if (g.is_array()) {
    for (const auto& v : g) {
      if (!v.is_number()) throw ConfigError(s.field("grid"), "entries must be numbers");
      grid.push_back(v.get<double>());
    }
  } else if (g.is_object()) {
    Section lin(g, s.field("grid"), {"start", "stop", "points"});
    const double start = lin.number("start");
    const double stop = lin.number("stop");
    const auto points = lin.integer("points", 2);
    for (std::uint64_t i = 0; i < points; ++i) {
      grid.push_back(i + 1 == points ? stop : start + (stop - start) * static_cast<double>(i) / (points - 1));
    }
  } else {
    throw ConfigError(s.field("grid"), "must be an array or {start, stop, points}");
  }
  return grid;
}

template <typename Parse>
auto parse_enum(const Section& s, const std::string& key, Parse parse) {
  try {
    return parse(s.string(key));
  } catch (const DomainError& e) {
    throw ConfigError(s.field(key), e.what());
  }
}

void parse_sweep(const json& doc, RunConfig& cfg) {
  Section s(doc.at("sweep"), "sweep", {"variable", "grid", "outputs", "workers"});
  sweep::SweepSpec spec;
  spec.variable = parse_enum(s, "variable", sweep::parse_variable);
  spec.grid = parse_grid(s);
  if (s.has("outputs")) {
    spec.outputs.clear();
    const json& outs = s.raw("outputs");
    if (!outs.is_array() || outs.empty()) throw ConfigError(s.field("outputs"), "must be a non-empty array");
    for (const auto& o : outs) {
      if (!o.is_string()) throw ConfigError(s.field("outputs"), "entries must be strings");
      try {
        spec.outputs.push_back(sweep::parse_output(o.get<std::string>()));
      } catch (const DomainError& e) {
        throw ConfigError(s.field("outputs"), e.what());
      }
    }
  }
  if (s.has("workers")) spec.workers = static_cast<unsigned>(s.integer("workers", 0));
  spec.fixed = cfg.scenario;
  try {
    // Validate the swept variable by substituting the first grid value.
    if (spec.grid.empty()) throw DomainError("sweep grid needs at least two points");
    spec.fixed = sweep::with_variable(cfg.scenario, spec.variable, spec.grid.front());
    spec.validate();
  } catch (const DomainError& e) {
    throw ConfigError("sweep.grid", e.what());
  }
  spec.fixed = cfg.scenario;
  json outputs = json::array();
  for (auto o : spec.outputs) outputs.push_back(std::string(sweep::to_string(o)));
  cfg.resolved["sweep"] = {{"variable", std::string(sweep::to_string(spec.variable))},
                           {"grid", spec.grid},
                           {"outputs", outputs}};
  cfg.sweep = std::move(spec);
}

void parse_minimize(const json& doc, RunConfig& cfg) {
  Section s(doc.at("minimize"), "minimize", {"objective", "variable", "bracket", "grid_points", "x_tolerance", "workers"});
  RunConfig::Minimize m;
  if (s.has("objective")) m.objective = parse_enum(s, "objective", sweep::parse_objective);
  m.variable = parse_enum(s, "variable", sweep::parse_variable);
  if (!s.has("bracket")) throw ConfigError(s.field("bracket"), "is required");
  const json& b = s.raw("bracket");
  if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) {
    throw ConfigError(s.field("bracket"), "must be [lo, hi]");
  }
  m.lo = b[0].get<double>();
  m.hi = b[1].get<double>();
  if (!(std::isfinite(m.lo) && std::isfinite(m.hi) && m.lo < m.hi)) {
    throw ConfigError(s.field("bracket"), "must be finite with lo < hi");
  }
  if (s.has("grid_points")) m.options.grid_points = static_cast<int>(s.integer("grid_points", 3));
  if (s.has("x_tolerance")) m.options.x_tolerance = s.positive("x_tolerance");
  if (s.has("workers")) m.options.workers = static_cast<unsigned>(s.integer("workers", 0));
  cfg.resolved["minimize"] = {{"objective", std::string(sweep::to_string(m.objective))},
                              {"variable", std::string(sweep::to_string(m.variable))},
                              {"bracket", {m.lo, m.hi}},
                              {"grid_points", m.options.grid_points},
                              {"x_tolerance", m.options.x_tolerance}};
  try {
    const double probe = sweep::is_integer_variable(m.variable) ? std::max(1.0, std::ceil(m.lo)) : m.lo;
    sweep::with_variable(cfg.scenario, m.variable, probe).validate();
  } catch (const DomainError& e) {
    throw ConfigError("minimize", e.what());
  }
  cfg.minimize = m;
}

std::optional<sweep::Variable> swept_variable(const json& doc, Command command) {
  const char* key = command == Command::sweep ? "sweep" : command == Command::minimize ? "minimize" : nullptr;
  if (!key || !doc.contains(key) || !doc.at(key).is_object() || !doc.at(key).contains("variable")) return std::nullopt;
  const json& v = doc.at(key).at("variable");
  if (!v.is_string()) return std::nullopt;
  try {
    return sweep::parse_variable(v.get<std::string>());
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

RunConfig parse_for(const json& doc, Command command) {
  if (!doc.is_object()) throw ConfigError("config", "top level must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    static const std::set<std::string> sections{"link", "protocol", "power", "simulation", "sweep", "minimize"};
    if (!sections.count(key)) throw ConfigError(key, "unknown section");
  }
  const auto swept = swept_variable(doc, command);
  RunConfig cfg;
  cfg.resolved = json::object();
  parse_link(doc, swept, cfg);
  parse_protocol(doc, swept, cfg);
  parse_power(doc, cfg);
  parse_simulation(doc, cfg);
  if (command == Command::sweep) {
    if (!doc.contains("sweep")) throw ConfigError("sweep", "section is required for the sweep command");
    parse_sweep(doc, cfg);
  }
  if (command == Command::minimize) {
    if (!doc.contains("minimize")) throw ConfigError("minimize", "section is required for the minimize command");
    parse_minimize(doc, cfg);
  }
  if (!swept) {
    try {
      cfg.scenario.validate();
    } catch (const DomainError& e) {
      throw ConfigError("config", e.what());
    }
  }
  return cfg;
}

// ------------------------------------------------------------------ output

std::string metric_text(const Metric& m) { return m.is_divergent() ? "divergent" : format_double(m.value()); }

json metric_json(const Metric& m) { return m.is_divergent() ? json("divergent") : json(m.value()); }

json double_json(double v) { return std::isfinite(v) ? json(v) : json("divergent"); }

std::string double_text(double v) { return std::isfinite(v) ? format_double(v) : "divergent"; }

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Options {
  std::string command;
  std::string config_path;
  std::string out_path;
  std::string format;
  std::optional<std::uint64_t> seed;
  std::string oracle = "packet";
  std::optional<double> p;
  bool normalize = false;
};

json manifest(const Options& opt, const RunConfig& cfg, std::optional<std::uint64_t> seed) {
  json m = {{"command", opt.command},
            {"config_path", opt.config_path},
            {"output_path", opt.out_path},
            {"format", opt.format},
            {"tool_version", kToolVersion},
            {"config", cfg.resolved}};
  m["seed"] = seed ? json(*seed) : json(nullptr);
  if (opt.command == "simulate") m["oracle"] = opt.oracle;
  if (opt.p) m["p"] = *opt.p;
  if (opt.normalize) m["normalize"] = true;
  return m;
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void write_csv(std::ostream& os) const {
    write_line(os, header_);
    for (const auto& r : rows_) write_line(os, r);
  }

 private:
  static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (!quote) {
        os << cells[i];
        continue;
      }
      os << '"';
      for (char c : cells[i]) os << (c == '"' ? std::string("\"\"") : std::string(1, c));
      os << '"';
    }
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string join_notes(const std::vector<std::string>& notes) {
  std::string s;
  for (const auto& n : notes) s += (s.empty() ? "" : "; ") + n;
  return s;
}

json report_json(const MetricsReport& r) {
  return {{"gamma_th", r.gamma_th},          {"a", r.a},
          {"p", r.p},                        {"avg_aoi", metric_json(r.avg_aoi)},
          {"avg_paoi", metric_json(r.avg_paoi)}, {"ee", r.ee},
          {"eta", metric_json(r.eta)},       {"eta_p", metric_json(r.eta_p)},
          {"divergent", r.any_divergent()},  {"regime_notes", r.regime_notes}};
}

struct Emitted {
  std::string body;
};

Emitted cmd_metrics(const Options& opt, const RunConfig& cfg) {
  const MetricsReport r = sweep::evaluate(cfg.scenario);
  std::ostringstream os;
  if (opt.format == "csv") {
    Table t({"gamma_th", "a", "p", "avg_aoi", "avg_paoi", "ee", "eta", "eta_p", "divergent", "regime_notes"});
    t.add({format_double(r.gamma_th), format_double(r.a), format_double(r.p), metric_text(r.avg_aoi),
           metric_text(r.avg_paoi), format_double(r.ee), metric_text(r.eta), metric_text(r.eta_p),
           r.any_divergent() ? "true" : "false", join_notes(r.regime_notes)});
    t.write_csv(os);
  } else {
    os << json{{"manifest", manifest(opt, cfg, std::nullopt)}, {"metrics", report_json(r)}}.dump(2) << '\n';
  }
  return {os.str()};
}

struct SimRow {
  std::string quantity;
  sim::SimResult result;
  double closed_form;
};

Emitted cmd_simulate(const Options& opt, RunConfig& cfg) {
  std::uint64_t seed;
  if (opt.seed) {
    seed = *opt.seed;
  } else if (cfg.sim_seed_given) {
    seed = cfg.sim.seed;
  } else {
    std::random_device rd;
    seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  }
  cfg.sim.seed = seed;
  cfg.resolved["simulation"]["seed"] = seed;

  std::vector<SimRow> rows;
  const auto& link = cfg.scenario.link;
  if (opt.oracle == "packet") {
    double p;
    if (opt.p) {
      p = *opt.p;
    } else if (cfg.sim_p) {
      p = *cfg.sim_p;
    } else {
      p = pep::pep(cfg.scenario.fading(), {link.t_packet_s}, channel::RateThreshold(link.rate_bps_hz).gamma_th());
    }
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("p", "must lie in [0, 1)");
    const double a = cfg.scenario.protocol.couple_a_to_p ? 1.0 - p : cfg.scenario.protocol.a;
    const AoiParams params{a, link.t_packet_s, cfg.scenario.protocol.max_tx};
    try {
      cfg.sim.validate_packet();
    } catch (const DomainError& e) {
      throw ConfigError("simulation", e.what());
    }
    const auto out = sim::simulate_packet_process(p, params, cfg.sim);
    rows.push_back({"avg_aoi", out.avg_aoi, avg_aoi(p, params).value_or_inf()});
    rows.push_back({"avg_paoi", out.avg_paoi, avg_paoi(p, params).value_or_inf()});
    rows.push_back({"mean_y", out.mean_y, exp_y(p)});
    rows.push_back({"mean_z", out.mean_z, exp_z(p, params.max_tx)});
    rows.push_back({"mean_x", out.mean_x, exp_y(p)});
  } else {
    const auto fp = cfg.scenario.fading();
    const pep::PacketParams pp{link.t_packet_s};
    const double th = channel::RateThreshold(link.rate_bps_hz).gamma_th();
    try {
      cfg.sim.validate_channel(fp.doppler_hz);
    } catch (const DomainError& e) {
      throw ConfigError("simulation", e.what());
    }
    const auto out = sim::simulate_fading_process(fp, pp, th, cfg.sim);
    rows.push_back({"cdf", out.cdf, channel::snr_cdf(fp, th)});
    rows.push_back({"lcr", out.lcr, channel::lcr(fp, th)});
    rows.push_back({"pep", out.pep, pep::pep(fp, pp, th)});
  }

  std::ostringstream os;
  if (opt.format == "csv") {
    Table t({"quantity", "estimate", "std_error", "n_samples", "seed", "divergence_detected", "closed_form"});
    for (const auto& r : rows) {
      t.add({r.quantity, double_text(r.result.estimate), double_text(r.result.std_error),
             std::to_string(r.result.n_samples), std::to_string(r.result.seed),
             r.result.divergence_detected ? "true" : "false", double_text(r.closed_form)});
    }
    t.write_csv(os);
  } else {
    json results = json::array();
    for (const auto& r : rows) {
      results.push_back({{"quantity", r.quantity},
                         {"estimate", double_json(r.result.estimate)},
                         {"std_error", double_json(r.result.std_error)},
                         {"n_samples", r.result.n_samples},
                         {"seed", r.result.seed},
                         {"divergence_detected", r.result.divergence_detected},
                         {"closed_form", double_json(r.closed_form)}});
    }
    os << json{{"manifest", manifest(opt, cfg, seed)}, {"results", results}}.dump(2) << '\n';
  }
  return {os.str()};
}

double output_value(const MetricsReport& r, sweep::Output o) {
  switch (o) {
    case sweep::Output::p: return r.p;
    case sweep::Output::avg_aoi: return r.avg_aoi.value_or_inf();
    case sweep::Output::avg_paoi: return r.avg_paoi.value_or_inf();
    case sweep::Output::ee: return r.ee;
    case sweep::Output::eta: return r.eta.value_or_inf();
    case sweep::Output::eta_p: return r.eta_p.value_or_inf();
  }
  return 0.0;
}

Emitted cmd_sweep(const Options& opt, const RunConfig& cfg) {
  const auto& spec = *cfg.sweep;
  const auto rows = sweep::run_sweep(spec);

  double min_eta = std::numeric_limits<double>::infinity();
  double min_eta_p = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    min_eta = std::min(min_eta, r.report.eta.value_or_inf());
    min_eta_p = std::min(min_eta_p, r.report.eta_p.value_or_inf());
  }
  auto normalized = [](double v, double m) { return std::isfinite(v) && std::isfinite(m) ? v / m : v; };

  const std::string var(sweep::to_string(spec.variable));
  std::ostringstream os;
  if (opt.format == "csv") {
    std::vector<std::string> header{var};
    for (auto o : spec.outputs) header.emplace_back(sweep::to_string(o));
    header.emplace_back("divergent");
    if (opt.normalize) {
      header.emplace_back("eta_norm");
      header.emplace_back("eta_p_norm");
    }
    Table t(header);
    for (const auto& r : rows) {
      std::vector<std::string> cells{format_double(r.value)};
      for (auto o : spec.outputs) cells.push_back(double_text(output_value(r.report, o)));
      cells.emplace_back(r.report.any_divergent() ? "true" : "false");
      if (opt.normalize) {
        cells.push_back(double_text(normalized(r.report.eta.value_or_inf(), min_eta)));
        cells.push_back(double_text(normalized(r.report.eta_p.value_or_inf(), min_eta_p)));
      }
      t.add(std::move(cells));
    }
    t.write_csv(os);
  } else {
    json out = json::array();
    for (const auto& r : rows) {
      json row = {{var, r.value}};
      for (auto o : spec.outputs) row[std::string(sweep::to_string(o))] = double_json(output_value(r.report, o));
      row["divergent"] = r.report.any_divergent();
      if (opt.normalize) {
        row["eta_norm"] = double_json(normalized(r.report.eta.value_or_inf(), min_eta));
        row["eta_p_norm"] = double_json(normalized(r.report.eta_p.value_or_inf(), min_eta_p));
      }
      row["regime_notes"] = r.report.regime_notes;
      out.push_back(row);
    }
    os << json{{"manifest", manifest(opt, cfg, std::nullopt)}, {"rows", out}}.dump(2) << '\n';
  }
  return {os.str()};
}

Emitted cmd_minimize(const Options& opt, const RunConfig& cfg) {
  const auto& m = *cfg.minimize;
  const auto r = sweep::minimize_eta(m.objective, m.variable, m.lo, m.hi, cfg.scenario, m.options);
  std::ostringstream os;
  if (opt.format == "csv") {
    Table t({"objective", "variable", "argmin", "min_value", "lo", "hi", "evaluations"});
    t.add({std::string(sweep::to_string(m.objective)), std::string(sweep::to_string(m.variable)),
           format_double(r.argmin), format_double(r.min_value), format_double(r.lo), format_double(r.hi),
           std::to_string(r.evaluations)});
    t.write_csv(os);
  } else {
    const json result = {{"objective", std::string(sweep::to_string(m.objective))},
                         {"variable", std::string(sweep::to_string(m.variable))},
                         {"argmin", r.argmin},
                         {"min_value", r.min_value},
                         {"bracket", {r.lo, r.hi}},
                         {"evaluations", r.evaluations}};
    os << json{{"manifest", manifest(opt, cfg, std::nullopt)}, {"result", result}}.dump(2) << '\n';
  }
  return {os.str()};
}

void emit_error(std::ostream& err, const std::string& kind, const std::string& field, const std::string& message) {
  json e = {{"error", kind}, {"message", message}};
  if (!field.empty()) e["field"] = field;
  err << e.dump() << '\n';
}

}  // namespace

RunConfig parse_config(const nlohmann::json& doc) { return parse_for(doc, Command::metrics); }

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Non-linear age-of-information metrics, simulation and optimization", "aoi_cli"};
  app.require_subcommand(1);
  auto add_common = [&](CLI::App* sub, const std::string& default_format) {
    sub->add_option("--config", opt.config_path, "JSON configuration file")->required();
    sub->add_option("--out", opt.out_path, "Output file (stdout when omitted)");
    sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->callback([&, sub, default_format] {
      opt.command = sub->get_name();
      if (opt.format.empty()) opt.format = default_format;
    });
  };
  auto* metrics = app.add_subcommand("metrics", "Evaluate p, AoI, PAoI, EE and eta for one configuration");
  add_common(metrics, "json");
  auto* simulate = app.add_subcommand("simulate", "Run a Monte-Carlo oracle");
  add_common(simulate, "csv");
  simulate->add_option("--seed", opt.seed, "Master RNG seed");
  simulate->add_option("--oracle", opt.oracle, "packet or channel")->check(CLI::IsMember({"packet", "channel"}));
  simulate->add_option("--p", opt.p, "Packet error probability for the packet oracle (skips the channel model)");
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate metrics over a 1-D grid");
  add_common(sweep_cmd, "csv");
  sweep_cmd->add_flag("--normalize", opt.normalize, "Also emit eta/min(eta) and eta_p/min(eta_p)");
  auto* minimize = app.add_subcommand("minimize", "Minimize eta or eta_p over one variable");
  add_common(minimize, "json");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "usage", "", e.what());
    return kExitConfig;
  }

  try {
    std::ifstream in(opt.config_path);
    if (!in) throw ConfigError("--config", "cannot open '" + opt.config_path + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
    const Command command = opt.command == "metrics"    ? Command::metrics
                            : opt.command == "simulate" ? Command::simulate
                            : opt.command == "sweep"    ? Command::sweep
                                                        : Command::minimize;
    RunConfig cfg = parse_for(doc, command);
    if (opt.p && !(*opt.p >= 0.0 && *opt.p < 1.0)) throw ConfigError("--p", "must lie in [0, 1)");

    Emitted emitted;
    std::optional<std::uint64_t> seed;
    switch (command) {
      case Command::metrics: emitted = cmd_metrics(opt, cfg); break;
      case Command::simulate:
        emitted = cmd_simulate(opt, cfg);
        seed = cfg.sim.seed;
        break;
      case Command::sweep: emitted = cmd_sweep(opt, cfg); break;
      case Command::minimize: emitted = cmd_minimize(opt, cfg); break;
    }

    if (opt.out_path.empty()) {
      out << emitted.body;
    } else {
      std::ofstream file(opt.out_path, std::ios::binary);
      if (!file) throw std::runtime_error("cannot write '" + opt.out_path + "'");
      file << emitted.body;
      json side = manifest(opt, cfg, seed);
      side["timestamp"] = timestamp_utc();
      std::ofstream sidecar(opt.out_path + ".manifest.json", std::ios::binary);
      sidecar << side.dump(2) << '\n';
      if (!file || !sidecar) throw std::runtime_error("failed writing output files");
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    emit_error(err, "config", e.field(), e.message());
    return kExitConfig;
  } catch (const std::exception& e) {
    emit_error(err, "runtime", "", e.what());
    return kExitRuntime;
  }
}

}  // namespace aoi::cli

#include "spikekit/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace spikekit {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_real(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error("failed to format real value");
  return std::string(buf, end);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': bad value '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" +
                    value + "'");
}

}  // namespace

TbtmConfig PipelineConfig::tbtm_config() const {
  TbtmConfig t;
  t.t_prime = tbtm_t_prime;
  t.delta = tbtm_delta;
  t.c_mid = tbtm_c_mid;
  t.c_b = tbtm_c_b;
  t.channels = channels;
  t.se_reduction = tbtm_se_reduction;
  t.slope = slope;
  return t;
}

EsaConfig PipelineConfig::esa_config() const {
  EsaConfig e;
  e.window = esa_window;
  e.merge = esa_merge;
  e.range_lo = esa_range_lo;
  e.range_hi = esa_range_hi;
  e.channels = channels;
  e.entropy_mode = esa_entropy_mode;
  e.entropy_reduce = esa_entropy_reduce;
  e.slope = slope;
  return e;
}

PipelineConfig parse_config(std::istream& source) {
  PipelineConfig cfg;
  const std::map<std::string, std::function<void(const std::string&, const std::string&)>>
      setters = {
          {"sensor.theta", [&](const std::string& k, const std::string& v) {
             cfg.sensor.theta = parse_number<double>(k, v); }},
          {"sensor.lambda", [&](const std::string& k, const std::string& v) {
             cfg.sensor.lambda = parse_number<double>(k, v); }},
          {"sensor.dt_us", [&](const std::string& k, const std::string& v) {
             cfg.sensor.dt_us = parse_number<double>(k, v); }},
          {"sensor.reset", [&](const std::string& k, const std::string& v) {
             if (v == "residual") cfg.sensor.reset = ResetMode::Residual;
             else if (v == "zero") cfg.sensor.reset = ResetMode::Zero;
             else throw ConfigError("config key '" + k + "': expected residual or zero");
           }},
          {"noise.enabled", [&](const std::string& k, const std::string& v) {
             cfg.sensor.noise.enabled = parse_bool(k, v); }},
          {"noise.shot_std", [&](const std::string& k, const std::string& v) {
             cfg.sensor.noise.shot_std = parse_number<double>(k, v); }},
          {"noise.dark_rate", [&](const std::string& k, const std::string& v) {
             cfg.sensor.noise.dark_rate = parse_number<double>(k, v); }},
          {"noise.seed", [&](const std::string& k, const std::string& v) {
             cfg.sensor.noise.seed = parse_number<uint64_t>(k, v); }},
          {"sim.hold_steps", [&](const std::string& k, const std::string& v) {
             cfg.hold_steps = parse_number<int64_t>(k, v); }},
          {"model.channels", [&](const std::string& k, const std::string& v) {
             cfg.channels = parse_number<int64_t>(k, v); }},
          {"model.lrelu_slope", [&](const std::string& k, const std::string& v) {
             cfg.slope = parse_number<double>(k, v); }},
          {"tbtm.t_prime", [&](const std::string& k, const std::string& v) {
             cfg.tbtm_t_prime = parse_number<int64_t>(k, v); }},
          {"tbtm.delta", [&](const std::string& k, const std::string& v) {
             cfg.tbtm_delta = parse_number<int64_t>(k, v); }},
          {"tbtm.stride", [&](const std::string& k, const std::string& v) {
             cfg.tbtm_stride = parse_number<int64_t>(k, v); }},
          {"tbtm.c_mid", [&](const std::string& k, const std::string& v) {
             cfg.tbtm_c_mid = parse_number<int64_t>(k, v); }},
          {"tbtm.c_b", [&](const std::string& k, const std::string& v) {
             cfg.tbtm_c_b = parse_number<int64_t>(k, v); }},
          {"tbtm.se_reduction", [&](const std::string& k, const std::string& v) {
             cfg.tbtm_se_reduction = parse_number<int64_t>(k, v); }},
          {"ffm.normalize", [&](const std::string& k, const std::string& v) {
             cfg.ffm_normalize = parse_bool(k, v); }},
          {"esa.window", [&](const std::string& k, const std::string& v) {
             cfg.esa_window = parse_number<int64_t>(k, v); }},
          {"esa.merge", [&](const std::string& k, const std::string& v) {
             cfg.esa_merge = parse_number<int64_t>(k, v); }},
          {"esa.range_lo", [&](const std::string& k, const std::string& v) {
             cfg.esa_range_lo = parse_number<double>(k, v); }},
          {"esa.range_hi", [&](const std::string& k, const std::string& v) {
             cfg.esa_range_hi = parse_number<double>(k, v); }},
          {"esa.entropy_mode", [&](const std::string& k, const std::string& v) {
             if (v == "per_channel") cfg.esa_entropy_mode = EntropyMode::PerChannel;
             else if (v == "mean_first") cfg.esa_entropy_mode = EntropyMode::MeanFirst;
             else throw ConfigError("config key '" + k +
                                    "': expected per_channel or mean_first");
           }},
          {"esa.entropy_reduce", [&](const std::string& k, const std::string& v) {
             cfg.esa_entropy_reduce = parse_bool(k, v); }},
          {"imap.mode", [&](const std::string& k, const std::string& v) {
             if (v == "tfp") cfg.imap_mode = ImapMode::Tfp;
             else if (v == "tfi") cfg.imap_mode = ImapMode::Tfi;
             else throw ConfigError("config key '" + k + "': expected tfp or tfi");
           }},
          {"seed", [&](const std::string& k, const std::string& v) {
             cfg.seed = parse_number<uint64_t>(k, v); }},
          {"threads", [&](const std::string& k, const std::string& v) {
             cfg.threads = parse_number<int64_t>(k, v); }},
      };

  std::string line;
  int64_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key=value, got '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
    it->second(key, value);
  }
  return cfg;
}

PipelineConfig parse_config_string(const std::string& text) {
  std::istringstream ss(text);
  return parse_config(ss);
}

PipelineConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  return parse_config(in);
}

std::string serialize_config(const PipelineConfig& cfg) {
  std::ostringstream out;
  out << "# sensor model\n";
  out << "sensor.theta = " << fmt_real(cfg.sensor.theta) << "\n";
  out << "sensor.lambda = " << fmt_real(cfg.sensor.lambda) << "\n";
  out << "sensor.dt_us = " << fmt_real(cfg.sensor.dt_us) << "\n";
  out << "sensor.reset = "
      << (cfg.sensor.reset == ResetMode::Residual ? "residual" : "zero") << "\n";
  out << "noise.enabled = " << (cfg.sensor.noise.enabled ? "true" : "false") << "\n";
  out << "noise.shot_std = " << fmt_real(cfg.sensor.noise.shot_std) << "\n";
  out << "noise.dark_rate = " << fmt_real(cfg.sensor.noise.dark_rate) << "\n";
  out << "noise.seed = " << cfg.sensor.noise.seed << "\n";
  out << "sim.hold_steps = " << cfg.hold_steps << "\n";
  out << "# shared model dimensions\n";
  out << "model.channels = " << cfg.channels << "\n";
  out << "model.lrelu_slope = " << fmt_real(cfg.slope) << "\n";
  out << "# temporal texture branch\n";
  out << "tbtm.t_prime = " << cfg.tbtm_t_prime << "\n";
  out << "tbtm.delta = " << cfg.tbtm_delta << "\n";
  out << "tbtm.stride = " << cfg.tbtm_stride << "\n";
  out << "tbtm.c_mid = " << cfg.tbtm_c_mid << "\n";
  out << "tbtm.c_b = " << cfg.tbtm_c_b << "\n";
  out << "tbtm.se_reduction = " << cfg.tbtm_se_reduction << "\n";
  out << "ffm.normalize = " << (cfg.ffm_normalize ? "true" : "false") << "\n";
  out << "# entropy selective attention branch\n";
  out << "esa.window = " << cfg.esa_window << "\n";
  out << "esa.merge = " << cfg.esa_merge << "\n";
  out << "esa.range_lo = " << fmt_real(cfg.esa_range_lo) << "\n";
  out << "esa.range_hi = " << fmt_real(cfg.esa_range_hi) << "\n";
  out << "esa.entropy_mode = "
      << (cfg.esa_entropy_mode == EntropyMode::PerChannel ? "per_channel"
                                                          : "mean_first")
      << "\n";
  out << "esa.entropy_reduce = " << (cfg.esa_entropy_reduce ? "true" : "false")
      << "\n";
  out << "imap.mode = " << (cfg.imap_mode == ImapMode::Tfp ? "tfp" : "tfi") << "\n";
  out << "# run control\n";
  out << "seed = " << cfg.seed << "\n";
  out << "threads = " << cfg.threads << "\n";
  return out.str();
}

void save_config_file(const PipelineConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << serialize_config(cfg);
  if (!out) throw IoError("config write to " + path + " failed");
}

}  // namespace spikekit

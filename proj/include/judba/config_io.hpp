#pragma once

// Key-value configuration files.
//
//   # comment
//   bandwidth_hz = 1e7
//   alpha = 0.5
//   profile_csv = compression_profile.csv (relative to the config file)
//   compression_profile = 1:83:2798250, 4:77:619180
//
// Keys are the SystemConfig and ScenarioSpec field names. Unknown keys,
// malformed numbers and out-of-range values are all reported through
// ConfigInvalid.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "judba/harness.hpp"
#include "judba/model.hpp"

namespace judba {

struct RunConfig {
  SystemConfig system;
  ScenarioSpec scenario;
  CompressionProfile profile = CompressionProfile::builtin();

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

template <typename Int>
bool parse_uint(std::string_view s, Int& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

inline std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Field {
  std::function<bool(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Member>
Field real_field(Member member) {
  return {[member](RunConfig& c, std::string_view v) { return parse_double(v, std::invoke(member, c)); },
          [member](const RunConfig& c) { return format_g17(std::invoke(member, c)); }};
}

template <typename Member>
Field uint_field(Member member) {
  return {[member](RunConfig& c, std::string_view v) { return parse_uint(v, std::invoke(member, c)); },
          [member](const RunConfig& c) { return std::to_string(std::invoke(member, c)); }};
}

// Ordered so serialize() output is stable.
inline const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    auto sys = [](auto ptr) { return [ptr](auto& c) -> auto& { return c.system.*ptr; }; };
    auto scn = [](auto get) { return get; };
    t.emplace_back("bandwidth_hz", real_field(sys(&SystemConfig::bandwidth_hz)));
    t.emplace_back("noise_w", real_field(sys(&SystemConfig::noise_w)));
    t.emplace_back("idle_power_w", real_field(sys(&SystemConfig::idle_power_w)));
    t.emplace_back("alpha", real_field(sys(&SystemConfig::alpha)));
    t.emplace_back("compression_ratio", real_field(sys(&SystemConfig::compression_ratio)));
    t.emplace_back("cycles_per_image", real_field(sys(&SystemConfig::cycles_per_image)));
    t.emplace_back("kappa", real_field(sys(&SystemConfig::kappa)));
    t.emplace_back("edge_freq_hz", real_field(sys(&SystemConfig::edge_freq_hz)));
    t.emplace_back("train_cycles_per_sample", real_field(sys(&SystemConfig::train_cycles_per_sample)));
    t.emplace_back("finetune_cycles_per_sample", real_field(sys(&SystemConfig::finetune_cycles_per_sample)));
    t.emplace_back("inference_cycles_per_sample", real_field(sys(&SystemConfig::inference_cycles_per_sample)));
    t.emplace_back("bs_tx_power_w", real_field(sys(&SystemConfig::bs_tx_power_w)));
    t.emplace_back("bits_per_parameter", uint_field(sys(&SystemConfig::bits_per_parameter)));
    t.emplace_back("exhaustive_threshold", uint_field(sys(&SystemConfig::exhaustive_threshold)));
    t.emplace_back("bisect_tol", real_field(sys(&SystemConfig::bisect_tol)));
    t.emplace_back("bisect_max_iter", uint_field(sys(&SystemConfig::bisect_max_iter)));
    t.emplace_back("common_latent_size",
                   Field{[](RunConfig& c, std::string_view v) {
                           v = trim(v);
                           if (v == "1" || v == "true") c.system.common_latent_size = true;
                           else if (v == "0" || v == "false") c.system.common_latent_size = false;
                           else return false;
                           return true;
                         },
                         [](const RunConfig& c) { return std::string(c.system.common_latent_size ? "true" : "false"); }});
    t.emplace_back("num_devices", uint_field(scn([](auto& c) -> auto& { return c.scenario.num_devices; })));
    t.emplace_back("freq_lo_hz", real_field(scn([](auto& c) -> auto& { return c.scenario.freq_range_hz.lo; })));
    t.emplace_back("freq_hi_hz", real_field(scn([](auto& c) -> auto& { return c.scenario.freq_range_hz.hi; })));
    t.emplace_back("samples_lo", real_field(scn([](auto& c) -> auto& { return c.scenario.samples_range.lo; })));
    t.emplace_back("samples_hi", real_field(scn([](auto& c) -> auto& { return c.scenario.samples_range.hi; })));
    t.emplace_back("pathloss_g0", real_field(scn([](auto& c) -> auto& { return c.scenario.pathloss.g0; })));
    t.emplace_back("pathloss_d0_m", real_field(scn([](auto& c) -> auto& { return c.scenario.pathloss.d0_m; })));
    t.emplace_back("pathloss_exponent",
                   real_field(scn([](auto& c) -> auto& { return c.scenario.pathloss.exponent; })));
    t.emplace_back("distance_lo_m",
                   real_field(scn([](auto& c) -> auto& { return c.scenario.pathloss.distance_m.lo; })));
    t.emplace_back("distance_hi_m",
                   real_field(scn([](auto& c) -> auto& { return c.scenario.pathloss.distance_m.hi; })));
    t.emplace_back("tx_power_w", real_field(scn([](auto& c) -> auto& { return c.scenario.tx_power_w; })));
    t.emplace_back("sample_bits", real_field(scn([](auto& c) -> auto& { return c.scenario.sample_bits; })));
    return t;
  }();
  return table;
}

inline bool parse_profile_row(std::string_view text, CompressionRow& row) {
  const auto parts = split(text, ':');
  if (parts.size() != 3 && parts.size() != 5) return false;
  if (!parse_double(parts[0], row.lambda) || !parse_double(parts[1], row.accuracy_pct) ||
      !parse_double(parts[2], row.model_params))
    return false;
  if (parts.size() == 5)
    return parse_double(parts[3], row.inference_time_s) && parse_double(parts[4], row.training_time_s);
  return true;
}

}  // namespace detail

// CSV with header `lambda,accuracy_pct,model_params`, optionally followed by
// `inference_time_s,training_time_s`.
inline CompressionProfile parse_profile_csv(std::istream& in) {
  std::string line;
  std::vector<CompressionRow> rows;
  bool header = false;
  std::size_t columns = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = detail::split(t, ',');
    if (!header) {
      if (cells.size() < 3 || cells[0] != "lambda" || cells[1] != "accuracy_pct" || cells[2] != "model_params")
        throw ConfigInvalid("profile_csv", "header must start with lambda,accuracy_pct,model_params");
      columns = cells.size();
      header = true;
      continue;
    }
    if (cells.size() != columns) throw ConfigInvalid("profile_csv", "column count on line " + std::to_string(line_no));
    CompressionRow row;
    bool ok = detail::parse_double(cells[0], row.lambda) && detail::parse_double(cells[1], row.accuracy_pct) &&
              detail::parse_double(cells[2], row.model_params);
    if (columns >= 5)
      ok = ok && detail::parse_double(cells[3], row.inference_time_s) &&
           detail::parse_double(cells[4], row.training_time_s);
    if (!ok) throw ConfigInvalid("profile_csv", "malformed number on line " + std::to_string(line_no));
    rows.push_back(row);
  }
  if (!header) throw ConfigInvalid("profile_csv", "missing header");
  return CompressionProfile(std::move(rows));
}

inline std::vector<FieldViolation> run_config_violations(const RunConfig& c) {
  auto out = config_violations(c.system);
  auto scn = scenario_violations(c.scenario);
  out.insert(out.end(), scn.begin(), scn.end());
  if (!c.profile.contains(c.system.compression_ratio))
    out.push_back({"compression_ratio", "must be a ratio listed in the compression profile"});
  return out;
}

inline const RunConfig& validate(const RunConfig& c) {
  auto bad = run_config_violations(c);
  if (!bad.empty()) throw ConfigInvalid(std::move(bad));
  return c;
}

// Parses and validates. base_dir resolves a relative profile_csv.
inline RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {}) {
  RunConfig c;
  std::vector<FieldViolation> bad;
  std::map<std::string, bool> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      bad.push_back({"line " + std::to_string(line_no), "expected key = value"});
      continue;
    }
    const std::string key(detail::trim(t.substr(0, eq)));
    const auto value = detail::trim(t.substr(eq + 1));
    if (seen[key]) {
      bad.push_back({key, "duplicate key"});
      continue;
    }
    seen[key] = true;

    if (key == "profile_csv") {
      std::filesystem::path p{std::string(value)};
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      std::ifstream f(p);
      if (!f) {
        bad.push_back({key, "unreadable file " + p.string()});
        continue;
      }
      try {
        c.profile = parse_profile_csv(f);
      } catch (const ConfigInvalid& e) {
        bad.insert(bad.end(), e.violations().begin(), e.violations().end());
      }
      continue;
    }
    if (key == "compression_profile") {
      std::vector<CompressionRow> rows;
      bool ok = true;
      for (auto part : detail::split(value, ',')) {
        CompressionRow row;
        if (!detail::parse_profile_row(part, row)) {
          ok = false;
          break;
        }
        rows.push_back(row);
      }
      if (!ok) {
        bad.push_back({key, "rows must be lambda:accuracy_pct:model_params"});
        continue;
      }
      try {
        c.profile = CompressionProfile(std::move(rows));
      } catch (const ConfigInvalid& e) {
        bad.insert(bad.end(), e.violations().begin(), e.violations().end());
      }
      continue;
    }

    bool known = false;
    for (const auto& [name, field] : detail::fields()) {
      if (name != key) continue;
      known = true;
      if (!field.set(c, value)) bad.push_back({key, "malformed value '" + std::string(value) + "'"});
      break;
    }
    if (!known) bad.push_back({key, "unknown key"});
  }
  if (!bad.empty()) throw ConfigInvalid(std::move(bad));
  validate(c);
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigInvalid("config", "cannot read " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

// Writes every key, with the profile inline, so parse_config(serialize(c))
// reproduces c exactly.
inline std::string serialize(const RunConfig& c) {
  std::ostringstream os;
  for (const auto& [name, field] : detail::fields()) os << name << " = " << field.get(c) << '\n';
  os << "compression_profile = ";
  const auto& rows = c.profile.rows();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (i) os << ", ";
    os << detail::format_g17(r.lambda) << ':' << detail::format_g17(r.accuracy_pct) << ':'
       << detail::format_g17(r.model_params) << ':' << detail::format_g17(r.inference_time_s) << ':'
       << detail::format_g17(r.training_time_s);
  }
  os << '\n';
  return os.str();
}

}  // namespace judba

#pragma once

// Seeded scenario generation and the experiment sweeps over the number of
// devices, the edge-server frequency and the compression ratio.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "judba/model.hpp"
#include "judba/physics.hpp"
#include "judba/solver.hpp"

namespace judba {

inline constexpr const char* kVersion = "0.1.0";

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

// Log-distance path loss h = g0 (d0 / d)^theta.
struct PathLoss {
  double g0 = 1e-4;
  double d0_m = 1.0;
  double exponent = 3.0;
  Range distance_m{50.0, 300.0};
  friend bool operator==(const PathLoss&, const PathLoss&) = default;
};

struct ScenarioSpec {
  std::size_t num_devices = 30;
  Range freq_range_hz{0.1e9, 1.0e9};
  Range samples_range{50, 200};
  PathLoss pathloss;
  double tx_power_w = 0.3;
  double sample_bits = 800e3;
  std::uint64_t rng_seed = 0;
  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

inline std::vector<FieldViolation> scenario_violations(const ScenarioSpec& s) {
  std::vector<FieldViolation> out;
  if (s.num_devices < 1) out.push_back({"num_devices", ">= 1"});
  if (!(s.freq_range_hz.lo > 0.0 && s.freq_range_hz.lo <= s.freq_range_hz.hi))
    out.push_back({"freq_lo_hz/freq_hi_hz", "0 < lo <= hi"});
  if (!(s.samples_range.lo >= 1.0 && s.samples_range.lo <= s.samples_range.hi))
    out.push_back({"samples_lo/samples_hi", "1 <= lo <= hi"});
  if (!(s.pathloss.g0 > 0.0)) out.push_back({"pathloss_g0", "> 0"});
  if (!(s.pathloss.d0_m > 0.0)) out.push_back({"pathloss_d0_m", "> 0"});
  if (!(s.pathloss.exponent > 0.0)) out.push_back({"pathloss_exponent", "> 0"});
  if (!(s.pathloss.distance_m.lo > 0.0 && s.pathloss.distance_m.lo <= s.pathloss.distance_m.hi))
    out.push_back({"distance_lo_m/distance_hi_m", "0 < lo <= hi"});
  if (!(s.tx_power_w > 0.0)) out.push_back({"tx_power_w", "> 0"});
  if (!(s.sample_bits > 0.0)) out.push_back({"sample_bits", "> 0"});
  return out;
}

namespace detail {

// 53-bit uniform in [0, 1); spelled out so scenarios do not depend on the
// standard library's distribution implementations.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, Range r) { return r.lo + (r.hi - r.lo) * unit_uniform(rng); }

inline std::uint64_t uniform_int(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  const std::uint64_t span = hi - lo + 1;
  return lo + std::min(span - 1, static_cast<std::uint64_t>(unit_uniform(rng) * static_cast<double>(span)));
}

}  // namespace detail

inline std::vector<DeviceProfile> generate_scenario(const ScenarioSpec& spec) {
  auto bad = scenario_violations(spec);
  if (!bad.empty()) throw ConfigInvalid(std::move(bad));
  std::mt19937_64 rng(spec.rng_seed);
  const auto s_lo = static_cast<std::uint64_t>(std::llround(spec.samples_range.lo));
  const auto s_hi = static_cast<std::uint64_t>(std::llround(spec.samples_range.hi));
  std::vector<DeviceProfile> devices(spec.num_devices);
  for (std::size_t i = 0; i < spec.num_devices; ++i) {
    auto& d = devices[i];
    d.id = i;
    d.cpu_freq_hz = detail::uniform(rng, spec.freq_range_hz);
    d.num_samples = detail::uniform_int(rng, s_lo, s_hi);
    const double distance = detail::uniform(rng, spec.pathloss.distance_m);
    d.channel_gain = spec.pathloss.g0 * std::pow(spec.pathloss.d0_m / distance, spec.pathloss.exponent);
    d.tx_power_w = spec.tx_power_w;
    d.sample_bits = spec.sample_bits;
  }
  return devices;
}

// Seed of the random benchmark's coin flips for a given scenario seed.
inline std::uint64_t random_scheme_seed(std::uint64_t scenario_seed) {
  return scenario_seed * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull;
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

enum class Scheme { proposed, fully, random };
enum class Axis { M, F, lambda };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::proposed: return "proposed";
    case Scheme::fully: return "fully";
    case Scheme::random: return "random";
  }
  return "?";
}

inline const char* to_string(Axis a) {
  switch (a) {
    case Axis::M: return "M";
    case Axis::F: return "F";
    case Axis::lambda: return "lambda";
  }
  return "?";
}

inline std::optional<Axis> parse_axis(const std::string& s) {
  if (s == "M") return Axis::M;
  if (s == "F") return Axis::F;
  if (s == "lambda") return Axis::lambda;
  return std::nullopt;
}

inline constexpr Scheme kSchemes[] = {Scheme::proposed, Scheme::fully, Scheme::random};

struct SweepRecord {
  Scheme scheme = Scheme::proposed;
  Axis axis = Axis::M;
  double axis_value = 0.0;
  std::optional<std::uint64_t> seed;  // empty on averaged rows
  double system_cost = 0.0;
  double normalized_cost = 0.0;
  double t_star_s = 0.0;
  double total_energy_j = 0.0;
  double accuracy_pct = 0.0;
  double efficiency = 0.0;
  bool averaged = false;
  // Set once efficiency has been recomputed from normalized_cost.
  bool normalized = false;

  friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

inline double efficiency(double accuracy_pct, double cost) {
  if (!(cost > 0.0)) throw ZeroCost();
  return accuracy_pct / cost;
}

// Scales every cost by the largest one so the maximum maps to 1, and
// recomputes efficiency against the normalized cost.
inline void normalize(std::vector<SweepRecord>& records) {
  if (records.empty()) throw EmptySweep();
  double max_cost = 0.0;
  for (const auto& r : records) max_cost = std::max(max_cost, r.system_cost);
  if (!(max_cost > 0.0)) throw ZeroCost();
  for (auto& r : records) {
    r.normalized_cost = r.system_cost / max_cost;
    r.efficiency = efficiency(r.accuracy_pct, r.normalized_cost);
    r.normalized = true;
  }
}

inline SweepRecord make_record(Scheme scheme, Axis axis, double axis_value, std::optional<std::uint64_t> seed,
                               const Solution& s, double accuracy_pct) {
  SweepRecord r;
  r.scheme = scheme;
  r.axis = axis;
  r.axis_value = axis_value;
  r.seed = seed;
  r.system_cost = s.system_cost;
  r.t_star_s = s.completion_latency_s;
  r.total_energy_j = s.total_energy_j();
  r.accuracy_pct = accuracy_pct;
  r.efficiency = efficiency(accuracy_pct, s.system_cost);
  return r;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

// Worker count from JUDBA_THREADS; 0 or unset means hardware concurrency.
inline unsigned worker_count_from_env() {
  unsigned n = 0;
  if (const char* env = std::getenv("JUDBA_THREADS")) {
    try {
      n = static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      n = 0;
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

// Runs body(i) for i in [0, count) on up to `workers` threads.
template <typename Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct SweepPlan {
  Axis axis = Axis::M;
  // M as a device count, F in GHz, lambda as the ratio itself.
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  ScenarioSpec scenario;   // num_devices and rng_seed are overridden per cell
  unsigned workers = 1;
};

struct CellResult {
  std::vector<DeviceProfile> devices;
  Solution proposed;
  Solution fully;
  Solution random;
};

inline SystemConfig config_for_axis(SystemConfig config, Axis axis, double value) {
  if (axis == Axis::F) config.edge_freq_hz = value * 1e9;
  if (axis == Axis::lambda) config.compression_ratio = value;
  return config;
}

inline ScenarioSpec scenario_for_axis(ScenarioSpec spec, Axis axis, double value, std::uint64_t seed) {
  if (axis == Axis::M) {
    if (!(value >= 1.0) || value != std::floor(value))
      throw ConfigInvalid("values", "device counts must be positive integers");
    spec.num_devices = static_cast<std::size_t>(value);
  }
  spec.rng_seed = seed;
  return spec;
}

inline CellResult run_cell(const SystemConfig& config, const CompressionProfile& profile, const ScenarioSpec& spec) {
  CellResult r;
  r.devices = generate_scenario(spec);
  r.proposed = solve_judba(r.devices, config, profile);
  r.fully = benchmark_fully_uploading(r.devices, config, profile);
  r.random = benchmark_randomly_uploading(r.devices, config, profile, random_scheme_seed(spec.rng_seed));
  return r;
}

// Per-seed rows first, ordered by (value, seed, scheme), then one averaged
// row per (value, scheme). Each block is normalized by its own maximum.
inline std::vector<SweepRecord> sweep(const SystemConfig& config, const CompressionProfile& profile,
                                      const SweepPlan& plan) {
  if (plan.values.empty() || plan.seeds.empty()) throw EmptySweep();
  validate_config(config);
  const std::size_t nv = plan.values.size();
  const std::size_t ns = plan.seeds.size();

  std::vector<SystemConfig> configs;
  std::vector<double> accuracy;
  for (double value : plan.values) {
    configs.push_back(validate_config(config_for_axis(config, plan.axis, value)));
    accuracy.push_back(profile.lookup(configs.back().compression_ratio).accuracy_pct);
    (void)scenario_for_axis(plan.scenario, plan.axis, value, 0);
  }

  std::vector<CellResult> cells(nv * ns);
  parallel_for(cells.size(), plan.workers, [&](std::size_t idx) {
    const std::size_t vi = idx / ns;
    const std::size_t si = idx % ns;
    const auto spec = scenario_for_axis(plan.scenario, plan.axis, plan.values[vi], plan.seeds[si]);
    auto cell = run_cell(configs[vi], profile, spec);
    cell.devices.clear();
    cells[idx] = std::move(cell);
  });

  std::vector<SweepRecord> per_seed;
  per_seed.reserve(cells.size() * 3);
  for (std::size_t vi = 0; vi < nv; ++vi) {
    for (std::size_t si = 0; si < ns; ++si) {
      const auto& c = cells[vi * ns + si];
      const Solution* sols[] = {&c.proposed, &c.fully, &c.random};
      for (std::size_t k = 0; k < 3; ++k)
        per_seed.push_back(make_record(kSchemes[k], plan.axis, plan.values[vi], plan.seeds[si], *sols[k], accuracy[vi]));
    }
  }

  std::vector<SweepRecord> averaged;
  for (std::size_t vi = 0; vi < nv; ++vi) {
    for (std::size_t k = 0; k < 3; ++k) {
      double cost = 0.0, t = 0.0, energy = 0.0;
      for (std::size_t si = 0; si < ns; ++si) {
        const auto& r = per_seed[(vi * ns + si) * 3 + k];
        cost += r.system_cost;
        t += r.t_star_s;
        energy += r.total_energy_j;
      }
      SweepRecord a;
      a.scheme = kSchemes[k];
      a.axis = plan.axis;
      a.axis_value = plan.values[vi];
      a.system_cost = cost / double(ns);
      a.t_star_s = t / double(ns);
      a.total_energy_j = energy / double(ns);
      a.accuracy_pct = accuracy[vi];
      a.efficiency = efficiency(a.accuracy_pct, a.system_cost);
      a.averaged = true;
      averaged.push_back(a);
    }
  }

  normalize(per_seed);
  normalize(averaged);
  per_seed.insert(per_seed.end(), averaged.begin(), averaged.end());
  return per_seed;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kCsvHeader =
    "scheme,axis_name,axis_value,seed,system_cost,normalized_cost,t_star_s,total_energy_j,accuracy_pct,efficiency,"
    "averaged";

inline std::string format_g9(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

inline void write_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  os << "# judba-sim v" << kVersion << '\n' << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << to_string(r.scheme) << ',' << to_string(r.axis) << ',' << format_g9(r.axis_value) << ',';
    if (r.seed) os << *r.seed;
    os << ',' << format_g9(r.system_cost) << ',' << format_g9(r.normalized_cost) << ',' << format_g9(r.t_star_s)
       << ',' << format_g9(r.total_energy_j) << ',' << format_g9(r.accuracy_pct) << ',' << format_g9(r.efficiency)
       << ',' << (r.averaged ? 1 : 0) << '\n';
  }
}

// Averaged rows of one scheme in axis order.
inline std::vector<SweepRecord> averaged_rows(const std::vector<SweepRecord>& records, Scheme scheme) {
  std::vector<SweepRecord> out;
  for (const auto& r : records) {
    if (r.averaged && r.scheme == scheme) out.push_back(r);
  }
  return out;
}

// Axis values where the averaged costs of schemes a and b swap order
// relative to the previous axis value.
inline std::vector<double> crossover_points(const std::vector<SweepRecord>& records, Scheme a, Scheme b) {
  const auto ra = averaged_rows(records, a);
  const auto rb = averaged_rows(records, b);
  std::vector<double> out;
  int prev = 0;
  for (std::size_t i = 0; i < std::min(ra.size(), rb.size()); ++i) {
    const double d = ra[i].system_cost - rb[i].system_cost;
    const int sign = (d > 0.0) - (d < 0.0);
    if (sign != 0 && prev != 0 && sign != prev) out.push_back(ra[i].axis_value);
    if (sign != 0) prev = sign;
  }
  return out;
}

}  // namespace judba

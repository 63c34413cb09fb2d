#pragma once

// Command implementations behind the judba-sim executable. Each returns the
// process exit status: 0 success, 1 usage or config error, 2 solver failure,
// 3 verification breach.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "judba/judba.hpp"

namespace judba::cli {

enum Exit : int { kOk = 0, kUsage = 1, kSolver = 2, kBreach = 3 };

inline RunConfig load_or_default(const std::optional<std::string>& path) {
  if (!path) return RunConfig{};
  return load_config(*path);
}

// Writes next to the target and renames so readers never see a partial file.
inline void write_atomically(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << contents;
    if (!f.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// Comma-separated numbers; nullopt on any malformed entry.
inline std::optional<std::vector<double>> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    if (!judba::detail::parse_double(item, v) || !std::isfinite(v)) return std::nullopt;
    out.push_back(v);
  }
  if (out.empty() || (!text.empty() && text.back() == ',')) return std::nullopt;
  return out;
}

struct SolveArgs {
  std::optional<std::string> config;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
};

inline int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  try {
    rc = load_or_default(args.config);
  } catch (const ConfigInvalid& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  try {
    auto spec = rc.scenario;
    spec.rng_seed = args.seed;
    const auto devices = generate_scenario(spec);
    const auto& cfg = rc.system;
    const auto proposed = solve_judba(devices, cfg, rc.profile);
    const auto fully = benchmark_fully_uploading(devices, cfg, rc.profile);
    const auto random = benchmark_randomly_uploading(devices, cfg, rc.profile, random_scheme_seed(args.seed));
    const double accuracy = rc.profile.lookup(cfg.compression_ratio).accuracy_pct;
    const auto v = latent_vector_sizes(devices, cfg);

    out << "M = " << devices.size() << ", lambda = " << cfg.compression_ratio << ", seed = " << args.seed << '\n';
    out << "N* = " << proposed.decision.count() << ", T* = " << format_g9(proposed.completion_latency_s) << " s\n";
    out << "device  rho  w*           delta_e_j\n";
    for (std::size_t i = 0; i < devices.size(); ++i) {
      out << std::setw(6) << i << "  " << int(proposed.decision.rho[i]) << "    " << std::left << std::setw(12)
          << format_g9(proposed.allocation.w[i]) << std::right << ' ';
      if (proposed.decision.uploads(i))
        out << format_g9(upload_energy_gap(devices[i], proposed.allocation.w[i], v[i], cfg));
      else
        out << '-';
      out << '\n';
    }
    out << "cost proposed = " << format_g9(proposed.system_cost) << '\n';
    out << "cost fully    = " << format_g9(fully.system_cost) << '\n';
    out << "cost random   = " << format_g9(random.system_cost) << '\n';

    if (args.out) {
      std::vector<SweepRecord> rows;
      const double m = double(devices.size());
      rows.push_back(make_record(Scheme::proposed, Axis::M, m, args.seed, proposed, accuracy));
      rows.push_back(make_record(Scheme::fully, Axis::M, m, args.seed, fully, accuracy));
      rows.push_back(make_record(Scheme::random, Axis::M, m, args.seed, random, accuracy));
      normalize(rows);
      std::ostringstream csv;
      write_csv(csv, rows);
      write_atomically(*args.out, csv.str());
    }
  } catch (const ConfigInvalid& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolver;
  }
  return kOk;
}

struct SweepArgs {
  std::optional<std::string> config;
  std::string axis;
  std::string values;
  std::uint64_t seeds = 100;
  std::uint64_t seed = 0;  // first seed; seeds run seed, seed + 1, ...
  std::optional<std::string> out;
  unsigned workers = 0;    // 0 = JUDBA_THREADS or hardware concurrency
};

inline int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  const auto axis = parse_axis(args.axis);
  if (!axis) {
    err << "error: --axis must be one of M, F, lambda\n";
    return kUsage;
  }
  const auto values = parse_values(args.values);
  if (!values) {
    err << "error: --values must be a comma-separated list of numbers\n";
    return kUsage;
  }
  if (args.seeds < 1) {
    err << "error: --seeds must be at least 1\n";
    return kUsage;
  }
  RunConfig rc;
  try {
    rc = load_or_default(args.config);
  } catch (const ConfigInvalid& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  SweepPlan plan;
  plan.axis = *axis;
  plan.values = *values;
  for (std::uint64_t k = 0; k < args.seeds; ++k) plan.seeds.push_back(args.seed + k);
  plan.scenario = rc.scenario;
  plan.workers = args.workers ? args.workers : worker_count_from_env();
  try {
    const auto records = sweep(rc.system, rc.profile, plan);
    std::ostringstream csv;
    write_csv(csv, records);
    if (args.out)
      write_atomically(*args.out, csv.str());
    else
      out << csv.str();
    if (args.out) {
      for (auto scheme : kSchemes) {
        out << std::left << std::setw(9) << to_string(scheme) << std::right;
        for (const auto& r : averaged_rows(records, scheme)) out << ' ' << format_g9(r.normalized_cost);
        out << '\n';
      }
      const auto cross = crossover_points(records, Scheme::fully, Scheme::random);
      out << "fully/random crossover:";
      if (cross.empty()) out << " none";
      for (double x : cross) out << ' ' << format_g9(x);
      out << '\n';
    }
  } catch (const ConfigInvalid& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UnknownRatio& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolver;
  }
  return kOk;
}

// Tolerances of the verify command.
inline constexpr double kGridStep = 1e-3;
inline constexpr double kCostRelTol = 1e-9;

struct VerifyArgs {
  std::optional<std::string> config;
  std::int64_t trials = 100;
  std::uint64_t seed = 0;
  double cost_tol = kCostRelTol;
};

struct VerifyStats {
  double max_sandwich_excess = -std::numeric_limits<double>::infinity();  // oracle T minus (T* + slack), or T*(1 - tol) minus oracle T
  double max_cost_rel_dev = 0.0;
  std::optional<std::uint64_t> breach_seed;
  std::string breach;
};

// Random instance for the grid oracle: three devices from the config's
// scenario ranges and a random non-empty participant subset.
inline std::pair<std::vector<DeviceProfile>, UploadDecision> oracle_instance(const ScenarioSpec& base,
                                                                             std::uint64_t seed) {
  auto spec = base;
  spec.num_devices = 3;
  spec.rng_seed = seed;
  auto devices = generate_scenario(spec);
  std::mt19937_64 rng(random_scheme_seed(seed) ^ 0x5bd1e995ull);
  std::uint64_t mask = 0;
  while (mask == 0) mask = rng() & 7u;
  return {devices, UploadDecision::from_mask(mask, 3)};
}

inline VerifyStats run_verification(const RunConfig& rc, std::int64_t trials, std::uint64_t seed0,
                                   double cost_tol = kCostRelTol) {
  VerifyStats st;
  const auto& cfg = rc.system;
  for (std::int64_t t = 0; t < trials && !st.breach_seed; ++t) {
    const std::uint64_t seed = seed0 + std::uint64_t(t);

    const auto [devices, decision] = oracle_instance(rc.scenario, seed);
    const auto bw = solve_bandwidth(devices, decision, cfg);
    const auto grid = oracle::grid_bandwidth_oracle(devices, decision, cfg, kGridStep);
    const double t_star = bw.report.t_star;
    const double slack = oracle::grid_slack(devices, decision, bw.allocation.w, t_star, cfg, kGridStep);
    const double upper_excess = grid.best_t - (t_star + slack);
    const double lower_excess = t_star * (1.0 - cfg.bisect_tol) - grid.best_t;
    const double excess = std::max(upper_excess, lower_excess);
    st.max_sandwich_excess = std::max(st.max_sandwich_excess, excess);
    if (excess > 0.0) {
      st.breach_seed = seed;
      st.breach = "grid oracle T " + format_g9(grid.best_t) + " outside [" + format_g9(t_star * (1 - cfg.bisect_tol)) +
                  ", " + format_g9(t_star + slack) + "]";
      break;
    }

    auto spec = rc.scenario;
    spec.rng_seed = seed;
    const auto pop = generate_scenario(spec);
    std::mt19937_64 rng(seed ^ 0xC0FFEEull);
    UploadDecision d = UploadDecision::all(pop.size(), false);
    for (auto& r : d.rho) r = std::uint8_t(rng() >> 63);
    const auto sol = evaluate_decision(pop, d, cfg, rc.profile);
    const double ref = oracle::brute_force_cost(pop, d, sol.allocation.w, cfg, rc.profile);
    const double dev = std::abs(sol.system_cost - ref) / std::abs(ref);
    st.max_cost_rel_dev = std::max(st.max_cost_rel_dev, dev);
    if (dev > cost_tol) {
      st.breach_seed = seed;
      st.breach = "system cost " + format_g9(sol.system_cost) + " vs brute force " + format_g9(ref);
    }
  }
  return st;
}

inline int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  if (args.trials < 1) {
    err << "error: --trials must be at least 1\n";
    return kUsage;
  }
  if (!(args.cost_tol >= 0.0)) {
    err << "error: --cost-tol must be non-negative\n";
    return kUsage;
  }
  RunConfig rc;
  try {
    rc = load_or_default(args.config);
  } catch (const ConfigInvalid& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  VerifyStats st;
  try {
    st = run_verification(rc, args.trials, args.seed, args.cost_tol);
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolver;
  }
  out << "trials = " << args.trials << '\n';
  out << "max grid-oracle sandwich excess = " << format_g9(st.max_sandwich_excess) << " s (must be <= 0)\n";
  out << "max system-cost relative deviation = " << format_g9(st.max_cost_rel_dev) << " (tolerance "
      << format_g9(args.cost_tol) << ")\n";
  if (st.breach_seed) {
    err << "verification breach at seed " << *st.breach_seed << ": " << st.breach << '\n';
    return kBreach;
  }
  out << "ok\n";
  return kOk;
}

}  // namespace judba::cli

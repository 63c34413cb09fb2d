#pragma once

// Joint upload decision and bandwidth allocation.
//
// The inner problem fixes the decision and minimises the completion latency:
// at the optimum all participants finish at the same instant T*, which is the
// root of
//
//   g(T) = sum_{i in N} v_i / (B log2(1 + P_i h_i / N0) (T - t_comp_i)) = 1,
//
// and the shares are the individual terms of g(T*). The outer problem searches
// the binary decision vector, exhaustively for small M and by single-flip hill
// climbing otherwise.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "judba/model.hpp"
#include "judba/physics.hpp"

namespace judba {

// One participant of the uplink round, reduced to what the allocation needs.
struct UplinkTask {
  std::size_t device = 0;
  double compute_s = 0.0;
  double bits = 0.0;
  // B log2(1 + P h / N0): the rate at w = 1.
  double full_band_rate_bps = 0.0;
};

inline std::vector<UplinkTask> make_uplink_tasks(std::span<const DeviceProfile> devices,
                                                 const UploadDecision& decision, const SystemConfig& config) {
  const auto v = latent_vector_sizes(devices, config);
  std::vector<UplinkTask> tasks;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    if (!decision.uploads(i)) continue;
    tasks.push_back({i, local_compute_latency(devices[i], config), v[i], full_band_rate(devices[i], config)});
  }
  return tasks;
}

struct BisectionReport {
  double t_star = 0.0;
  std::uint32_t iterations = 0;
  double residual = 0.0;
  double t_low = 0.0;
  double t_high = 0.0;
};

namespace detail {

inline double demand_unchecked(double t, std::span<const UplinkTask> tasks) {
  double g = 0.0;
  for (const auto& task : tasks) g += task.bits / (task.full_band_rate_bps * (t - task.compute_s));
  return g;
}

inline double max_compute(std::span<const UplinkTask> tasks) {
  double t = 0.0;
  for (const auto& task : tasks) t = std::max(t, task.compute_s);
  return t;
}

}  // namespace detail

// Total bandwidth share needed for every participant to finish by t.
inline double bandwidth_demand(double t, std::span<const UplinkTask> tasks) {
  for (const auto& task : tasks) {
    if (!(t > task.compute_s))
      throw BracketViolation("t = " + std::to_string(t) + " s does not exceed the compute latency of device " +
                             std::to_string(task.device));
  }
  return detail::demand_unchecked(t, tasks);
}

struct BandwidthSolution {
  BandwidthAllocation allocation;
  BisectionReport report;
};

// Bisection on g(T) = 1 above the largest compute latency. Shares are returned
// for all num_devices indices, zero for devices without a task.
inline BandwidthSolution solve_bandwidth(std::span<const UplinkTask> tasks, std::size_t num_devices,
                                         const SystemConfig& config) {
  if (tasks.empty()) throw std::invalid_argument("bandwidth allocation needs at least one participant");
  double min_rate = std::numeric_limits<double>::infinity();
  double total_bits = 0.0;
  for (const auto& task : tasks) {
    if (!(task.full_band_rate_bps > 0.0) || !std::isfinite(task.full_band_rate_bps))
      throw std::invalid_argument("participant " + std::to_string(task.device) + " has no usable uplink rate");
    if (task.device >= num_devices) throw std::out_of_range("task device index out of range");
    min_rate = std::min(min_rate, task.full_band_rate_bps);
    total_bits += task.bits;
  }

  const double t_comp_max = detail::max_compute(tasks);
  double lo = t_comp_max > 0.0 ? t_comp_max * (1.0 + 1e-12) : 0.0;
  const double t_floor = lo;
  // At lo + sum(v)/min(R) every term is at most v_i / sum(v), so g <= 1 there.
  double gap = total_bits / min_rate;
  double hi = lo + gap;
  while (!(detail::demand_unchecked(hi, tasks) < 1.0)) {
    gap *= 2.0;
    hi = t_floor + gap;
  }

  BisectionReport report;
  report.t_low = lo;
  report.t_high = hi;
  bool converged = false;
  double t_star = hi;
  double residual = std::abs(detail::demand_unchecked(hi, tasks) - 1.0);
  std::uint32_t it = 0;
  while (it < config.bisect_max_iter) {
    ++it;
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;  // bracket exhausted at double precision
    const double g = detail::demand_unchecked(mid, tasks);
    if (std::abs(g - 1.0) <= config.bisect_tol) {
      t_star = mid;
      residual = std::abs(g - 1.0);
      converged = true;
      break;
    }
    if (g > 1.0) {
      lo = mid;
    } else {
      hi = mid;
      t_star = hi;
      residual = std::abs(g - 1.0);
    }
  }
  if (!converged && residual <= config.bisect_tol) converged = true;
  if (!converged) {
    throw NoConvergence("bisection stopped after " + std::to_string(it) + " iterations with |g(T) - 1| = " +
                        std::to_string(residual));
  }
  report.t_star = t_star;
  report.iterations = it;
  report.residual = residual;
  report.t_low = std::min(report.t_low, lo);
  report.t_high = hi;

  BandwidthSolution out;
  out.allocation.w.assign(num_devices, 0.0);
  for (const auto& task : tasks) {
    out.allocation.w[task.device] = task.bits / (task.full_band_rate_bps * (t_star - task.compute_s));
  }
  out.report = report;
  return out;
}

inline BandwidthSolution solve_bandwidth(std::span<const DeviceProfile> devices, const UploadDecision& decision,
                                         const SystemConfig& config) {
  const auto tasks = make_uplink_tasks(devices, decision, config);
  return solve_bandwidth(tasks, devices.size(), config);
}

// Solution for a fixed decision with the latency-optimal allocation.
inline Solution evaluate_decision(std::span<const DeviceProfile> devices, const UploadDecision& decision,
                                  const SystemConfig& config, const CompressionProfile& profile) {
  if (decision.count() == 0) {
    return system_cost(devices, decision, BandwidthAllocation(std::vector<double>(devices.size(), 0.0)), config,
                       profile);
  }
  const auto bw = solve_bandwidth(devices, decision, config);
  return system_cost(devices, decision, bw.allocation, config, profile);
}

namespace detail {

// Lower cost wins, then fewer uploads, then the lexicographically smaller
// decision vector.
inline bool preferred(const Solution& a, const Solution& b) {
  if (a.system_cost != b.system_cost) return a.system_cost < b.system_cost;
  const auto na = a.decision.count();
  const auto nb = b.decision.count();
  if (na != nb) return na < nb;
  return a.decision.rho < b.decision.rho;
}

}  // namespace detail

inline Solution solve_decision_exhaustive(std::span<const DeviceProfile> devices, const SystemConfig& config,
                                          const CompressionProfile& profile) {
  const std::size_t m = devices.size();
  if (m > config.exhaustive_threshold) {
    throw TooManyDevices(std::to_string(m) + " devices exceed the exhaustive threshold of " +
                         std::to_string(config.exhaustive_threshold));
  }
  Solution best = evaluate_decision(devices, UploadDecision::all(m, false), config, profile);
  const std::uint64_t end = std::uint64_t{1} << m;
  for (std::uint64_t mask = 1; mask < end; ++mask) {
    auto candidate = evaluate_decision(devices, UploadDecision::from_mask(mask, m), config, profile);
    if (detail::preferred(candidate, best)) best = std::move(candidate);
  }
  return best;
}

// Hill climbing from all-ones: each round applies the single flip that lowers
// the system cost most (lowest index on ties) until no flip improves.
inline Solution solve_decision_greedy(std::span<const DeviceProfile> devices, const SystemConfig& config,
                                      const CompressionProfile& profile) {
  const std::size_t m = devices.size();
  if (m == 0) throw std::invalid_argument("greedy decision search needs at least one device");
  UploadDecision decision = UploadDecision::all(m, true);
  Solution current = evaluate_decision(devices, decision, config, profile);
  const std::size_t max_rounds = m * m;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    std::size_t best_flip = m;
    Solution best_candidate;
    for (std::size_t i = 0; i < m; ++i) {
      UploadDecision flipped = decision;
      flipped.rho[i] ^= 1u;
      auto candidate = evaluate_decision(devices, flipped, config, profile);
      if (candidate.system_cost < current.system_cost &&
          (best_flip == m || candidate.system_cost < best_candidate.system_cost)) {
        best_flip = i;
        best_candidate = std::move(candidate);
      }
    }
    if (best_flip == m) break;
    decision.rho[best_flip] ^= 1u;
    current = std::move(best_candidate);
  }
  return current;
}

inline Solution solve_judba(std::span<const DeviceProfile> devices, const SystemConfig& config,
                            const CompressionProfile& profile) {
  if (devices.empty()) throw std::invalid_argument("the joint problem needs at least one device");
  if (devices.size() <= config.exhaustive_threshold) return solve_decision_exhaustive(devices, config, profile);
  return solve_decision_greedy(devices, config, profile);
}

inline Solution benchmark_fully_uploading(std::span<const DeviceProfile> devices, const SystemConfig& config,
                                          const CompressionProfile& profile) {
  const std::size_t m = devices.size();
  if (m == 0) throw std::invalid_argument("benchmark needs at least one device");
  return system_cost(devices, UploadDecision::all(m, true),
                     BandwidthAllocation(std::vector<double>(m, 1.0 / static_cast<double>(m))), config, profile);
}

// i.i.d. fair coin per device, equal split among the uploaders.
inline Solution benchmark_randomly_uploading(std::span<const DeviceProfile> devices, const SystemConfig& config,
                                             const CompressionProfile& profile, std::uint64_t rng_seed) {
  const std::size_t m = devices.size();
  if (m == 0) throw std::invalid_argument("benchmark needs at least one device");
  std::mt19937_64 rng(rng_seed);
  UploadDecision decision = UploadDecision::all(m, false);
  for (auto& r : decision.rho) r = static_cast<std::uint8_t>(rng() >> 63);
  const std::size_t n = decision.count();
  std::vector<double> w(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (decision.uploads(i)) w[i] = 1.0 / static_cast<double>(n);
  }
  return system_cost(devices, decision, BandwidthAllocation(std::move(w)), config, profile);
}

}  // namespace judba

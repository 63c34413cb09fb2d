#pragma once

// Brute-force verifiers for the solver. Everything here is written out from
// the raw model formulas and shares no helpers with physics.hpp or
// solver.hpp, so agreement between the two is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "judba/model.hpp"

namespace judba::oracle {

struct GridResult {
  std::vector<double> best_w;  // one entry per device, zero for non-participants
  double best_t = 0.0;
};

namespace detail {

struct Link {
  std::size_t index;
  double compute_s;
  double bits;
  double rate_bps;
};

inline std::vector<Link> links(std::span<const DeviceProfile> devices, const UploadDecision& decision,
                               const SystemConfig& c) {
  double mean_bits = 0.0;
  for (const auto& d : devices) mean_bits += double(d.num_samples) * d.sample_bits / c.compression_ratio;
  mean_bits /= double(devices.size());
  std::vector<Link> out;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    if (decision.rho[i] == 0) continue;
    const auto& d = devices[i];
    const double bits = c.common_latent_size ? mean_bits : double(d.num_samples) * d.sample_bits / c.compression_ratio;
    out.push_back({i, double(d.num_samples) * c.cycles_per_image / d.cpu_freq_hz, bits,
                   c.bandwidth_hz * std::log2(1.0 + d.tx_power_w * d.channel_gain / c.noise_w)});
  }
  return out;
}

}  // namespace detail

// Enumerates the bandwidth simplex {w > 0, sum w = 1} at resolution
// grid_step and returns the point with the smallest max finish time. Ties go
// to the lexicographically smallest w, which is the enumeration order.
inline GridResult grid_bandwidth_oracle(std::span<const DeviceProfile> devices, const UploadDecision& decision,
                                        const SystemConfig& c, double grid_step) {
  if (!(grid_step >= 1e-4 && grid_step <= 1e-2)) throw std::invalid_argument("grid_step must lie in [1e-4, 1e-2]");
  const auto ls = detail::links(devices, decision, c);
  if (ls.empty()) throw std::invalid_argument("grid oracle needs at least one participant");
  if (ls.size() > 3) throw TooManyParticipants("grid oracle supports at most 3 participants, got " + std::to_string(ls.size()));

  const auto k = static_cast<std::int64_t>(std::llround(1.0 / grid_step));
  const double step = 1.0 / double(k);
  auto finish = [&](std::size_t j, std::int64_t units) {
    return ls[j].compute_s + ls[j].bits / (double(units) * step * ls[j].rate_bps);
  };

  GridResult r;
  r.best_w.assign(devices.size(), 0.0);
  r.best_t = std::numeric_limits<double>::infinity();
  std::int64_t b0 = k, b1 = 0, b2 = 0;
  if (ls.size() == 1) {
    r.best_t = finish(0, k);
  } else if (ls.size() == 2) {
    for (std::int64_t i = 1; i < k; ++i) {
      const double t = std::max(finish(0, i), finish(1, k - i));
      if (t < r.best_t) { r.best_t = t; b0 = i; b1 = k - i; }
    }
  } else {
    for (std::int64_t i = 1; i < k - 1; ++i) {
      const double t0 = finish(0, i);
      if (t0 >= r.best_t) continue;
      for (std::int64_t j = 1; i + j < k; ++j) {
        const double t = std::max({t0, finish(1, j), finish(2, k - i - j)});
        if (t < r.best_t) { r.best_t = t; b0 = i; b1 = j; b2 = k - i - j; }
      }
    }
  }
  const std::int64_t units[3] = {b0, b1, b2};
  for (std::size_t j = 0; j < ls.size(); ++j) r.best_w[ls[j].index] = double(units[j]) * step;
  return r;
}

// Upper bound on how much worse the best grid point can be than the
// continuous optimum (t_star, w_star). Rounding every share down to the grid
// and handing the remainder out one step at a time moves each share by less
// than n * step, and the finish time of device i grows by at most
// (t_star - t_comp_i) * delta / (w_i - delta) when its share drops by delta.
// Returns +inf when some optimal share is too small for that bound.
inline double grid_slack(std::span<const DeviceProfile> devices, const UploadDecision& decision,
                         std::span<const double> w_star, double t_star, const SystemConfig& c, double grid_step) {
  const auto ls = detail::links(devices, decision, c);
  const double delta = double(ls.size()) * grid_step;
  double slack = 0.0;
  for (const auto& l : ls) {
    const double w = w_star[l.index];
    if (!(w > delta)) return std::numeric_limits<double>::infinity();
    slack = std::max(slack, (t_star - l.compute_s) * delta / (w - delta));
  }
  return slack;
}

// Latency-optimal allocation found with TOMS 748 on the log of the demand
// function; an independent route to the bisection solver's answer.
inline std::pair<std::vector<double>, double> reference_allocation(std::span<const DeviceProfile> devices,
                                                                   const UploadDecision& decision,
                                                                   const SystemConfig& c) {
  std::vector<double> w(devices.size(), 0.0);
  const auto ls = detail::links(devices, decision, c);
  if (ls.empty()) return {w, 0.0};
  double floor_t = 0.0;
  for (const auto& l : ls) floor_t = std::max(floor_t, l.compute_s);
  // Parametrise T = floor_t + u so the singularity sits at u = 0.
  auto f = [&](double u) {
    double g = 0.0;
    for (const auto& l : ls) g += l.bits / (l.rate_bps * (floor_t + u - l.compute_s));
    return std::log(g);
  };
  double lo = std::max(floor_t * 1e-13, 1e-300);
  while (!std::isfinite(f(lo))) lo *= 2.0;
  double hi = 1.0;
  while (f(hi) > 0.0) hi *= 2.0;
  std::uintmax_t iters = 500;
  auto root = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  const double t = floor_t + 0.5 * (root.first + root.second);
  for (const auto& l : ls) w[l.index] = l.bits / (l.rate_bps * (t - l.compute_s));
  return {w, t};
}

// Straight-line re-evaluation of the system cost for a given allocation.
inline double brute_force_cost(std::span<const DeviceProfile> devices, const UploadDecision& decision,
                               std::span<const double> w, const SystemConfig& c,
                               const CompressionProfile& profile) {
  const std::size_t m = devices.size();
  double mean_bits = 0.0;
  for (const auto& d : devices) mean_bits += double(d.num_samples) * d.sample_bits / c.compression_ratio;
  mean_bits /= double(m);

  double params = -1.0;
  for (const auto& row : profile.rows()) {
    if (row.lambda == c.compression_ratio) params = row.model_params;
  }
  if (params < 0.0) throw UnknownRatio(c.compression_ratio);

  double uploaded_samples = 0.0;
  double latency = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (decision.rho[i] == 0) continue;
    const auto& d = devices[i];
    if (!(w[i] > 0.0)) throw ZeroBandwidth(d.id);
    uploaded_samples += double(d.num_samples);
    const double bits = c.common_latent_size ? mean_bits : double(d.num_samples) * d.sample_bits / c.compression_ratio;
    const double up_rate = w[i] * c.bandwidth_hz * std::log2(1.0 + d.tx_power_w * d.channel_gain / c.noise_w);
    latency = std::max(latency, double(d.num_samples) * c.cycles_per_image / d.cpu_freq_hz + bits / up_rate);
  }
  const double idle_j = c.idle_power_w * c.train_cycles_per_sample * uploaded_samples / c.edge_freq_hz;

  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& d = devices[i];
    const double f2 = d.cpu_freq_hz * d.cpu_freq_hz;
    const double n = double(d.num_samples);
    double e = c.kappa * n * c.cycles_per_image * f2;
    e += idle_j;
    const double down_rate = c.bandwidth_hz * std::log2(1.0 + c.bs_tx_power_w * d.channel_gain / c.noise_w);
    e += c.idle_power_w * params * double(c.bits_per_parameter) / down_rate;
    e += c.kappa * n * c.inference_cycles_per_sample * f2;
    if (decision.rho[i] != 0) {
      const double bits = c.common_latent_size ? mean_bits : n * d.sample_bits / c.compression_ratio;
      const double up_rate = w[i] * c.bandwidth_hz * std::log2(1.0 + d.tx_power_w * d.channel_gain / c.noise_w);
      e += d.tx_power_w * bits / up_rate;
    } else {
      e += c.kappa * n * c.finetune_cycles_per_sample * f2;
    }
    total += c.alpha * e + (1.0 - c.alpha) * latency;
  }
  return total;
}

// Cost of a decision under the oracle's own latency-optimal allocation.
inline double brute_force_cost(std::span<const DeviceProfile> devices, const UploadDecision& decision,
                               const SystemConfig& c, const CompressionProfile& profile) {
  const auto [w, t] = reference_allocation(devices, decision, c);
  (void)t;
  return brute_force_cost(devices, decision, w, c, profile);
}

}  // namespace judba::oracle

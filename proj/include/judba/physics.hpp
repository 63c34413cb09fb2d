#pragma once

// Rate, latency and energy model of the edge-CNN training round.
//
//   t_comp_i = |D_i| c / f_i
//   r_i(w)   = w_i B log2(1 + P_i h_i / N0)
//   t_comm_i = v_i / r_i(w)
//   T(w)     = max_{i in N} (t_comp_i + t_comm_i)
//
// Device energy with upload is encode + trans + idle + down + inf; without
// upload it is encode + idle + down + tune + inf. The sub-terms are:
//
//   encode = kappa |D_i| c f_i^2             (switched-capacitance CPU energy)
//   trans  = P_i t_comm_i
//   idle   = P_I c_train (sum_{j in N} |D_j|) / F
//   down   = P_I params(lambda) bits / (B log2(1 + P_BS h_i / N0))
//   tune   = kappa c_tune |D_i| f_i^2
//   inf    = kappa c_inf |D_i| f_i^2
//
// The per-device cost is alpha E_i + (1 - alpha) T(w) and the system cost sums
// it over all M devices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "judba/model.hpp"

namespace judba {

inline double spectral_efficiency(double tx_power_w, double channel_gain, const SystemConfig& config) {
  return std::log2(1.0 + tx_power_w * channel_gain / config.noise_w);
}

// Bits per second over the whole band for this device's uplink.
inline double full_band_rate(const DeviceProfile& device, const SystemConfig& config) {
  return config.bandwidth_hz * spectral_efficiency(device.tx_power_w, device.channel_gain, config);
}

// Per-device latent vector size |D_i| s_i / lambda, labels excluded.
inline double latent_vector_size(const DeviceProfile& device, const SystemConfig& config) {
  return static_cast<double>(device.num_samples) * device.sample_bits / config.compression_ratio;
}

// Latent sizes for a whole population. With common_latent_size every device
// carries v computed from the mean |D_i| s_i, independent of the decision.
inline std::vector<double> latent_vector_sizes(std::span<const DeviceProfile> devices,
                                               const SystemConfig& config) {
  std::vector<double> v(devices.size());
  for (std::size_t i = 0; i < devices.size(); ++i) v[i] = latent_vector_size(devices[i], config);
  if (config.common_latent_size && !devices.empty()) {
    double sum = 0.0;
    for (double x : v) sum += x;
    std::fill(v.begin(), v.end(), sum / static_cast<double>(v.size()));
  }
  return v;
}

inline double local_compute_latency(const DeviceProfile& device, const SystemConfig& config) {
  return static_cast<double>(device.num_samples) * config.cycles_per_image / device.cpu_freq_hz;
}

inline double achievable_rate(const DeviceProfile& device, double w, const SystemConfig& config) {
  if (w == 0.0) return 0.0;
  return w * full_band_rate(device, config);
}

inline double transmission_latency(const DeviceProfile& device, double w, double latent_bits,
                                   const SystemConfig& config) {
  if (!(w > 0.0)) throw ZeroBandwidth(device.id);
  return latent_bits / achievable_rate(device, w, config);
}

inline double transmission_latency(const DeviceProfile& device, double w, const SystemConfig& config) {
  return transmission_latency(device, w, latent_vector_size(device, config), config);
}

inline void check_shapes(std::span<const DeviceProfile> devices, const UploadDecision& decision,
                         const BandwidthAllocation& allocation) {
  if (decision.size() != devices.size() || allocation.w.size() != devices.size())
    throw std::invalid_argument("decision, allocation and device list differ in length");
}

// Max participant finish time; zero when nobody uploads.
inline double completion_latency(std::span<const DeviceProfile> devices, const UploadDecision& decision,
                                 const BandwidthAllocation& allocation, const SystemConfig& config) {
  check_shapes(devices, decision, allocation);
  const auto v = latent_vector_sizes(devices, config);
  double t = 0.0;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    if (!decision.uploads(i)) continue;
    const double finish = local_compute_latency(devices[i], config) +
                          transmission_latency(devices[i], allocation.w[i], v[i], config);
    t = std::max(t, finish);
  }
  return t;
}

// Quantities shared by every device of one round.
struct ScenarioTotals {
  double edge_training_s = 0.0;
  double model_params = 0.0;
};

inline double edge_training_time(std::span<const DeviceProfile> devices, const UploadDecision& decision,
                                 const SystemConfig& config) {
  double samples = 0.0;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    if (decision.uploads(i)) samples += static_cast<double>(devices[i].num_samples);
  }
  return config.train_cycles_per_sample * samples / config.edge_freq_hz;
}

inline ScenarioTotals scenario_totals(std::span<const DeviceProfile> devices, const UploadDecision& decision,
                                      const SystemConfig& config, const CompressionProfile& profile) {
  return {edge_training_time(devices, decision, config),
          profile.lookup(config.compression_ratio).model_params};
}

inline double cpu_energy(double cycles, double freq_hz, const SystemConfig& config) {
  return config.kappa * cycles * freq_hz * freq_hz;
}

inline double download_latency(const DeviceProfile& device, double model_params, const SystemConfig& config) {
  const double bits = model_params * static_cast<double>(config.bits_per_parameter);
  return bits / (config.bandwidth_hz * spectral_efficiency(config.bs_tx_power_w, device.channel_gain, config));
}

// Fills the sub-terms of the device's branch; terms of the other branch are
// zero. w and latent_bits are only read when the device uploads.
inline EnergyBreakdown energy_breakdown(const DeviceProfile& device, bool uploads, double w, double latent_bits,
                                        const ScenarioTotals& totals, const SystemConfig& config) {
  const double samples = static_cast<double>(device.num_samples);
  EnergyBreakdown e;
  e.encode_j = cpu_energy(samples * config.cycles_per_image, device.cpu_freq_hz, config);
  e.idle_j = config.idle_power_w * totals.edge_training_s;
  e.down_j = config.idle_power_w * download_latency(device, totals.model_params, config);
  e.inf_j = cpu_energy(samples * config.inference_cycles_per_sample, device.cpu_freq_hz, config);
  if (uploads) {
    e.trans_j = device.tx_power_w * transmission_latency(device, w, latent_bits, config);
    e.total_j = e.encode_j + e.trans_j + e.idle_j + e.down_j + e.inf_j;
  } else {
    e.tune_j = cpu_energy(samples * config.finetune_cycles_per_sample, device.cpu_freq_hz, config);
    e.total_j = e.encode_j + e.idle_j + e.down_j + e.tune_j + e.inf_j;
  }
  return e;
}

inline EnergyBreakdown energy_breakdown(std::span<const DeviceProfile> devices, std::size_t i,
                                        const UploadDecision& decision, const BandwidthAllocation& allocation,
                                        const ScenarioTotals& totals, const SystemConfig& config) {
  check_shapes(devices, decision, allocation);
  const auto v = latent_vector_sizes(devices, config);
  return energy_breakdown(devices[i], decision.uploads(i), allocation.w[i], v[i], totals, config);
}

// E_i = rho E_U+ + (1 - rho) E_U-.
inline double device_energy(const EnergyBreakdown& breakdown, bool rho) {
  const double with_upload =
      breakdown.encode_j + breakdown.trans_j + breakdown.idle_j + breakdown.down_j + breakdown.inf_j;
  const double without_upload =
      breakdown.encode_j + breakdown.idle_j + breakdown.down_j + breakdown.tune_j + breakdown.inf_j;
  return rho ? with_upload : without_upload;
}

// Delta_e of one device at share w, comparing its upload energy with local
// fine-tuning. Negative means uploading saves energy.
inline double upload_energy_gap(const DeviceProfile& device, double w, double latent_bits,
                                const SystemConfig& config) {
  const double trans = device.tx_power_w * transmission_latency(device, w, latent_bits, config);
  const double tune = cpu_energy(static_cast<double>(device.num_samples) * config.finetune_cycles_per_sample,
                                 device.cpu_freq_hz, config);
  return trans - tune;
}

inline double weighted_cost(double energy_j, double latency_s, const SystemConfig& config) {
  return config.alpha * energy_j + (1.0 - config.alpha) * latency_s;
}

inline Solution system_cost(std::span<const DeviceProfile> devices, const UploadDecision& decision,
                            const BandwidthAllocation& allocation, const SystemConfig& config,
                            const CompressionProfile& profile) {
  check_shapes(devices, decision, allocation);
  const auto v = latent_vector_sizes(devices, config);
  const auto totals = scenario_totals(devices, decision, config, profile);

  Solution s;
  s.decision = decision;
  s.allocation = allocation;
  s.completion_latency_s = completion_latency(devices, decision, allocation, config);
  s.per_device_energy.reserve(devices.size());
  s.per_device_cost.reserve(devices.size());
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const bool up = decision.uploads(i);
    const auto e = energy_breakdown(devices[i], up, allocation.w[i], v[i], totals, config);
    const double cost = weighted_cost(device_energy(e, up), s.completion_latency_s, config);
    s.per_device_energy.push_back(e);
    s.per_device_cost.push_back(cost);
    s.system_cost += cost;
  }
  return s;
}

}  // namespace judba

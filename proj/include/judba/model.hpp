#pragma once

// Domain types shared by every part of the solver: device and system
// parameters, the compression profile, decisions, allocations and solutions.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace judba {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One violated field of a configuration.
struct FieldViolation {
  std::string field;
  std::string bound;
};

class ConfigInvalid : public Error {
 public:
  explicit ConfigInvalid(std::vector<FieldViolation> violations)
      : Error(describe(violations)), violations_(std::move(violations)) {}

  ConfigInvalid(std::string field, std::string bound)
      : ConfigInvalid(std::vector<FieldViolation>{{std::move(field), std::move(bound)}}) {}

  const std::vector<FieldViolation>& violations() const noexcept { return violations_; }

  bool mentions(const std::string& field) const {
    for (const auto& v : violations_) {
      if (v.field == field) return true;
    }
    return false;
  }

 private:
  static std::string describe(const std::vector<FieldViolation>& violations) {
    std::ostringstream oss;
    oss << "invalid configuration:";
    for (const auto& v : violations) oss << ' ' << v.field << " (" << v.bound << ')';
    return oss.str();
  }

  std::vector<FieldViolation> violations_;
};

class UnknownRatio : public Error {
 public:
  explicit UnknownRatio(double lambda)
      : Error("compression ratio " + std::to_string(lambda) + " is not in the profile"),
        lambda_(lambda) {}
  double lambda() const noexcept { return lambda_; }

 private:
  double lambda_;
};

class ZeroBandwidth : public Error {
 public:
  explicit ZeroBandwidth(std::size_t device)
      : Error("participating device " + std::to_string(device) + " has zero bandwidth share"),
        device_(device) {}
  std::size_t device() const noexcept { return device_; }

 private:
  std::size_t device_;
};

class BracketViolation : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class TooManyDevices : public Error {
 public:
  using Error::Error;
};

class TooManyParticipants : public Error {
 public:
  using Error::Error;
};

class EmptySweep : public Error {
 public:
  EmptySweep() : Error("sweep produced no records") {}
};

class ZeroCost : public Error {
 public:
  ZeroCost() : Error("efficiency is undefined for a non-positive cost") {}
};

// ---------------------------------------------------------------------------
// Devices and system parameters
// ---------------------------------------------------------------------------

struct DeviceProfile {
  std::size_t id = 0;
  double cpu_freq_hz = 1e9;
  double tx_power_w = 0.3;
  double channel_gain = 1e-10;
  std::uint64_t num_samples = 100;
  double sample_bits = 800e3;

  friend bool operator==(const DeviceProfile&, const DeviceProfile&) = default;
};

// Global constants of one experiment. The calibration constants for the
// energy sub-terms (kappa and the per-sample cycle counts, the base-station
// power and the parameter width) default to the values the shipped sweeps
// are tuned against.
struct SystemConfig {
  double bandwidth_hz = 10e6;
  double noise_w = 7.9e-13;
  double idle_power_w = 0.1;
  double alpha = 0.5;
  double compression_ratio = 4.0;
  double cycles_per_image = 1e7;
  double kappa = 5e-27;
  double edge_freq_hz = 2.5e9;
  double train_cycles_per_sample = 3e7;
  double finetune_cycles_per_sample = 1e9;
  double inference_cycles_per_sample = 1e7;
  double bs_tx_power_w = 1.0;
  std::uint32_t bits_per_parameter = 32;
  std::uint32_t exhaustive_threshold = 12;
  double bisect_tol = 1e-9;
  std::uint32_t bisect_max_iter = 200;
  // All devices share one latent size computed from the mean sample count.
  bool common_latent_size = true;

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

inline std::vector<FieldViolation> config_violations(const SystemConfig& c) {
  std::vector<FieldViolation> out;
  auto positive = [&out](const char* name, double value) {
    if (!(value > 0.0) || !std::isfinite(value)) out.push_back({name, "> 0"});
  };
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) out.push_back({"alpha", "[0, 1]"});
  positive("bandwidth_hz", c.bandwidth_hz);
  positive("noise_w", c.noise_w);
  positive("idle_power_w", c.idle_power_w);
  if (!(c.compression_ratio >= 1.0) || !std::isfinite(c.compression_ratio))
    out.push_back({"compression_ratio", ">= 1"});
  positive("cycles_per_image", c.cycles_per_image);
  positive("kappa", c.kappa);
  positive("edge_freq_hz", c.edge_freq_hz);
  auto non_negative = [&out](const char* name, double value) {
    if (!(value >= 0.0) || !std::isfinite(value)) out.push_back({name, ">= 0"});
  };
  non_negative("train_cycles_per_sample", c.train_cycles_per_sample);
  non_negative("finetune_cycles_per_sample", c.finetune_cycles_per_sample);
  non_negative("inference_cycles_per_sample", c.inference_cycles_per_sample);
  positive("bs_tx_power_w", c.bs_tx_power_w);
  if (c.bits_per_parameter == 0) out.push_back({"bits_per_parameter", ">= 1"});
  if (c.exhaustive_threshold < 1) out.push_back({"exhaustive_threshold", ">= 1"});
  // 2^M enumeration must stay addressable.
  if (c.exhaustive_threshold > 30) out.push_back({"exhaustive_threshold", "<= 30"});
  if (!(c.bisect_tol > 0.0 && c.bisect_tol <= 1e-3)) out.push_back({"bisect_tol", "(0, 1e-3]"});
  if (c.bisect_max_iter < 1) out.push_back({"bisect_max_iter", ">= 1"});
  return out;
}

// Returns the config unchanged or throws ConfigInvalid listing every
// violated field.
inline const SystemConfig& validate_config(const SystemConfig& config) {
  auto violations = config_violations(config);
  if (!violations.empty()) throw ConfigInvalid(std::move(violations));
  return config;
}

inline std::vector<FieldViolation> device_violations(const DeviceProfile& d) {
  std::vector<FieldViolation> out;
  const std::string prefix = "device[" + std::to_string(d.id) + "].";
  if (!(d.cpu_freq_hz > 0.0)) out.push_back({prefix + "cpu_freq_hz", "> 0"});
  if (!(d.tx_power_w > 0.0)) out.push_back({prefix + "tx_power_w", "> 0"});
  if (!(d.channel_gain > 0.0)) out.push_back({prefix + "channel_gain", "> 0"});
  if (d.num_samples < 1) out.push_back({prefix + "num_samples", ">= 1"});
  if (!(d.sample_bits > 0.0)) out.push_back({prefix + "sample_bits", "> 0"});
  return out;
}

// ---------------------------------------------------------------------------
// Compression profile
// ---------------------------------------------------------------------------

struct CompressionRow {
  double lambda = 1.0;
  double accuracy_pct = 0.0;
  double model_params = 0.0;
  // Parsed for completeness; the cost model does not consume them.
  double inference_time_s = 0.0;
  double training_time_s = 0.0;

  friend bool operator==(const CompressionRow&, const CompressionRow&) = default;
};

struct CompressionLookup {
  double accuracy_pct;
  double model_params;

  friend bool operator==(const CompressionLookup&, const CompressionLookup&) = default;
};

class CompressionProfile {
 public:
  CompressionProfile() = default;

  explicit CompressionProfile(std::vector<CompressionRow> rows) : rows_(std::move(rows)) {
    std::vector<FieldViolation> bad;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const auto& r = rows_[i];
      const std::string at = "profile[" + std::to_string(i) + "]";
      if (i > 0 && !(r.lambda > rows_[i - 1].lambda))
        bad.push_back({at + ".lambda", "strictly increasing"});
      if (!(r.lambda >= 1.0)) bad.push_back({at + ".lambda", ">= 1"});
      if (!(r.accuracy_pct > 0.0 && r.accuracy_pct <= 100.0))
        bad.push_back({at + ".accuracy_pct", "(0, 100]"});
      if (!(r.model_params > 0.0)) bad.push_back({at + ".model_params", "> 0"});
    }
    if (rows_.empty()) bad.push_back({"profile", "at least one row"});
    if (!bad.empty()) throw ConfigInvalid(std::move(bad));
  }

  // CNN accuracy and model size per compression ratio, as measured on
  // ImageNet with the autoencoder front end.
  static CompressionProfile builtin() {
    return CompressionProfile({
        {1, 83, 2798.25e3, 1.92, 21848.81},
        {4, 77, 619.18e3, 0.63, 6249.24},
        {8, 75, 272.11e3, 0.42, 3555.93},
        {16, 74, 131.75e3, 0.33, 2208.99},
        {32, 69, 34.31e3, 0.33, 2272.93},
        {64, 64, 33.45e3, 0.32, 1613.18},
    });
  }

  const std::vector<CompressionRow>& rows() const noexcept { return rows_; }

  bool contains(double lambda) const noexcept {
    for (const auto& r : rows_) {
      if (r.lambda == lambda) return true;
    }
    return false;
  }

  // Exact match only; there is no interpolation between ratios.
  CompressionLookup lookup(double lambda) const {
    for (const auto& r : rows_) {
      if (r.lambda == lambda) return {r.accuracy_pct, r.model_params};
    }
    throw UnknownRatio(lambda);
  }

  friend bool operator==(const CompressionProfile&, const CompressionProfile&) = default;

 private:
  std::vector<CompressionRow> rows_;
};

inline CompressionLookup lookup_compression(const CompressionProfile& profile, double lambda) {
  return profile.lookup(lambda);
}

// ---------------------------------------------------------------------------
// Decisions, allocations and solutions
// ---------------------------------------------------------------------------

struct UploadDecision {
  std::vector<std::uint8_t> rho;

  UploadDecision() = default;
  explicit UploadDecision(std::vector<std::uint8_t> flags) : rho(std::move(flags)) {}

  static UploadDecision all(std::size_t m, bool upload) {
    return UploadDecision(std::vector<std::uint8_t>(m, upload ? 1 : 0));
  }

  // Bit i of mask is device i's flag.
  static UploadDecision from_mask(std::uint64_t mask, std::size_t m) {
    std::vector<std::uint8_t> r(m);
    for (std::size_t i = 0; i < m; ++i) r[i] = static_cast<std::uint8_t>((mask >> i) & 1u);
    return UploadDecision(std::move(r));
  }

  std::size_t size() const noexcept { return rho.size(); }
  bool uploads(std::size_t i) const { return rho.at(i) != 0; }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto r : rho) n += (r != 0);
    return n;
  }

  std::vector<std::size_t> participants() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (rho[i] != 0) out.push_back(i);
    }
    return out;
  }

  bool is_binary() const noexcept {
    for (auto r : rho) {
      if (r > 1) return false;
    }
    return true;
  }

  friend bool operator==(const UploadDecision&, const UploadDecision&) = default;
};

struct BandwidthAllocation {
  std::vector<double> w;

  BandwidthAllocation() = default;
  explicit BandwidthAllocation(std::vector<double> shares) : w(std::move(shares)) {}

  double total() const noexcept {
    double s = 0.0;
    for (double x : w) s += x;
    return s;
  }

  friend bool operator==(const BandwidthAllocation&, const BandwidthAllocation&) = default;
};

struct EnergyBreakdown {
  double encode_j = 0.0;
  double trans_j = 0.0;
  double idle_j = 0.0;
  double down_j = 0.0;
  double tune_j = 0.0;
  double inf_j = 0.0;
  double total_j = 0.0;

  // Energy gap that drives the upload decision.
  double delta_e() const noexcept { return trans_j - tune_j; }

  friend bool operator==(const EnergyBreakdown&, const EnergyBreakdown&) = default;
};

struct Solution {
  UploadDecision decision;
  BandwidthAllocation allocation;
  double completion_latency_s = 0.0;
  std::vector<EnergyBreakdown> per_device_energy;
  std::vector<double> per_device_cost;
  double system_cost = 0.0;

  double total_energy_j() const noexcept {
    double s = 0.0;
    for (const auto& e : per_device_energy) s += e.total_j;
    return s;
  }

  friend bool operator==(const Solution&, const Solution&) = default;
};

// Checks C1-C4 of the joint problem for a solution over m devices.
inline bool satisfies_constraints(const Solution& s, std::size_t m, double tol = 1e-8) {
  if (s.decision.size() != m || s.allocation.w.size() != m) return false;
  if (!s.decision.is_binary() || s.decision.count() > m) return false;
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = s.allocation.w[i];
    if (!(w >= 0.0 && w <= 1.0 + tol)) return false;
    if (!s.decision.uploads(i) && w != 0.0) return false;
    if (s.decision.uploads(i) && !(w > 0.0)) return false;
    sum += w;
  }
  return sum <= 1.0 + tol;
}

}  // namespace judba

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "relaysec/channel.hpp"

namespace relaysec::mc {

struct McConfig {
  std::uint64_t n_samples = 1'000'000;
  std::uint64_t seed = 1;
  std::vector<double> theta_grid{1.0};
  /// Worker threads; 0 picks std::thread::hardware_concurrency(). Results do
  /// not depend on this value.
  unsigned workers = 0;

  void validate() const;
};

/// Point estimate with the half-width of its 95% normal-approximation CI.
struct Estimate {
  double value = 0.0;
  double half_width = 0.0;

  bool operator==(const Estimate&) const = default;
};

struct McReport {
  std::map<double, Estimate> gsop;  ///< keyed by theta
  Estimate afe;
  Estimate ailr;
  Estimate throughput;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;

  bool operator==(const McReport&) const = default;
};

/// Samples per chunk; chunk `c` draws from RandomStream(seed, c).
inline constexpr std::uint64_t kChunkSize = 1 << 16;

/// Running sums over batches of exact-SINR samples. Merging is plain
/// addition, so shards can be combined in a fixed order.
class McAccumulator {
 public:
  McAccumulator(double rs, double rt, std::vector<double> theta_grid);

  /// Adds a batch of phi and gamma_d values (one entry per realization).
  void add_batch(std::span<const double> phi, std::span<const double> gamma_d);

  void merge(const McAccumulator& other);

  McReport report(std::uint64_t seed) const;

  std::uint64_t count() const { return n_; }

 private:
  double rs_;
  double success_threshold_;  ///< 2^{2 rt} - 1 on gamma_d
  std::vector<double> theta_grid_;
  std::vector<double> tau_;  ///< 2^{2 rs theta}; Delta < theta iff phi < tau
  std::vector<std::uint64_t> outage_;
  std::uint64_t success_ = 0;
  double delta_sum_ = 0.0;
  double delta_sum_sq_ = 0.0;
  std::uint64_t n_ = 0;
  std::vector<double> delta_scratch_;
};

/// Draws n_samples independent (g_SR, g_RD) pairs and estimates GSOP on the
/// theta grid, AFE, AILR and throughput from the exact SINRs.
McReport simulate(const SystemParams& p, const McConfig& cfg);

struct CdfPoint {
  double phi = 0.0;
  Estimate estimate;
};

/// Empirical Pr(phi_rv <= x) on a sorted grid, all points from one sample set
/// (the same one simulate() draws for the same config).
std::vector<CdfPoint> empirical_cdf_phi(const SystemParams& p, std::span<const double> phi_grid, const McConfig& cfg);

/// Fills g_sr and g_rd for one chunk: per sample, one S->R draw then one R->D draw.
void draw_chunk(const SystemParams& p, std::uint64_t seed, std::uint64_t chunk, std::span<double> g_sr,
                std::span<double> g_rd);

}  // namespace relaysec::mc

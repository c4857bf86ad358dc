#include "relaysec/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "relaysec/kernels.hpp"
#include "relaysec/numerics.hpp"

namespace relaysec::mc {

namespace {

constexpr double kZ95 = 1.96;

Estimate proportion(std::uint64_t hits, std::uint64_t n) {
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, kZ95 * std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

std::uint64_t chunk_count(std::uint64_t n) { return (n + kChunkSize - 1) / kChunkSize; }

unsigned worker_count(unsigned requested, std::uint64_t chunks) {
  unsigned w = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<std::uint64_t>(w, std::max<std::uint64_t>(chunks, 1)));
}

// Runs body(chunk_index) for every chunk on `workers` threads.
void for_each_chunk(std::uint64_t chunks, unsigned workers, const std::function<void(std::uint64_t)>& body) {
  if (workers <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::uint64_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) body(c);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void McConfig::validate() const {
  if (n_samples < 1000) {
    throw std::invalid_argument("McConfig: n_samples must be >= 1000");
  }
  if (theta_grid.empty()) {
    throw std::invalid_argument("McConfig: theta_grid must not be empty");
  }
  for (double t : theta_grid) {
    if (!(t > 0.0 && t <= 1.0)) {
      throw std::invalid_argument("McConfig: theta values must lie in (0, 1]");
    }
  }
}

McAccumulator::McAccumulator(double rs, double rt, std::vector<double> theta_grid)
    : rs_(rs), success_threshold_(std::exp2(2.0 * rt) - 1.0), theta_grid_(std::move(theta_grid)) {
  tau_.reserve(theta_grid_.size());
  for (double t : theta_grid_) tau_.push_back(std::exp2(2.0 * rs_ * t));
  outage_.assign(theta_grid_.size(), 0);
}

void McAccumulator::add_batch(std::span<const double> phi, std::span<const double> gamma_d) {
  if (phi.size() != gamma_d.size()) {
    throw std::invalid_argument("McAccumulator::add_batch: span sizes differ");
  }
  for (std::size_t k = 0; k < tau_.size(); ++k) {
    outage_[k] += kernels::count_below(phi, tau_[k]);
  }
  // Legitimate decoding succeeds iff 0.5 log2(1 + gamma_d) >= rt.
  success_ += gamma_d.size() - kernels::count_below(gamma_d, success_threshold_);
  delta_scratch_.resize(phi.size());
  kernels::equivocation(phi, rs_, delta_scratch_);
  const auto m = kernels::moments(delta_scratch_);
  delta_sum_ += m.sum;
  delta_sum_sq_ += m.sum_sq;
  n_ += phi.size();
}

void McAccumulator::merge(const McAccumulator& other) {
  if (other.tau_ != tau_ || other.rs_ != rs_ || other.success_threshold_ != success_threshold_) {
    throw std::invalid_argument("McAccumulator::merge: incompatible accumulators");
  }
  for (std::size_t k = 0; k < outage_.size(); ++k) outage_[k] += other.outage_[k];
  success_ += other.success_;
  delta_sum_ += other.delta_sum_;
  delta_sum_sq_ += other.delta_sum_sq_;
  n_ += other.n_;
}

McReport McAccumulator::report(std::uint64_t seed) const {
  if (n_ == 0) {
    throw std::logic_error("McAccumulator::report: no samples");
  }
  McReport r;
  r.n_samples = n_;
  r.seed = seed;
  for (std::size_t k = 0; k < theta_grid_.size(); ++k) {
    r.gsop[theta_grid_[k]] = proportion(outage_[k], n_);
  }
  const double n = static_cast<double>(n_);
  const double mean = delta_sum_ / n;
  const double var = n > 1 ? std::max(0.0, (delta_sum_sq_ - n * mean * mean) / (n - 1.0)) : 0.0;
  r.afe = {mean, kZ95 * std::sqrt(var / n)};
  r.ailr = {(1.0 - mean) * rs_, r.afe.half_width * rs_};
  const Estimate ok = proportion(success_, n_);
  r.throughput = {ok.value * rs_, ok.half_width * rs_};
  return r;
}

void draw_chunk(const SystemParams& p, std::uint64_t seed, std::uint64_t chunk, std::span<double> g_sr,
                std::span<double> g_rd) {
  if (g_sr.size() != g_rd.size()) {
    throw std::invalid_argument("draw_chunk: span sizes differ");
  }
  numerics::RandomStream rng(seed, chunk);
  for (std::size_t i = 0; i < g_sr.size(); ++i) {
    g_sr[i] = numerics::sample_exponential(p.omega_sr, rng);
    g_rd[i] = numerics::sample_exponential(p.omega_rd, rng);
  }
}

namespace {

struct ChunkBuffers {
  std::vector<double> g_sr, g_rd, phi, gamma_d;
  void resize(std::size_t n) {
    g_sr.resize(n);
    g_rd.resize(n);
    phi.resize(n);
    gamma_d.resize(n);
  }
};

// Draws chunk `c` and evaluates the exact SINRs into `buf`.
void evaluate_chunk(const SystemParams& p, const McConfig& cfg, std::uint64_t c, ChunkBuffers& buf) {
  const std::uint64_t begin = c * kChunkSize;
  const std::size_t len = static_cast<std::size_t>(std::min(kChunkSize, cfg.n_samples - begin));
  buf.resize(len);
  draw_chunk(p, cfg.seed, c, buf.g_sr, buf.g_rd);
  const auto snr = transmit_snrs(p);
  kernels::phi_and_gamma_d(buf.g_sr, buf.g_rd, {snr.source, snr.relay, snr.destination}, buf.phi, buf.gamma_d);
}

}  // namespace

McReport simulate(const SystemParams& p, const McConfig& cfg) {
  p.validate();
  cfg.validate();
  const std::uint64_t chunks = chunk_count(cfg.n_samples);
  std::vector<McAccumulator> partial(chunks, McAccumulator(p.rs, p.rt, cfg.theta_grid));
  for_each_chunk(chunks, worker_count(cfg.workers, chunks), [&](std::uint64_t c) {
    thread_local ChunkBuffers buf;
    evaluate_chunk(p, cfg, c, buf);
    partial[c].add_batch(buf.phi, buf.gamma_d);
  });
  McAccumulator total(p.rs, p.rt, cfg.theta_grid);
  for (const auto& part : partial) total.merge(part);
  return total.report(cfg.seed);
}

std::vector<CdfPoint> empirical_cdf_phi(const SystemParams& p, std::span<const double> phi_grid, const McConfig& cfg) {
  p.validate();
  cfg.validate();
  for (std::size_t i = 0; i < phi_grid.size(); ++i) {
    if (!(phi_grid[i] >= 0.0) || (i > 0 && phi_grid[i] < phi_grid[i - 1])) {
      throw std::invalid_argument("empirical_cdf_phi: grid must be sorted and nonnegative");
    }
  }
  const std::uint64_t chunks = chunk_count(cfg.n_samples);
  std::vector<std::vector<std::uint64_t>> counts(chunks, std::vector<std::uint64_t>(phi_grid.size(), 0));
  for_each_chunk(chunks, worker_count(cfg.workers, chunks), [&](std::uint64_t c) {
    thread_local ChunkBuffers buf;
    evaluate_chunk(p, cfg, c, buf);
    for (std::size_t k = 0; k < phi_grid.size(); ++k) {
      counts[c][k] = kernels::count_at_most(buf.phi, phi_grid[k]);
    }
  });
  std::vector<CdfPoint> out;
  out.reserve(phi_grid.size());
  for (std::size_t k = 0; k < phi_grid.size(); ++k) {
    std::uint64_t hits = 0;
    for (const auto& row : counts) hits += row[k];
    out.push_back({phi_grid[k], proportion(hits, cfg.n_samples)});
  }
  return out;
}

}  // namespace relaysec::mc

#include "relaysec/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

namespace relaysec::numerics {

double lambert_w0(double x) {
  if (std::isnan(x)) {
    throw std::domain_error("lambert_w0: NaN argument");
  }
  constexpr double kBranchTol = 1e-14;
  if (x < -kInvE - kBranchTol) {
    std::ostringstream msg;
    msg << "lambert_w0: argument " << x << " below branch point -1/e";
    throw std::domain_error(msg.str());
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;

  const double branch_gap = x + kInvE;
  if (branch_gap <= 0.0) return -1.0;

  double w;
  if (branch_gap < 1e-3) {
    // Series about the branch point in p = sqrt(2(e x + 1)).
    const double p = std::sqrt(2.0 * std::exp(1.0) * branch_gap);
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    if (p < 1e-7) return w;
  } else if (x < 3.0) {
    w = std::log1p(x);
    w = w * (1.0 - std::log1p(w) / (2.0 + w));
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }

  for (int iter = 0; iter < 64; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double step = f / denom;
    w -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(w))) break;
  }
  return std::max(w, -1.0);
}

double erfc_scaled(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) {
    // erfcx(-y) = 2 exp(y^2) - erfcx(y)
    return 2.0 * std::exp(x * x) - erfc_scaled(-x);
  }
  if (x < 4.0) {
    return std::exp(x * x) * std::erfc(x);
  }
  if (std::isinf(x)) return 0.0;
  // Continued fraction 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), evaluated
  // bottom-up; 40 levels reach full double precision for x >= 4.
  double tail = 0.0;
  for (int k = 40; k >= 1; --k) {
    tail = (0.5 * k) / (x + tail);
  }
  return 1.0 / (kSqrtPi * (x + tail));
}

double exp_times_erfc(double log_scale, double z) {
  if (z >= 0.0) {
    return std::exp(log_scale - z * z) * erfc_scaled(z);
  }
  return std::exp(log_scale) * std::erfc(z);
}

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_subdivisions < 1) {
    throw std::invalid_argument("QuadratureSpec: abs_tol, rel_tol must be > 0 and max_subdivisions >= 1");
  }
}

QuadratureError::QuadratureError(double estimate, double error_bound)
    : std::runtime_error([&] {
        std::ostringstream msg;
        msg << "quadrature did not converge: estimate " << estimate << ", error bound " << error_bound;
        return msg.str();
      }()),
      estimate_(estimate),
      error_bound_(error_bound) {}

namespace {

// Kronrod 15-point nodes (non-negative half) and weights; the odd-indexed
// nodes are the 7-point Gauss nodes.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gauss_kronrod_15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * pair;
    if (j % 2 == 1) gauss += kWg[j / 2] * pair;
  }
  const double value = kronrod * half;
  const double error = std::abs((kronrod - gauss) * half);
  return {a, b, value, error};
}

}  // namespace

QuadratureResult integrate_detailed(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureSpec& spec) {
  spec.validate();
  if (!(a <= b)) {
    throw std::invalid_argument("integrate: requires a <= b");
  }
  if (a == b) return {0.0, 0.0, 0};

  std::priority_queue<Panel> panels;
  Panel first = gauss_kronrod_15(f, a, b);
  double total = first.value;
  double total_err = first.error;
  panels.push(first);
  int subdivisions = 0;

  auto converged = [&] { return total_err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };

  while (!converged()) {
    if (subdivisions >= spec.max_subdivisions) {
      throw QuadratureError(total, total_err);
    }
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = gauss_kronrod_15(f, worst.a, mid);
    const Panel right = gauss_kronrod_15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++subdivisions;
  }

  // Re-sum from the panels to shed the drift of incremental updates.
  double sum = 0.0;
  double err = 0.0;
  while (!panels.empty()) {
    sum += panels.top().value;
    err += panels.top().error;
    panels.pop();
  }
  if (!std::isfinite(sum)) {
    throw QuadratureError(sum, err);
  }
  return {sum, err, subdivisions};
}

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kStreamSalt = 0x632BE59BD9B4E019ULL;
}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(mix64(seed ^ mix64(stream + kStreamSalt))) {}

RandomStream::result_type RandomStream::operator()() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RandomStream::uniform_open_closed() noexcept {
  return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
}

double RandomStream::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

RandomStream RandomStream::substream(std::uint64_t index) const noexcept {
  return RandomStream(key_, index);
}

double exponential_from_uniform(double mean, double u) {
  if (!(mean > 0.0)) {
    throw std::domain_error("sample_exponential: mean must be > 0");
  }
  if (!(u > 0.0 && u <= 1.0)) {
    throw std::domain_error("sample_exponential: uniform must lie in (0, 1]");
  }
  return -mean * std::log(u);
}

double sample_exponential(double mean, RandomStream& rng) {
  if (!(mean > 0.0)) {
    throw std::domain_error("sample_exponential: mean must be > 0");
  }
  return -mean * std::log(rng.uniform_open_closed());
}

}  // namespace relaysec::numerics

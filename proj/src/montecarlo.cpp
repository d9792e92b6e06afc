#include "tightfb/montecarlo.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "tightfb/errors.hpp"
#include "tightfb/frame.hpp"

namespace tightfb {

bool TightnessEstimate::within(double k) const {
  return std::abs(mean_ratio - 1.0) <= k * stderr_;
}

namespace {

RealVec unit_signal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  RealVec x(n);
  for (double& v : x) v = gauss(rng);
  const double norm = std::sqrt(squared_norm(x));
  for (double& v : x) v /= norm;
  return x;
}

// Per-trial seeds are seed + trial + 1, so trials do not depend on order.
template <typename EnergyFn>
TightnessEstimate estimate(std::size_t trials, double constant, EnergyFn&& energy) {
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const double r = energy(t) / constant;
    const double delta = r - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (r - mean);
  }
  const double variance = m2 / static_cast<double>(trials - 1);
  TightnessEstimate out;
  out.mean_ratio = mean;
  out.stderr_ = std::sqrt(variance / static_cast<double>(trials));
  out.trials = trials;
  out.expected_constant = constant;
  return out;
}

void check_trials(std::size_t trials) {
  if (trials < kMinTrials) {
    throw InvalidArgument("need at least " + std::to_string(kMinTrials) + " trials");
  }
}

}  // namespace

TightnessEstimate verify_random_tightness(std::size_t channels, std::size_t length,
                                          double sigma2, std::size_t n, std::size_t trials,
                                          std::uint64_t seed) {
  check_trials(trials);
  if (length > n) throw InvalidArgument("filter length exceeds N");
  const RealVec x = unit_signal(n, seed);
  const double constant = static_cast<double>(channels * length) * sigma2;
  return estimate(trials, constant, [&](std::size_t t) {
    const Filterbank fb = make_random(channels, length, sigma2, 1, seed + t + 1);
    return analyze(fb, x).squared_norm();
  });
}

TightnessEstimate verify_hybrid_tightness(const Filterbank& fixed, std::size_t length,
                                          double sigma2, std::size_t n, std::size_t trials,
                                          std::uint64_t seed) {
  check_trials(trials);
  if (length > n) throw InvalidArgument("filter length exceeds N");
  const FrameBounds b = frame_bounds_fft(fixed, n);
  if (!b.is_frame() || b.kappa > 1.0 + 1e-6) {
    std::ostringstream msg;
    msg.precision(10);
    msg << "fixed filterbank is not tight (kappa = " << b.kappa << "); A_Psi is undefined";
    throw DomainError(msg.str());
  }
  const double a_psi = b.A;
  const RealVec x = unit_signal(n, seed);
  const double constant = a_psi * static_cast<double>(length) * sigma2;
  return estimate(trials, constant, [&](std::size_t t) {
    const Filterbank trainable = make_random(fixed.size(), length, sigma2, 1, seed + t + 1);
    const Filterbank hybrid = compose_hybrid(fixed, trainable, std::size_t{1}, n);
    return analyze(hybrid, x).squared_norm();
  });
}

}  // namespace tightfb

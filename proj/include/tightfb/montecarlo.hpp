#pragma once

#include <cstddef>
#include <cstdint>

#include "tightfb/filterbank.hpp"

namespace tightfb {

struct TightnessEstimate {
  double mean_ratio = 0.0;
  double stderr_ = 0.0;
  std::size_t trials = 0;
  double expected_constant = 0.0;

  // |mean_ratio - 1| <= k * stderr
  bool within(double k) const;
};

inline constexpr std::size_t kMinTrials = 100;

// Monte Carlo estimate of E|Phi x|^2 / (J T sigma2 |x|^2) over random banks
// for one fixed unit-norm x.
TightnessEstimate verify_random_tightness(std::size_t channels, std::size_t length,
                                          double sigma2, std::size_t n, std::size_t trials,
                                          std::uint64_t seed);

// Same for hybrid banks built on a tight fixed part with bound A_Psi; the
// constant is A_Psi T sigma2.
TightnessEstimate verify_hybrid_tightness(const Filterbank& fixed, std::size_t length,
                                          double sigma2, std::size_t n, std::size_t trials,
                                          std::uint64_t seed);

}  // namespace tightfb

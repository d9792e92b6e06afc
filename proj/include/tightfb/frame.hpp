#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "tightfb/filterbank.hpp"
#include "tightfb/signal.hpp"

namespace tightfb {

inline constexpr double kInfiniteKappa = std::numeric_limits<double>::infinity();

// Spectrum values at or below this fraction of the maximum are treated as
// exact zeros, so a filterbank with a spectral null reports A = 0.
inline constexpr double kSpectralZeroFloor = 1e-20;

// Largest signal length accepted by frame_bounds_exact.
inline constexpr std::size_t kMaxDenseLength = 4096;

struct FrameBounds {
  double A = 0.0;
  double B = 0.0;
  double kappa = kInfiniteKappa;
  // Undecimated: S[k] = sum_j |w_j^[k]|^2. Dense: ascending eigenvalues.
  RealVec spectrum;
  std::size_t argmin_bin = 0;
  std::size_t argmax_bin = 0;

  bool is_frame() const { return A > 0.0; }
};

RealVec frame_spectrum(const Filterbank& fb, std::size_t n);
FrameBounds bounds_from_spectrum(RealVec spectrum);

// Bounds from the undecimated spectrum; the hop is ignored.
FrameBounds frame_bounds_fft(const Filterbank& fb, std::size_t n);
// Extreme eigenvalues of the dense decimated frame operator.
FrameBounds frame_bounds_exact(const Filterbank& fb, std::size_t n, std::size_t hop);
FrameBounds frame_bounds_fft(const HybridParts& parts, std::size_t n);

// d kappa / d Re w_j[t] and d kappa / d Im w_j[t] for every filter entry.
// Rows of filters not flagged trainable are left at zero.
struct KappaGradient {
  std::vector<RealVec> d_real;
  std::vector<RealVec> d_imag;
  FrameBounds bounds;
  // The spectrum extremum is attained at more than one bin, so the result is
  // one element of the subdifferential.
  bool at_tie = false;

  double norm() const;
};

KappaGradient kappa_gradient(const Filterbank& fb, std::size_t n,
                             const std::vector<bool>& trainable_mask);
// Gradients for the trainable part of a hybrid bank. The fixed part is
// never trainable and gets no gradient rows.
KappaGradient kappa_gradient(const HybridParts& parts, std::size_t n,
                             const std::vector<bool>& trainable_mask);

bool is_tight(const Filterbank& fb, std::size_t n, double tol);

struct Reconstruction {
  Signal signal;
  double recon_error = 0.0;
};

// x^ = Phi^T Phi x / A with A from the undecimated spectrum.
Reconstruction reconstruct(const Filterbank& fb, const Signal& x);
// x^ = Phi^T Phi x * scale for a caller-chosen scale.
Reconstruction reconstruct_scaled(const Filterbank& fb, const Signal& x, double scale);

}  // namespace tightfb

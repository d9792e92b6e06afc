#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tightfb {

using Complex = std::complex<double>;
using ComplexVec = std::vector<Complex>;
using RealVec = std::vector<double>;

class Filterbank;

// Finite real audio vector with its sample rate.
class Signal {
 public:
  Signal() = default;
  Signal(RealVec samples, int sample_rate);

  const RealVec& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  int sample_rate() const { return sample_rate_; }
  double operator[](std::size_t i) const { return samples_[i]; }

 private:
  RealVec samples_;
  int sample_rate_ = 16000;
};

// Analysis output: rows are hop-spaced frames, columns are channels.
class Coefficients {
 public:
  Coefficients() = default;
  Coefficients(std::size_t frames, std::size_t channels, std::size_t hop,
               std::size_t source_length);

  std::size_t frames() const { return frames_; }
  std::size_t channels() const { return channels_; }
  std::size_t hop() const { return hop_; }
  std::size_t source_length() const { return source_length_; }

  Complex& operator()(std::size_t n, std::size_t j) { return values_[n * channels_ + j]; }
  const Complex& operator()(std::size_t n, std::size_t j) const {
    return values_[n * channels_ + j];
  }

  // Row-major storage, frames x channels.
  std::span<Complex> values() { return values_; }
  std::span<const Complex> values() const { return values_; }

  double squared_norm() const;

 private:
  std::size_t frames_ = 0;
  std::size_t channels_ = 0;
  std::size_t hop_ = 1;
  std::size_t source_length_ = 0;
  std::vector<Complex> values_;
};

// Forward DFT with kernel exp(-2 pi i k n / N), no scaling.
ComplexVec dft(std::span<const Complex> v);
// Inverse DFT, scaled by 1/N.
ComplexVec idft(std::span<const Complex> v);
ComplexVec dft_real(std::span<const double> v);
// Zero-pads `v` to length `n` and transforms. `v.size() <= n` is required.
ComplexVec dft_padded(std::span<const Complex> v, std::size_t n);

// out[n] = sum_{k<T} w[k] x[(n-k) mod N], evaluated through the DFT.
ComplexVec circular_convolve(std::span<const double> x, std::span<const Complex> w);
// Same sum evaluated term by term, O(N T).
ComplexVec circular_convolve_direct(std::span<const double> x, std::span<const Complex> w);

// (Phi x)[m, j] = (x * w_j)[m * hop], circular boundary.
Coefficients analyze(const Filterbank& fb, const Signal& x);
Coefficients analyze(const Filterbank& fb, std::span<const double> x);

// Adjoint of analyze under Re<.,.>; the result has length c.source_length().
Signal synthesize(const Filterbank& fb, const Coefficients& c, int sample_rate = 16000);
RealVec synthesize_samples(const Filterbank& fb, const Coefficients& c);

// Re <a, b> = sum Re(a conj(b)).
double real_inner(const Coefficients& a, const Coefficients& b);
double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);

}  // namespace tightfb

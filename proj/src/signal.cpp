#include "tightfb/signal.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <utility>

#include <fftw3.h>

#include "tightfb/errors.hpp"
#include "tightfb/filterbank.hpp"

namespace tightfb {

namespace {

// FFTW plans are cached per (length, direction). Planning is not
// thread-safe, execution on fresh arrays is.
fftw_plan plan_for(std::size_t n, int sign) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, int>, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = plans.find({n, sign});
  if (it != plans.end()) return it->second;
  std::vector<Complex> scratch(n);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), buf, buf,
                                 sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (p == nullptr) throw ResourceError("FFTW could not plan a transform of length " + std::to_string(n));
  plans.emplace(std::make_pair(n, sign), p);
  return p;
}

ComplexVec transform(std::span<const Complex> x, int sign) {
  ComplexVec out(x.begin(), x.end());
  if (out.size() <= 1) return out;
  auto* buf = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plan_for(out.size(), sign), buf, buf);
  return out;
}

void require_finite(std::span<const double> v, const char* what) {
  for (double s : v) {
    if (!std::isfinite(s)) throw InvalidArgument(std::string(what) + " contains non-finite values");
  }
}

void check_analyzable(const Filterbank& fb, std::size_t n) {
  if (fb.size() == 0) throw InvalidArgument("filterbank has no filters");
  if (n == 0) throw InvalidArgument("signal is empty");
  if (fb.hop() == 0 || n % fb.hop() != 0) {
    throw InvalidArgument("hop " + std::to_string(fb.hop()) + " does not divide signal length " +
                          std::to_string(n));
  }
  if (fb.max_length() > n) {
    throw InvalidArgument("filter length " + std::to_string(fb.max_length()) +
                          " exceeds signal length " + std::to_string(n));
  }
}

}  // namespace

Signal::Signal(RealVec samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (samples_.empty()) throw InvalidArgument("signal must have at least one sample");
  if (sample_rate_ <= 0) throw InvalidArgument("sample rate must be positive");
  require_finite(samples_, "signal");
}

Coefficients::Coefficients(std::size_t frames, std::size_t channels, std::size_t hop,
                           std::size_t source_length)
    : frames_(frames),
      channels_(channels),
      hop_(hop),
      source_length_(source_length),
      values_(frames * channels) {}

double Coefficients::squared_norm() const {
  double acc = 0.0;
  for (const Complex& v : values_) acc += std::norm(v);
  return acc;
}

ComplexVec dft(std::span<const Complex> v) {
  if (v.empty()) throw InvalidArgument("dft of an empty vector");
  return transform(v, -1);
}

ComplexVec idft(std::span<const Complex> v) {
  if (v.empty()) throw InvalidArgument("idft of an empty vector");
  ComplexVec out = transform(v, +1);
  const double scale = 1.0 / static_cast<double>(v.size());
  for (Complex& c : out) c *= scale;
  return out;
}

ComplexVec dft_real(std::span<const double> v) {
  ComplexVec c(v.begin(), v.end());
  return dft(c);
}

ComplexVec dft_padded(std::span<const Complex> v, std::size_t n) {
  if (v.size() > n) throw InvalidArgument("cannot zero-pad a vector to a shorter length");
  ComplexVec padded(n);
  std::copy(v.begin(), v.end(), padded.begin());
  return dft(padded);
}

ComplexVec circular_convolve(std::span<const double> x, std::span<const Complex> w) {
  if (x.empty()) throw InvalidArgument("circular_convolve: empty signal");
  if (w.size() > x.size()) throw InvalidArgument("circular_convolve: filter longer than signal");
  const std::size_t n = x.size();
  const ComplexVec xf = dft_real(x);
  const ComplexVec wf = dft_padded(w, n);
  ComplexVec prod(n);
  for (std::size_t k = 0; k < n; ++k) prod[k] = xf[k] * wf[k];
  return idft(prod);
}

ComplexVec circular_convolve_direct(std::span<const double> x, std::span<const Complex> w) {
  if (x.empty()) throw InvalidArgument("circular_convolve: empty signal");
  if (w.size() > x.size()) throw InvalidArgument("circular_convolve: filter longer than signal");
  const std::size_t n = x.size();
  ComplexVec out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Complex acc{};
    for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * x[(i + n - k) % n];
    out[i] = acc;
  }
  return out;
}

Coefficients analyze(const Filterbank& fb, const Signal& x) { return analyze(fb, x.samples()); }

Coefficients analyze(const Filterbank& fb, std::span<const double> x) {
  const std::size_t n = x.size();
  check_analyzable(fb, n);
  const std::size_t hop = fb.hop();
  const std::size_t frames = n / hop;
  Coefficients out(frames, fb.size(), hop, n);
  const ComplexVec xf = dft_real(x);
  ComplexVec prod(n);
  for (std::size_t j = 0; j < fb.size(); ++j) {
    const ComplexVec wf = dft_padded(fb.filter(j), n);
    for (std::size_t k = 0; k < n; ++k) prod[k] = xf[k] * wf[k];
    const ComplexVec y = idft(prod);
    for (std::size_t m = 0; m < frames; ++m) out(m, j) = y[m * hop];
  }
  return out;
}

RealVec synthesize_samples(const Filterbank& fb, const Coefficients& c) {
  const std::size_t n = c.source_length();
  check_analyzable(fb, n);
  if (c.channels() != fb.size() || c.hop() != fb.hop() || c.frames() != n / fb.hop()) {
    throw InvalidArgument("coefficient shape does not match the filterbank");
  }
  // Phi^T c = Re idft( sum_j U_j conj(W_j) ), U_j the zero-stuffed channel.
  ComplexVec acc(n);
  ComplexVec up(n);
  for (std::size_t j = 0; j < fb.size(); ++j) {
    std::fill(up.begin(), up.end(), Complex{});
    for (std::size_t m = 0; m < c.frames(); ++m) up[m * c.hop()] = c(m, j);
    const ComplexVec uf = dft(up);
    const ComplexVec wf = dft_padded(fb.filter(j), n);
    for (std::size_t k = 0; k < n; ++k) acc[k] += uf[k] * std::conj(wf[k]);
  }
  const ComplexVec y = idft(acc);
  RealVec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = y[i].real();
  return out;
}

Signal synthesize(const Filterbank& fb, const Coefficients& c, int sample_rate) {
  return Signal(synthesize_samples(fb, c), sample_rate);
}

double real_inner(const Coefficients& a, const Coefficients& b) {
  if (a.frames() != b.frames() || a.channels() != b.channels()) {
    throw InvalidArgument("coefficient shapes differ");
  }
  double acc = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) acc += (av[i] * std::conj(bv[i])).real();
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

}  // namespace tightfb

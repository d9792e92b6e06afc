#include "tightfb/frame.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "tightfb/errors.hpp"

namespace tightfb {

RealVec frame_spectrum(const Filterbank& fb, std::size_t n) {
  if (fb.max_length() > n) {
    throw InvalidArgument("frame bounds: filter length " + std::to_string(fb.max_length()) +
                          " exceeds N = " + std::to_string(n));
  }
  RealVec s(n, 0.0);
  for (const ComplexVec& f : fb.filters()) {
    const ComplexVec w = dft_padded(f, n);
    for (std::size_t k = 0; k < n; ++k) s[k] += std::norm(w[k]);
  }
  return s;
}

FrameBounds bounds_from_spectrum(RealVec spectrum) {
  if (spectrum.empty()) throw InvalidArgument("empty spectrum");
  FrameBounds fb;
  // min_element / max_element return the first extremum: ties go to the
  // lowest bin.
  fb.argmin_bin = static_cast<std::size_t>(
      std::min_element(spectrum.begin(), spectrum.end()) - spectrum.begin());
  fb.argmax_bin = static_cast<std::size_t>(
      std::max_element(spectrum.begin(), spectrum.end()) - spectrum.begin());
  fb.B = spectrum[fb.argmax_bin];
  fb.A = spectrum[fb.argmin_bin];
  if (fb.A <= kSpectralZeroFloor * fb.B) {
    fb.A = 0.0;
    spectrum[fb.argmin_bin] = 0.0;
  }
  fb.kappa = fb.A > 0.0 ? fb.B / fb.A : kInfiniteKappa;
  fb.spectrum = std::move(spectrum);
  return fb;
}

FrameBounds frame_bounds_fft(const Filterbank& fb, std::size_t n) {
  return bounds_from_spectrum(frame_spectrum(fb, n));
}

FrameBounds frame_bounds_fft(const HybridParts& parts, std::size_t n) {
  return frame_bounds_fft(compose_hybrid(parts), n);
}

FrameBounds frame_bounds_exact(const Filterbank& fb, std::size_t n, std::size_t hop) {
  if (n > kMaxDenseLength) {
    throw ResourceError("frame_bounds_exact: N = " + std::to_string(n) + " exceeds " +
                        std::to_string(kMaxDenseLength) + "; use frame_bounds_fft instead");
  }
  if (hop == 0 || n % hop != 0) {
    throw InvalidArgument("frame_bounds_exact: hop " + std::to_string(hop) + " does not divide N = " +
                          std::to_string(n));
  }
  if (fb.max_length() > n) throw InvalidArgument("frame_bounds_exact: filter longer than N");
  // Row (m, j) of the analysis matrix is t -> w_j[(m hop - t) mod N]; the real
  // frame operator is the Gram matrix of the real and imaginary rows.
  // Rows are accumulated in blocks to bound memory.
  constexpr Eigen::Index kBlockRows = 512;
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd sym = Eigen::MatrixXd::Zero(N, N);
  Eigen::MatrixXd block(kBlockRows, N);
  Eigen::Index used = 0;
  auto flush = [&] {
    if (used == 0) return;
    sym.selfadjointView<Eigen::Lower>().rankUpdate(block.topRows(used).transpose());
    used = 0;
  };
  for (const ComplexVec& w : fb.filters()) {
    for (std::size_t m = 0; m < n; m += hop) {
      if (used + 2 > kBlockRows) flush();
      block.row(used).setZero();
      block.row(used + 1).setZero();
      for (std::size_t k = 0; k < w.size(); ++k) {
        const auto t = static_cast<Eigen::Index>((m + n - k) % n);
        block(used, t) = w[k].real();
        block(used + 1, t) = w[k].imag();
      }
      used += 2;
    }
  }
  flush();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw DomainError("frame operator eigensolver failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  RealVec spectrum(ev.data(), ev.data() + ev.size());
  // Eigenvalues carry O(eps * B * N) noise; clamp the negative side to zero.
  const double tol = 1e-12 * std::max(spectrum.back(), 0.0);
  for (double& v : spectrum) {
    if (std::abs(v) <= tol) v = 0.0;
  }
  return bounds_from_spectrum(std::move(spectrum));
}

double KappaGradient::norm() const {
  double acc = 0.0;
  for (const RealVec& r : d_real) {
    for (double v : r) acc += v * v;
  }
  for (const RealVec& r : d_imag) {
    for (double v : r) acc += v * v;
  }
  return std::sqrt(acc);
}

namespace {

// dS[k]/d Re w[t] = 2 Re(G[k] e^{2 pi i k t / N}) and
// dS[k]/d Im w[t] = 2 Im(G[k] e^{2 pi i k t / N}), where G is w^[k] scaled by
// any fixed factor |psi^[k]|^2 the channel carries.
void accumulate(const Complex& g, std::size_t k, std::size_t n, double weight, RealVec& dre,
                RealVec& dim) {
  for (std::size_t t = 0; t < dre.size(); ++t) {
    const double phase =
        2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
    const Complex z = g * std::polar(1.0, phase);
    dre[t] += weight * 2.0 * z.real();
    dim[t] += weight * 2.0 * z.imag();
  }
}

bool has_tie(const RealVec& s, std::size_t at) {
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k != at && s[k] == s[at]) return true;
  }
  return false;
}

// Shared body: `trainable` holds the filters being differentiated and
// `gain[j][k]` the |psi_j^[k]|^2 factor (1 for plain banks).
KappaGradient kappa_gradient_impl(const Filterbank& trainable,
                                  const std::vector<RealVec>* gain, std::size_t n,
                                  const std::vector<bool>& mask) {
  if (mask.size() != trainable.size()) {
    throw InvalidArgument("trainable mask has " + std::to_string(mask.size()) +
                          " entries for " + std::to_string(trainable.size()) + " filters");
  }
  if (trainable.max_length() > n) throw InvalidArgument("kappa_gradient: filter longer than N");
  std::vector<ComplexVec> spectra;
  spectra.reserve(trainable.size());
  RealVec s(n, 0.0);
  for (std::size_t j = 0; j < trainable.size(); ++j) {
    spectra.push_back(dft_padded(trainable.filter(j), n));
    for (std::size_t k = 0; k < n; ++k) {
      const double g = gain ? (*gain)[j][k] : 1.0;
      s[k] += g * std::norm(spectra[j][k]);
    }
  }
  KappaGradient out;
  out.bounds = bounds_from_spectrum(s);
  if (!out.bounds.is_frame()) {
    throw DomainError("gradient undefined: not a frame (A = 0 at bin " +
                      std::to_string(out.bounds.argmin_bin) + ")");
  }
  const double A = out.bounds.A;
  const double B = out.bounds.B;
  const std::size_t ka = out.bounds.argmin_bin;
  const std::size_t kb = out.bounds.argmax_bin;
  out.at_tie = has_tie(out.bounds.spectrum, ka) || has_tie(out.bounds.spectrum, kb);

  out.d_real.resize(trainable.size());
  out.d_imag.resize(trainable.size());
  for (std::size_t j = 0; j < trainable.size(); ++j) {
    const std::size_t len = trainable.filter(j).size();
    out.d_real[j].assign(len, 0.0);
    out.d_imag[j].assign(len, 0.0);
    if (!mask[j]) continue;
    const double ga = gain ? (*gain)[j][ka] : 1.0;
    const double gb = gain ? (*gain)[j][kb] : 1.0;
    // d kappa = (dB A - B dA) / A^2
    accumulate(spectra[j][kb], kb, n, gb / A, out.d_real[j], out.d_imag[j]);
    accumulate(spectra[j][ka], ka, n, -ga * B / (A * A), out.d_real[j], out.d_imag[j]);
  }
  return out;
}

}  // namespace

KappaGradient kappa_gradient(const Filterbank& fb, std::size_t n,
                             const std::vector<bool>& trainable_mask) {
  return kappa_gradient_impl(fb, nullptr, n, trainable_mask);
}

KappaGradient kappa_gradient(const HybridParts& parts, std::size_t n,
                             const std::vector<bool>& trainable_mask) {
  if (parts.fixed.size() != parts.trainable.size()) {
    throw InvalidArgument("hybrid parts have different channel counts");
  }
  if (parts.wrap_length != 0 && parts.wrap_length != n) {
    throw InvalidArgument("hybrid wrap length differs from N");
  }
  if (parts.wrap_length == 0 &&
      parts.fixed.max_length() + parts.trainable.max_length() - 1 > n) {
    throw InvalidArgument("composed filter length exceeds N");
  }
  // Composition is a product in the frequency domain, so only |psi^|^2 enters.
  std::vector<RealVec> gain;
  gain.reserve(parts.fixed.size());
  for (const ComplexVec& f : parts.fixed.filters()) {
    ComplexVec folded = fold(f, n);
    folded.resize(n);
    const ComplexVec p = dft(folded);
    RealVec g(n);
    for (std::size_t k = 0; k < n; ++k) g[k] = std::norm(p[k]);
    gain.push_back(std::move(g));
  }
  return kappa_gradient_impl(parts.trainable, &gain, n, trainable_mask);
}

bool is_tight(const Filterbank& fb, std::size_t n, double tol) {
  const FrameBounds b = frame_bounds_fft(fb, n);
  return b.is_frame() && b.kappa <= 1.0 + tol;
}

Reconstruction reconstruct_scaled(const Filterbank& fb, const Signal& x, double scale) {
  const RealVec y = synthesize_samples(fb, analyze(fb, x));
  RealVec xr(y.size());
  double err2 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    xr[i] = y[i] * scale;
    err2 += (xr[i] - x[i]) * (xr[i] - x[i]);
  }
  const double norm2 = squared_norm(x.samples());
  Reconstruction out{Signal(std::move(xr), x.sample_rate()), 0.0};
  out.recon_error = norm2 > 0.0 ? std::sqrt(err2 / norm2) : 0.0;
  return out;
}

Reconstruction reconstruct(const Filterbank& fb, const Signal& x) {
  const FrameBounds b = frame_bounds_fft(fb, x.size());
  if (!b.is_frame()) throw DomainError("reconstruct: filterbank is not a frame (A = 0)");
  return reconstruct_scaled(fb, x, 1.0 / b.A);
}

}  // namespace tightfb

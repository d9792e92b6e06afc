#include "tightfb/objectives.hpp"

#include <cmath>
#include <limits>

#include "tightfb/errors.hpp"
#include "tightfb/frame.hpp"

namespace tightfb {

void MCSParams::validate() const {
  if (!(c > 0.0 && c <= 1.0)) throw InvalidArgument("MCS compression c must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("MCS gamma must lie in [0, 1]");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgument("MCS beta must be >= 0");
}

Complex compress(Complex value, double c) {
  const double mag = std::abs(value);
  if (mag == 0.0) return Complex{};
  return value * (std::pow(mag, c) / mag);
}

MCSTerms mcs_terms(const Coefficients& reference, const Coefficients& estimate, double c) {
  if (reference.frames() != estimate.frames() || reference.channels() != estimate.channels()) {
    throw InvalidArgument("mcs: coefficient shapes differ");
  }
  MCSTerms terms;
  const auto r = reference.values();
  const auto e = estimate.values();
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Complex cr = compress(r[i], c);
    const Complex ce = compress(e[i], c);
    terms.phase_aware += std::norm(cr - ce);
    const double dm = std::abs(cr) - std::abs(ce);
    terms.magnitude += dm * dm;
  }
  return terms;
}

double mcs(const Coefficients& reference, const Coefficients& estimate, const MCSParams& p) {
  p.validate();
  return mcs_terms(reference, estimate, p.c).mix(p.gamma);
}

double mcs(const Signal& x, const Signal& x_tilde, const Filterbank& fb, const MCSParams& p) {
  if (x.size() != x_tilde.size()) {
    throw InvalidArgument("mcs: signal lengths differ (" + std::to_string(x.size()) + " vs " +
                          std::to_string(x_tilde.size()) + ")");
  }
  return mcs(analyze(fb, x), analyze(fb, x_tilde), p);
}

double mcs_beta(const Signal& x, const Signal& x_tilde, const Filterbank& fb,
                const MCSParams& p, std::size_t n) {
  const FrameBounds b = frame_bounds_fft(fb, n);
  if (!b.is_frame()) throw DomainError("mcs_beta: kappa is infinite (filterbank is not a frame)");
  return mcs(x, x_tilde, fb, p) + p.beta * b.kappa;
}

double si_sdr(std::span<const double> reference, std::span<const double> estimate) {
  if (reference.size() != estimate.size()) throw InvalidArgument("si_sdr: length mismatch");
  const double ref_energy = squared_norm(reference);
  if (ref_energy == 0.0) throw InvalidArgument("si_sdr: reference has zero energy");
  const double alpha = dot(estimate, reference) / ref_energy;
  if (alpha == 0.0) return -std::numeric_limits<double>::infinity();
  double target = 0.0;
  double distortion = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double s = alpha * reference[i];
    target += s * s;
    distortion += (s - estimate[i]) * (s - estimate[i]);
  }
  if (distortion == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(target / distortion);
}

double si_sdr(const Signal& reference, const Signal& estimate) {
  return si_sdr(reference.samples(), estimate.samples());
}

double recon_snr(std::span<const double> reference, std::span<const double> estimate) {
  if (reference.size() != estimate.size()) throw InvalidArgument("recon_snr: length mismatch");
  const double ref_energy = squared_norm(reference);
  if (ref_energy == 0.0) throw InvalidArgument("recon_snr: reference has zero energy");
  double err = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    err += (reference[i] - estimate[i]) * (reference[i] - estimate[i]);
  }
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ref_energy / err);
}

double recon_snr(const Signal& reference, const Signal& estimate) {
  return recon_snr(reference.samples(), estimate.samples());
}

}  // namespace tightfb

#pragma once

#include <cstddef>

#include "tightfb/filterbank.hpp"
#include "tightfb/signal.hpp"

namespace tightfb {

struct MCSParams {
  double c = 0.3;
  double gamma = 0.3;
  double beta = 1e-5;

  void validate() const;
};

// The two halves of the mixed compressed spectral loss before weighting.
struct MCSTerms {
  double phase_aware = 0.0;
  double magnitude = 0.0;

  double mix(double gamma) const { return gamma * phase_aware + (1.0 - gamma) * magnitude; }
};

// Compressed coefficient |C|^c exp(i arg C), with arg 0 := 0.
Complex compress(Complex value, double c);

MCSTerms mcs_terms(const Coefficients& reference, const Coefficients& estimate, double c);
double mcs(const Coefficients& reference, const Coefficients& estimate, const MCSParams& p);
double mcs(const Signal& x, const Signal& x_tilde, const Filterbank& fb, const MCSParams& p);

// mcs + beta * kappa, kappa from the undecimated spectrum at length n.
double mcs_beta(const Signal& x, const Signal& x_tilde, const Filterbank& fb,
                const MCSParams& p, std::size_t n);

// Scale-invariant SDR in dB; +inf on zero distortion, -inf when the
// projection of the estimate onto the reference vanishes.
double si_sdr(const Signal& reference, const Signal& estimate);
double si_sdr(std::span<const double> reference, std::span<const double> estimate);

// 10 log10(|ref|^2 / |ref - est|^2); +inf on exact match.
double recon_snr(const Signal& reference, const Signal& estimate);
double recon_snr(std::span<const double> reference, std::span<const double> estimate);

}  // namespace tightfb

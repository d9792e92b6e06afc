#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <utility>
#include <vector>

#include "tightfb/filterbank.hpp"
#include "tightfb/frame.hpp"
#include "tightfb/objectives.hpp"
#include "tightfb/signal.hpp"

namespace tightfb {

enum class OptimizerKind { kPlainSgd, kAdaptiveMoments };
enum class GradMode { kAnalyticKappaOnly, kFiniteDifferenceFull };

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t steps = 100;
  OptimizerKind optimizer = OptimizerKind::kAdaptiveMoments;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  GradMode grad_mode = GradMode::kAnalyticKappaOnly;
  double fd_step = 1e-6;

  void validate() const;
};

// First/second moment estimates with bias correction and decoupled weight
// decay; reduces to plain gradient descent for kPlainSgd.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, double weight_decay,
            std::size_t num_params);

  void step(std::span<double> params, std::span<const double> grads);
  std::size_t iterations() const { return t_; }

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

 private:
  OptimizerKind kind_;
  double lr_;
  double weight_decay_;
  std::size_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

struct TraceRow {
  std::size_t step = 0;
  double loss = 0.0;
  double mcs_term = 0.0;
  double kappa = 0.0;
  double grad_norm = 0.0;
};

struct TrainReport {
  std::vector<TraceRow> trace;  // steps + 1 rows
  Filterbank final_fb;
  // Set when tighten stopped updating because kappa <= 1 + 1e-6.
  bool converged = false;

  void write_csv(std::ostream& out) const;
};

// Trainable entries are the real parts of every flagged filter, plus the
// imaginary parts when any flagged filter starts out complex.
struct ParameterView {
  std::vector<std::size_t> filters;
  bool include_imag = false;

  static ParameterView make(const Filterbank& fb, const std::vector<bool>& mask);
  std::size_t count(const Filterbank& fb) const;
  std::vector<double> gather(const Filterbank& fb) const;
  Filterbank scatter(const Filterbank& fb, std::span<const double> params) const;
  std::vector<double> gather_gradient(const KappaGradient& g) const;
};

inline constexpr double kConvergedKappa = 1.0 + 1e-6;

// Minimizes kappa alone over the flagged filters. final_fb is the iterate
// with the lowest kappa seen, so it never ends above the starting point.
TrainReport tighten(const Filterbank& fb, const std::vector<bool>& trainable_mask,
                    std::size_t n, const TrainConfig& cfg);

using MaskArray = std::vector<double>;  // row-major, same shape as Coefficients

MaskArray ideal_ratio_mask(const Signal& clean, const Signal& noisy, const Filterbank& fb);
Signal enhance(const Filterbank& fb, const Signal& noisy, const MaskArray& mask);

// Largest number of real trainable parameters fit_hybrid accepts.
inline constexpr std::size_t kMaxFiniteDifferenceParams = 512;

struct SignalPair {
  Signal noisy;
  Signal clean;
};

struct HybridFitResult {
  TrainReport report;  // final_fb is the composed bank
  HybridParts parts;   // trained parts
};

// tighten for the trainable part of a hybrid; the fixed part is untouched.
HybridFitResult tighten(const HybridParts& parts, std::size_t n, const TrainConfig& cfg);

// Oracle-mask pipeline loss: mean_p mcs(clean, enhance(noisy)) + beta kappa.
double hybrid_loss(const HybridParts& parts, const std::vector<SignalPair>& pairs,
                   const MCSParams& p, double* mcs_term = nullptr, double* kappa = nullptr);

HybridFitResult fit_hybrid(const HybridParts& parts, const std::vector<SignalPair>& pairs,
                           const MCSParams& p, const TrainConfig& cfg);

}  // namespace tightfb

#include "tightfb/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "tightfb/errors.hpp"

namespace tightfb {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (steps == 0) throw InvalidArgument("steps must be positive");
  if (!(weight_decay >= 0.0)) throw InvalidArgument("weight decay must be non-negative");
  if (!(fd_step > 0.0 && fd_step < 1e-2)) throw InvalidArgument("fd_step must lie in (0, 1e-2)");
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, double weight_decay,
                     std::size_t num_params)
    : kind_(kind),
      lr_(learning_rate),
      weight_decay_(weight_decay),
      m_(num_params, 0.0),
      v_(num_params, 0.0) {}

void Optimizer::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw InvalidArgument("optimizer: parameter count changed");
  }
  ++t_;
  if (kind_ == OptimizerKind::kPlainSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i] -= lr_ * (grads[i] + weight_decay_ * params[i]);
    }
    return;
  }
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grads[i];
    v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grads[i] * grads[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= lr_ * (m_hat / (std::sqrt(v_hat) + kEpsilon) + weight_decay_ * params[i]);
  }
}

void TrainReport::write_csv(std::ostream& out) const {
  out << "step,loss,mcs_term,kappa,grad_norm\n";
  out.precision(17);
  for (const TraceRow& r : trace) {
    out << r.step << ',' << r.loss << ',' << r.mcs_term << ',' << r.kappa << ',' << r.grad_norm
        << '\n';
  }
}

ParameterView ParameterView::make(const Filterbank& fb, const std::vector<bool>& mask) {
  if (mask.size() != fb.size()) throw InvalidArgument("trainable mask size differs from J");
  ParameterView view;
  for (std::size_t j = 0; j < fb.size(); ++j) {
    if (!mask[j]) continue;
    view.filters.push_back(j);
    for (const Complex& v : fb.filter(j)) {
      if (v.imag() != 0.0) view.include_imag = true;
    }
  }
  return view;
}

std::size_t ParameterView::count(const Filterbank& fb) const {
  std::size_t n = 0;
  for (std::size_t j : filters) n += fb.filter(j).size();
  return include_imag ? 2 * n : n;
}

std::vector<double> ParameterView::gather(const Filterbank& fb) const {
  std::vector<double> out;
  out.reserve(count(fb));
  for (std::size_t j : filters) {
    for (const Complex& v : fb.filter(j)) out.push_back(v.real());
    if (include_imag) {
      for (const Complex& v : fb.filter(j)) out.push_back(v.imag());
    }
  }
  return out;
}

Filterbank ParameterView::scatter(const Filterbank& fb, std::span<const double> params) const {
  std::vector<ComplexVec> out = fb.filters();
  std::size_t i = 0;
  for (std::size_t j : filters) {
    ComplexVec& f = out[j];
    for (Complex& v : f) v.real(params[i++]);
    if (include_imag) {
      for (Complex& v : f) v.imag(params[i++]);
    }
  }
  return fb.with_filters(std::move(out));
}

std::vector<double> ParameterView::gather_gradient(const KappaGradient& g) const {
  std::vector<double> out;
  for (std::size_t j : filters) {
    out.insert(out.end(), g.d_real[j].begin(), g.d_real[j].end());
    if (include_imag) out.insert(out.end(), g.d_imag[j].begin(), g.d_imag[j].end());
  }
  return out;
}

namespace {

double l2(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

template <typename GradientFn, typename ScatterFn>
TrainReport run_tighten(const TrainConfig& cfg, std::vector<double> params,
                        GradientFn&& gradient, ScatterFn&& scatter, Filterbank initial) {
  Optimizer opt(cfg.optimizer, cfg.learning_rate, cfg.weight_decay, params.size());
  TrainReport report;
  report.final_fb = std::move(initial);
  double best = kInfiniteKappa;
  for (std::size_t step = 0; step <= cfg.steps; ++step) {
    std::vector<double> grad;
    FrameBounds bounds;
    try {
      std::tie(grad, bounds) = gradient(params);
    } catch (const DomainError& e) {
      throw DomainError("tighten aborted at step " + std::to_string(step) +
                        ": filterbank left the frame set (" + e.what() + ")");
    }
    report.trace.push_back({step, bounds.kappa, 0.0, bounds.kappa, l2(grad)});
    if (bounds.kappa < best) {
      best = bounds.kappa;
      report.final_fb = scatter(params);
    }
    if (step == cfg.steps) break;
    if (bounds.kappa <= kConvergedKappa) {
      report.converged = true;
      continue;
    }
    opt.step(params, grad);
  }
  return report;
}

void require_analytic(const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.grad_mode != GradMode::kAnalyticKappaOnly) {
    throw InvalidArgument("tighten requires grad_mode = analytic_kappa_only");
  }
}

}  // namespace

TrainReport tighten(const Filterbank& fb, const std::vector<bool>& trainable_mask,
                    std::size_t n, const TrainConfig& cfg) {
  require_analytic(cfg);
  const ParameterView view = ParameterView::make(fb, trainable_mask);
  if (!frame_bounds_fft(fb, n).is_frame()) {
    throw DomainError("tighten: initial filterbank is not a frame");
  }
  auto scatter = [&](std::span<const double> p) { return view.scatter(fb, p); };
  auto gradient = [&](std::span<const double> p) {
    const KappaGradient g = kappa_gradient(scatter(p), n, trainable_mask);
    return std::make_pair(view.gather_gradient(g), g.bounds);
  };
  return run_tighten(cfg, view.gather(fb), gradient, scatter, fb);
}

HybridFitResult tighten(const HybridParts& parts, std::size_t n, const TrainConfig& cfg) {
  require_analytic(cfg);
  const std::vector<bool> mask(parts.trainable.size(), true);
  const ParameterView view = ParameterView::make(parts.trainable, mask);
  auto with_params = [&](std::span<const double> p) {
    HybridParts out = parts;
    out.trainable = view.scatter(parts.trainable, p);
    return out;
  };
  if (!frame_bounds_fft(parts, n).is_frame()) {
    throw DomainError("tighten: initial hybrid filterbank is not a frame");
  }
  // Scatter into the trainable bank; composition happens once at the end.
  auto scatter = [&](std::span<const double> p) { return view.scatter(parts.trainable, p); };
  auto gradient = [&](std::span<const double> p) {
    const KappaGradient g = kappa_gradient(with_params(p), n, mask);
    return std::make_pair(view.gather_gradient(g), g.bounds);
  };
  TrainReport report = run_tighten(cfg, view.gather(parts.trainable), gradient, scatter,
                                   parts.trainable);
  HybridFitResult out;
  out.parts = parts;
  out.parts.trainable = report.final_fb;
  report.final_fb = compose_hybrid(out.parts);
  out.report = std::move(report);
  return out;
}

MaskArray ideal_ratio_mask(const Signal& clean, const Signal& noisy, const Filterbank& fb) {
  if (clean.size() != noisy.size()) throw InvalidArgument("ideal_ratio_mask: length mismatch");
  const Coefficients c = analyze(fb, clean);
  const Coefficients y = analyze(fb, noisy);
  constexpr double kFloor = 1e-12;
  MaskArray mask(c.values().size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double ratio = std::abs(c.values()[i]) / std::max(std::abs(y.values()[i]), kFloor);
    mask[i] = std::clamp(ratio, 0.0, 1.0);
  }
  return mask;
}

Signal enhance(const Filterbank& fb, const Signal& noisy, const MaskArray& mask) {
  Coefficients c = analyze(fb, noisy);
  if (mask.size() != c.values().size()) {
    throw InvalidArgument("enhance: mask has " + std::to_string(mask.size()) +
                          " entries, coefficients have " + std::to_string(c.values().size()));
  }
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!(mask[i] >= 0.0 && mask[i] <= 1.0)) {
      throw InvalidArgument("enhance: mask entries must lie in [0, 1]");
    }
    c.values()[i] *= mask[i];
  }
  const FrameBounds b = frame_bounds_fft(fb, noisy.size());
  if (!b.is_frame()) throw DomainError("enhance: filterbank is not a frame (A = 0)");
  RealVec y = synthesize_samples(fb, c);
  for (double& v : y) v /= b.A;
  return Signal(std::move(y), noisy.sample_rate());
}

namespace {

double mean_pipeline_mcs(const Filterbank& fb, const std::vector<SignalPair>& pairs,
                         const MCSParams& p) {
  double acc = 0.0;
  for (const SignalPair& pair : pairs) {
    const MaskArray mask = ideal_ratio_mask(pair.clean, pair.noisy, fb);
    const Signal estimate = enhance(fb, pair.noisy, mask);
    acc += mcs(pair.clean, estimate, fb, p);
  }
  return acc / static_cast<double>(pairs.size());
}

std::size_t common_length(const std::vector<SignalPair>& pairs) {
  if (pairs.empty()) throw InvalidArgument("fit_hybrid: no training pairs");
  const std::size_t n = pairs.front().clean.size();
  for (const SignalPair& pair : pairs) {
    if (pair.clean.size() != n || pair.noisy.size() != n) {
      throw InvalidArgument("fit_hybrid: all signals must have equal length");
    }
  }
  return n;
}

}  // namespace

double hybrid_loss(const HybridParts& parts, const std::vector<SignalPair>& pairs,
                   const MCSParams& p, double* mcs_term, double* kappa) {
  const std::size_t n = common_length(pairs);
  const Filterbank fb = compose_hybrid(parts);
  const FrameBounds b = frame_bounds_fft(fb, n);
  if (!b.is_frame()) throw DomainError("hybrid filterbank is not a frame (A = 0)");
  const double m = mean_pipeline_mcs(fb, pairs, p);
  if (mcs_term) *mcs_term = m;
  if (kappa) *kappa = b.kappa;
  return m + p.beta * b.kappa;
}

HybridFitResult fit_hybrid(const HybridParts& parts, const std::vector<SignalPair>& pairs,
                           const MCSParams& p, const TrainConfig& cfg) {
  cfg.validate();
  p.validate();
  if (cfg.grad_mode != GradMode::kFiniteDifferenceFull) {
    throw InvalidArgument("fit_hybrid requires grad_mode = finite_difference_full");
  }
  const std::size_t n = common_length(pairs);
  const std::vector<bool> mask(parts.trainable.size(), true);
  const ParameterView view = ParameterView::make(parts.trainable, mask);
  const std::size_t count = view.count(parts.trainable);
  if (count > kMaxFiniteDifferenceParams) {
    throw ResourceError("fit_hybrid: " + std::to_string(count) +
                        " trainable parameters exceed the finite-difference limit of " +
                        std::to_string(kMaxFiniteDifferenceParams) + "; reduce J or T");
  }
  auto with_params = [&](std::span<const double> q) {
    HybridParts out = parts;
    out.trainable = view.scatter(parts.trainable, q);
    return out;
  };

  std::vector<double> params = view.gather(parts.trainable);
  Optimizer opt(cfg.optimizer, cfg.learning_rate, cfg.weight_decay, params.size());
  HybridFitResult result;
  for (std::size_t step = 0; step <= cfg.steps; ++step) {
    const HybridParts current = with_params(params);
    double mcs_term = 0.0;
    double kappa = 0.0;
    double loss = 0.0;
    std::vector<double> grad(params.size(), 0.0);
    try {
      loss = hybrid_loss(current, pairs, p, &mcs_term, &kappa);
      // MCS part by central differences, kappa part analytically.
      std::vector<double> probe = params;
      for (std::size_t i = 0; i < params.size(); ++i) {
        probe[i] = params[i] + cfg.fd_step;
        const double up = mean_pipeline_mcs(compose_hybrid(with_params(probe)), pairs, p);
        probe[i] = params[i] - cfg.fd_step;
        const double down = mean_pipeline_mcs(compose_hybrid(with_params(probe)), pairs, p);
        probe[i] = params[i];
        grad[i] = (up - down) / (2.0 * cfg.fd_step);
      }
      if (p.beta > 0.0) {
        const std::vector<double> gk = view.gather_gradient(kappa_gradient(current, n, mask));
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += p.beta * gk[i];
      }
    } catch (const DomainError& e) {
      throw DomainError("fit_hybrid aborted at step " + std::to_string(step) + ": " + e.what());
    }
    result.report.trace.push_back({step, loss, mcs_term, kappa, l2(grad)});
    if (step == cfg.steps) break;
    opt.step(params, grad);
  }
  result.parts = with_params(params);
  result.report.final_fb = compose_hybrid(result.parts);
  return result;
}

}  // namespace tightfb

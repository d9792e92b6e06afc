#include "tightfb/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tightfb/errors.hpp"
#include "tightfb/filterbank.hpp"
#include "tightfb/frame.hpp"
#include "tightfb/montecarlo.hpp"
#include "tightfb/objectives.hpp"
#include "tightfb/trainer.hpp"
#include "tightfb/wav.hpp"

namespace tightfb::cli {

namespace {

using nlohmann::json;

// JSON has no infinities; non-finite values become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct GenerateArgs {
  std::string kind;
  std::size_t channels = 8;
  std::size_t length = 64;
  std::size_t hop = 1;
  double sigma2 = 0.0;
  std::uint64_t seed = 0;
  int sample_rate = 16000;
  double f_min = 0.0;
  std::optional<double> f_max;
  std::size_t tight_length = 0;
  std::string fixed_path;
  std::size_t trainable_length = 11;
  std::size_t wrap = 0;
  std::string out;
};

Filterbank auditory_from(const GenerateArgs& a) {
  AuditorySpec spec;
  spec.channels = a.channels;
  spec.sample_rate = a.sample_rate;
  spec.f_min = a.f_min;
  spec.f_max = a.f_max.value_or(0.5 * a.sample_rate);
  spec.filter_length = a.length;
  spec.hop = a.hop;
  spec.tight_length = a.tight_length;
  return make_auditory(spec);
}

Filterbank generate(const GenerateArgs& a) {
  const FilterbankKind kind = kind_from_string(a.kind);
  switch (kind) {
    case FilterbankKind::kStft:
      return make_stft(a.channels, a.length, a.hop);
    case FilterbankKind::kAuditory:
      return auditory_from(a);
    case FilterbankKind::kRandom: {
      const double sigma2 =
          a.sigma2 > 0.0 ? a.sigma2 : 1.0 / static_cast<double>(a.channels * a.length);
      return make_random(a.channels, a.length, sigma2, a.hop, a.seed);
    }
    case FilterbankKind::kHybrid: {
      const Filterbank fixed = a.fixed_path.empty() ? auditory_from(a) : load(a.fixed_path);
      const std::size_t j = fixed.size();
      const double sigma2 = a.sigma2 > 0.0 ? a.sigma2
                                           : 1.0 / static_cast<double>(j * a.trainable_length);
      const Filterbank trainable = make_random(j, a.trainable_length, sigma2, 1, a.seed);
      return compose_hybrid(fixed, trainable, fixed.hop(), a.wrap);
    }
  }
  throw InvalidArgument("unknown kind");
}

void write_json(std::ostream& out, const json& payload) { out << payload.dump() << '\n'; }

Filterbank require_frame(const Filterbank& fb, std::size_t n) {
  const FrameBounds b = frame_bounds_fft(fb, n);
  if (!b.is_frame()) {
    throw DomainError("filterbank is not a frame at N = " + std::to_string(n) +
                      " (measured A = " + std::to_string(b.A) + ")");
  }
  return fb;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frame-theoretic filterbank toolkit: build, measure, tighten and apply encoders."};
  app.name("tightfb");
  app.require_subcommand(1);

  // generate
  GenerateArgs gen;
  auto* generate_cmd = app.add_subcommand("generate", "Build a filterbank and write it as JSON");
  generate_cmd->add_option("--kind", gen.kind, "stft | auditory | random | hybrid")
      ->required()
      ->check(CLI::IsMember({"stft", "auditory", "random", "hybrid"}));
  generate_cmd->add_option("--channels,-J,--J", gen.channels,
                           "Channels (auditory: non-conjugate bands)");
  generate_cmd->add_option("--length,-T,--T", gen.length, "Filter / window length");
  generate_cmd->add_option("--hop", gen.hop, "Analysis hop");
  generate_cmd->add_option("--sigma2", gen.sigma2, "Random tap variance (default 1/(J T))");
  generate_cmd->add_option("--seed", gen.seed);
  generate_cmd->add_option("--sample-rate", gen.sample_rate);
  generate_cmd->add_option("--f-min", gen.f_min);
  generate_cmd->add_option("--f-max", gen.f_max, "Default: Nyquist");
  generate_cmd->add_option("--tight-length", gen.tight_length,
                           "Length on which an auditory bank is made tight (default: --length)");
  generate_cmd->add_option("--fixed", gen.fixed_path, "Hybrid: fixed bank JSON (default: auditory)");
  generate_cmd->add_option("--trainable-length", gen.trainable_length, "Hybrid: trainable length");
  generate_cmd->add_option("--wrap", gen.wrap, "Hybrid: fold composed filters modulo this length");
  generate_cmd->add_option("--out", gen.out)->required();

  // bounds
  std::string fb_path;
  std::size_t signal_length = 0;
  bool hop_exact = false;
  auto* bounds_cmd = app.add_subcommand("bounds", "Frame bounds A, B and condition number");
  bounds_cmd->add_option("--fb", fb_path)->required();
  bounds_cmd->add_option("--signal-length,-N,--N", signal_length)->required();
  bounds_cmd->add_flag("--hop-exact", hop_exact,
                       "Dense decimated frame operator (N <= 4096) instead of the spectrum");

  // analyze
  std::string in_path, out_path;
  bool log_mag = false;
  auto* analyze_cmd = app.add_subcommand("analyze", "Write encoder coefficients as CSV");
  analyze_cmd->add_option("--fb", fb_path)->required();
  analyze_cmd->add_option("--in", in_path)->required();
  analyze_cmd->add_option("--out", out_path)->required();
  analyze_cmd->add_flag("--log-mag", log_mag, "Write 20 log10(|c| + 1e-10) instead of re, im");

  // roundtrip
  auto* roundtrip_cmd = app.add_subcommand("roundtrip", "Analyze, synthesize and divide by A");
  roundtrip_cmd->add_option("--fb", fb_path)->required();
  roundtrip_cmd->add_option("--in", in_path)->required();

  // tighten
  std::size_t steps = 500;
  double lr = 1e-3;
  double weight_decay = 0.0;
  std::string optimizer = "adam";
  std::string trace_path;
  auto* tighten_cmd = app.add_subcommand("tighten", "Minimize kappa over trainable filters");
  tighten_cmd->add_option("--fb", fb_path)->required();
  tighten_cmd->add_option("--signal-length,-N,--N", signal_length,
                          "Spectrum length (default: longest filter)");
  tighten_cmd->add_option("--steps", steps);
  tighten_cmd->add_option("--lr", lr);
  tighten_cmd->add_option("--weight-decay", weight_decay);
  tighten_cmd->add_option("--optimizer", optimizer)->check(CLI::IsMember({"adam", "sgd"}));
  tighten_cmd->add_option("--out", out_path)->required();
  tighten_cmd->add_option("--trace", trace_path);

  // mcs
  std::string ref_path, est_path;
  MCSParams params;
  params.beta = 0.0;
  auto* mcs_cmd = app.add_subcommand("mcs", "Mixed compressed spectral loss (sum over coefficients)");
  mcs_cmd->add_option("--fb", fb_path)->required();
  mcs_cmd->add_option("--ref", ref_path)->required();
  mcs_cmd->add_option("--est", est_path)->required();
  mcs_cmd->add_option("--c", params.c)->capture_default_str();
  mcs_cmd->add_option("--gamma", params.gamma)->capture_default_str();
  mcs_cmd->add_option("--beta", params.beta, "kappa penalty weight (default 0)");

  // enhance
  std::string noisy_path, clean_path;
  auto* enhance_cmd = app.add_subcommand("enhance", "Oracle ideal-ratio-mask enhancement");
  enhance_cmd->add_option("--fb", fb_path)->required();
  enhance_cmd->add_option("--noisy", noisy_path)->required();
  enhance_cmd->add_option("--clean", clean_path)->required();
  enhance_cmd->add_option("--out", out_path)->required();

  // verify-theorem1
  std::string mode = "random";
  std::size_t J = 4, T = 8, N = 64, trials = 10000;
  double sigma2 = 0.0;
  std::uint64_t seed = 0;
  std::size_t aud_channels = 8;
  auto* verify_cmd = app.add_subcommand(
      "verify-theorem1", "Monte Carlo check of E|Phi x|^2 = const |x|^2 for random banks");
  verify_cmd->add_option("--mode", mode)->check(CLI::IsMember({"random", "hybrid"}));
  verify_cmd->add_option("--J", J, "random mode: channels");
  verify_cmd->add_option("--T", T, "random filter length");
  verify_cmd->add_option("--sigma2", sigma2, "tap variance (default 1/(J T) or 1/T)");
  verify_cmd->add_option("--N", N, "signal length");
  verify_cmd->add_option("--trials", trials);
  verify_cmd->add_option("--seed", seed);
  verify_cmd->add_option("--fb", fb_path, "hybrid mode: tight fixed bank JSON");
  verify_cmd->add_option("--bands", aud_channels,
                         "hybrid mode without --fb: auditory bands, made tight at N");

  std::vector<const char*> argv;
  argv.push_back("tightfb");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (generate_cmd->parsed()) {
      const Filterbank fb = generate(gen);
      save(fb, gen.out);
      write_json(out, {{"out", gen.out},
                       {"tag", to_string(fb.kind())},
                       {"filters", fb.size()},
                       {"length", fb.max_length()},
                       {"hop", fb.hop()}});
    } else if (bounds_cmd->parsed()) {
      const Filterbank fb = load(fb_path);
      const FrameBounds b =
          hop_exact ? frame_bounds_exact(fb, signal_length, fb.hop()) : frame_bounds_fft(fb, signal_length);
      write_json(out, {{"A", b.A},
                       {"B", b.B},
                       {"kappa", number(b.kappa)},
                       {"is_frame", b.is_frame()},
                       {"method", hop_exact ? "exact" : "fft"}});
    } else if (analyze_cmd->parsed()) {
      const Filterbank fb = load(fb_path);
      const Signal x = wav_read(in_path);
      const Coefficients c = analyze(fb, x);
      std::ofstream csv(out_path);
      if (!csv) throw IoError("cannot open " + out_path + " for writing");
      csv << std::setprecision(17);
      csv << (log_mag ? "n,j,log_magnitude_db\n" : "n,j,re,im\n");
      for (std::size_t n = 0; n < c.frames(); ++n) {
        for (std::size_t j = 0; j < c.channels(); ++j) {
          const Complex v = c(n, j);
          csv << n << ',' << j << ',';
          if (log_mag) {
            csv << 20.0 * std::log10(std::abs(v) + 1e-10) << '\n';
          } else {
            csv << v.real() << ',' << v.imag() << '\n';
          }
        }
      }
      if (!csv) throw IoError("failed writing " + out_path);
      write_json(out, {{"out", out_path}, {"frames", c.frames()}, {"channels", c.channels()}});
    } else if (roundtrip_cmd->parsed()) {
      const Filterbank fb = load(fb_path);
      const Signal x = wav_read(in_path);
      require_frame(fb, x.size());
      const Reconstruction r = reconstruct(fb, x);
      write_json(out, {{"recon_error", r.recon_error},
                       {"recon_snr_db", number(recon_snr(x, r.signal))}});
    } else if (tighten_cmd->parsed()) {
      const Filterbank fb = load(fb_path);
      const std::size_t n = signal_length ? signal_length : fb.max_length();
      TrainConfig cfg;
      cfg.steps = steps;
      cfg.learning_rate = lr;
      cfg.weight_decay = weight_decay;
      cfg.optimizer = optimizer == "sgd" ? OptimizerKind::kPlainSgd : OptimizerKind::kAdaptiveMoments;
      require_frame(fb, n);
      TrainReport report;
      if (fb.kind() == FilterbankKind::kHybrid && fb.metadata().contains("fixed")) {
        report = tighten(decompose_hybrid(fb), n, cfg).report;
      } else {
        report = tighten(fb, std::vector<bool>(fb.size(), true), n, cfg);
      }
      save(report.final_fb, out_path);
      if (!trace_path.empty()) {
        std::ofstream trace(trace_path);
        if (!trace) throw IoError("cannot open " + trace_path + " for writing");
        report.write_csv(trace);
      }
      const FrameBounds final_bounds = frame_bounds_fft(report.final_fb, n);
      write_json(out, {{"initial_kappa", number(report.trace.front().kappa)},
                       {"final_kappa", number(final_bounds.kappa)},
                       {"steps", steps},
                       {"converged", report.converged},
                       {"out", out_path}});
    } else if (mcs_cmd->parsed()) {
      const Filterbank fb = load(fb_path);
      const Signal ref = wav_read(ref_path);
      const Signal est = wav_read(est_path);
      const double loss = mcs(ref, est, fb, params);
      const FrameBounds b = frame_bounds_fft(fb, ref.size());
      json payload = {{"mcs", loss},
                      {"kappa", number(b.kappa)},
                      {"c", params.c},
                      {"gamma", params.gamma},
                      {"beta", params.beta},
                      {"normalization", "sum"}};
      if (params.beta > 0.0) require_frame(fb, ref.size());
      payload["mcs_beta"] = b.is_frame() ? json(loss + params.beta * b.kappa) : json(nullptr);
      write_json(out, payload);
    } else if (enhance_cmd->parsed()) {
      const Filterbank fb = load(fb_path);
      const Signal noisy = wav_read(noisy_path);
      const Signal clean = wav_read(clean_path);
      require_frame(fb, noisy.size());
      const Signal enhanced = enhance(fb, noisy, ideal_ratio_mask(clean, noisy, fb));
      wav_write(out_path, enhanced);
      write_json(out, {{"si_sdr_in", number(si_sdr(clean, noisy))},
                       {"si_sdr_out", number(si_sdr(clean, enhanced))},
                       {"out", out_path}});
    } else if (verify_cmd->parsed()) {
      TightnessEstimate est;
      if (mode == "random") {
        const double s2 = sigma2 > 0.0 ? sigma2 : 1.0 / static_cast<double>(J * T);
        est = verify_random_tightness(J, T, s2, N, trials, seed);
      } else {
        Filterbank fixed;
        if (!fb_path.empty()) {
          fixed = load(fb_path);
        } else {
          AuditorySpec spec;
          spec.channels = aud_channels;
          spec.filter_length = N;
          spec.hop = 1;
          fixed = make_auditory(spec);
        }
        const double s2 = sigma2 > 0.0 ? sigma2 : 1.0 / static_cast<double>(T);
        est = verify_hybrid_tightness(fixed, T, s2, N, trials, seed);
      }
      write_json(out, {{"mode", mode},
                       {"mean_ratio", est.mean_ratio},
                       {"stderr", est.stderr_},
                       {"trials", est.trials},
                       {"expected_constant", est.expected_constant},
                       {"within_3_stderr", est.within(3.0)}});
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kDomain;
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << '\n';
    return kDomain;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}

}  // namespace tightfb::cli

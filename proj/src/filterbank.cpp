#include "tightfb/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "tightfb/errors.hpp"
#include "tightfb/frame.hpp"

namespace tightfb {

namespace {

constexpr int kFormatVersion = 1;
constexpr const char* kFormatName = "tightfb.filterbank";

void validate_filters(const std::vector<ComplexVec>& filters) {
  if (filters.empty()) throw InvalidArgument("filterbank needs at least one filter");
  for (const ComplexVec& f : filters) {
    if (f.empty()) throw InvalidArgument("filterbank contains an empty filter");
    for (const Complex& v : f) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw InvalidArgument("filterbank contains non-finite taps");
      }
    }
  }
}

}  // namespace

std::string to_string(FilterbankKind kind) {
  switch (kind) {
    case FilterbankKind::kStft: return "stft";
    case FilterbankKind::kAuditory: return "auditory";
    case FilterbankKind::kRandom: return "random";
    case FilterbankKind::kHybrid: return "hybrid";
  }
  return "random";
}

FilterbankKind kind_from_string(const std::string& name) {
  if (name == "stft") return FilterbankKind::kStft;
  if (name == "auditory") return FilterbankKind::kAuditory;
  if (name == "random") return FilterbankKind::kRandom;
  if (name == "hybrid") return FilterbankKind::kHybrid;
  throw InvalidArgument("unknown filterbank kind '" + name + "'");
}

Filterbank::Filterbank(std::vector<ComplexVec> filters, std::size_t hop, FilterbankKind kind,
                       nlohmann::json metadata)
    : filters_(std::move(filters)), hop_(hop), kind_(kind), metadata_(std::move(metadata)) {
  validate_filters(filters_);
  if (hop_ == 0) throw InvalidArgument("hop must be positive");
  if (!metadata_.is_object()) throw InvalidArgument("filterbank metadata must be an object");
}

std::size_t Filterbank::max_length() const {
  std::size_t len = 0;
  for (const ComplexVec& f : filters_) len = std::max(len, f.size());
  return len;
}

bool Filterbank::is_real() const {
  for (const ComplexVec& f : filters_) {
    for (const Complex& v : f) {
      if (v.imag() != 0.0) return false;
    }
  }
  return true;
}

Filterbank Filterbank::with_filters(std::vector<ComplexVec> filters) const {
  return Filterbank(std::move(filters), hop_, kind_, metadata_);
}

Filterbank Filterbank::with_hop(std::size_t hop) const {
  return Filterbank(filters_, hop, kind_, metadata_);
}

Filterbank Filterbank::scaled(double factor) const {
  std::vector<ComplexVec> out = filters_;
  for (ComplexVec& f : out) {
    for (Complex& v : f) v *= factor;
  }
  return with_filters(std::move(out));
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_center_frequencies(std::size_t count, double f_min, double f_max) {
  if (count < 2) throw InvalidArgument("mel grid needs at least two points");
  const double lo = hz_to_mel(f_min);
  const double hi = hz_to_mel(f_max);
  std::vector<double> out(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(count - 1);
    out[j] = mel_to_hz(lo + t * (hi - lo));
  }
  // Pin the endpoints so f_min = 0 and f_max = Nyquist are hit exactly.
  out.front() = f_min;
  out.back() = f_max;
  return out;
}

Filterbank make_random(std::size_t channels, std::size_t length, double sigma2, std::size_t hop,
                       std::uint64_t seed) {
  if (channels == 0 || length == 0) throw InvalidArgument("make_random: J and T must be >= 1");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw InvalidArgument("make_random: sigma2 must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(sigma2));
  std::vector<ComplexVec> filters(channels, ComplexVec(length));
  for (ComplexVec& f : filters) {
    for (Complex& v : f) v = Complex(gauss(rng), 0.0);
  }
  nlohmann::json meta = {{"sigma2", sigma2}, {"seed", seed}};
  return Filterbank(std::move(filters), hop, FilterbankKind::kRandom, std::move(meta));
}

Filterbank make_random(std::size_t channels, std::size_t length, std::size_t hop,
                       std::uint64_t seed) {
  const double sigma2 = 1.0 / static_cast<double>(channels * length);
  return make_random(channels, length, sigma2, hop, seed);
}

Filterbank make_delta(std::size_t channels, std::size_t hop) {
  if (channels == 0) throw InvalidArgument("make_delta: need at least one channel");
  std::vector<ComplexVec> filters(channels, ComplexVec{Complex(1.0, 0.0)});
  return Filterbank(std::move(filters), hop, FilterbankKind::kRandom, {{"delta", true}});
}

RealVec hann_window(std::size_t n) {
  RealVec w(n);
  for (std::size_t t = 0; t < n; ++t) {
    w[t] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) /
                                static_cast<double>(n));
  }
  return w;
}

Filterbank make_stft(std::size_t num_channels, std::size_t window_length, std::size_t hop) {
  if (num_channels == 0 || window_length == 0) {
    throw InvalidArgument("make_stft: channels and window length must be >= 1");
  }
  if (num_channels > window_length) {
    throw InvalidArgument("make_stft: num_channels exceeds window length");
  }
  const RealVec window = hann_window(window_length);
  std::vector<ComplexVec> filters(num_channels, ComplexVec(window_length));
  for (std::size_t j = 0; j < num_channels; ++j) {
    for (std::size_t t = 0; t < window_length; ++t) {
      // (j t) mod L keeps the phase argument exact for long windows.
      const double phase = 2.0 * std::numbers::pi * static_cast<double>((j * t) % window_length) /
                           static_cast<double>(window_length);
      filters[j][t] = window[t] * std::polar(1.0, phase);
    }
  }
  nlohmann::json meta = {{"window", "hann"},
                         {"window_length", window_length},
                         {"bins", num_channels}};
  return Filterbank(std::move(filters), hop, FilterbankKind::kStft, std::move(meta));
}

namespace {

// Power response of one mel band; cos^2 flanks make neighbors sum to one.
struct Band {
  double lower;   // Hz; lower == center means a flat shoulder down to DC
  double center;
  double upper;   // upper == center means a flat shoulder up to Nyquist
  // Band sits on DC or Nyquist and is evaluated at |f|, giving a real filter.
  bool self_conjugate;
};

double band_power(const Band& b, double f, double nyquist) {
  if (b.self_conjugate) {
    f = std::abs(f);
  } else if (f < 0.0) {
    return 0.0;
  }
  const double mel_f = hz_to_mel(f);
  const double mel_c = hz_to_mel(b.center);
  if (f <= b.center) {
    if (b.lower >= b.center) return 1.0;
    const double mel_l = hz_to_mel(b.lower);
    if (mel_f <= mel_l) return 0.0;
    const double u = (mel_c - mel_f) / (mel_c - mel_l);
    const double c = std::cos(0.5 * std::numbers::pi * u);
    return c * c;
  }
  if (b.upper <= b.center) return f <= nyquist ? 1.0 : 0.0;
  const double mel_u = hz_to_mel(b.upper);
  if (mel_f >= mel_u) return 0.0;
  const double u = (mel_f - mel_c) / (mel_u - mel_c);
  const double c = std::cos(0.5 * std::numbers::pi * u);
  return c * c;
}

}  // namespace

Filterbank make_auditory(const AuditorySpec& spec) {
  const double nyquist = 0.5 * spec.sample_rate;
  if (spec.channels < 2) throw InvalidArgument("make_auditory: need at least two channels");
  if (spec.sample_rate <= 0) throw InvalidArgument("make_auditory: sample rate must be positive");
  if (!(spec.f_min >= 0.0 && spec.f_min < spec.f_max && spec.f_max <= nyquist)) {
    throw InvalidArgument("make_auditory: require 0 <= f_min < f_max <= sample_rate/2");
  }
  if (spec.filter_length < 4) throw InvalidArgument("make_auditory: filter length must be >= 4");
  if (spec.hop == 0) throw InvalidArgument("make_auditory: hop must be positive");
  const std::size_t tight_length =
      spec.tight_length == 0 ? spec.filter_length : spec.tight_length;
  if (tight_length < spec.filter_length) {
    throw InvalidArgument("make_auditory: tight_length shorter than filter_length");
  }

  const std::vector<double> centers =
      mel_center_frequencies(spec.channels, spec.f_min, spec.f_max);
  std::vector<Band> bands;
  const std::size_t J = centers.size();
  for (std::size_t j = 0; j < J; ++j) {
    Band b;
    b.center = centers[j];
    b.lower = j == 0 ? centers[j] : centers[j - 1];
    b.upper = j + 1 == J ? centers[j] : centers[j + 1];
    b.self_conjugate = centers[j] == 0.0 || centers[j] == nyquist;
    bands.push_back(b);
  }

  // Prototype on a fine grid, then cut to filter_length around the peak.
  const std::size_t grid = 4 * spec.filter_length;
  const std::size_t len = spec.filter_length;
  const std::size_t taper = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.05 * len)));
  const RealVec ramp = hann_window(2 * taper);

  auto cut = [&](const ComplexVec& response) {
    const ComplexVec impulse = idft(response);
    ComplexVec out(len);
    const std::size_t half = len / 2;
    for (std::size_t t = 0; t < len; ++t) {
      out[t] = impulse[(t + grid - half) % grid];
    }
    for (std::size_t t = 0; t < taper; ++t) {
      out[t] *= ramp[t];
      out[len - 1 - t] *= ramp[t];
    }
    return out;
  };

  auto bin_frequency = [&](std::size_t k) {
    const double f = static_cast<double>(k) * spec.sample_rate / static_cast<double>(grid);
    return k <= grid / 2 ? f : f - spec.sample_rate;
  };

  std::vector<ComplexVec> filters;
  std::vector<double> filter_centers;
  std::vector<ComplexVec> twins;
  std::vector<double> twin_centers;
  for (const Band& b : bands) {
    ComplexVec response(grid);
    ComplexVec mirrored(grid);
    for (std::size_t k = 0; k < grid; ++k) {
      const double f = bin_frequency(k);
      response[k] = std::sqrt(band_power(b, f, nyquist));
      mirrored[k] = std::sqrt(band_power(b, -f, nyquist));
    }
    filters.push_back(cut(response));
    filter_centers.push_back(b.center);
    if (!b.self_conjugate) {
      twins.push_back(cut(mirrored));
      twin_centers.push_back(-b.center);
    }
  }
  filters.insert(filters.end(), twins.begin(), twins.end());
  filter_centers.insert(filter_centers.end(), twin_centers.begin(), twin_centers.end());

  nlohmann::json meta = {{"center_frequencies_hz", filter_centers},
                         {"sample_rate", spec.sample_rate},
                         {"bands", spec.channels},
                         {"f_min", spec.f_min},
                         {"f_max", spec.f_max},
                         {"filter_length", spec.filter_length},
                         {"tight_length", tight_length},
                         {"mel_scale", "htk"}};
  Filterbank raw(std::move(filters), spec.hop, FilterbankKind::kAuditory, std::move(meta));
  return canonical_tight(raw, tight_length);
}

ComplexVec linear_convolve(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("linear_convolve: empty input");
  ComplexVec out(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) out[i + k] += a[i] * b[k];
  }
  return out;
}

ComplexVec fold(std::span<const Complex> v, std::size_t n) {
  if (n == 0) throw InvalidArgument("fold: length must be positive");
  ComplexVec out(std::min(v.size(), n));
  for (std::size_t i = 0; i < v.size(); ++i) out[i % n] += v[i];
  return out;
}

Filterbank compose_hybrid(const Filterbank& fixed, const Filterbank& trainable,
                          std::optional<std::size_t> hop, std::size_t wrap_length) {
  if (fixed.size() != trainable.size()) {
    throw InvalidArgument("compose_hybrid: channel counts differ (" + std::to_string(fixed.size()) +
                          " vs " + std::to_string(trainable.size()) + ")");
  }
  std::vector<ComplexVec> filters;
  filters.reserve(fixed.size());
  for (std::size_t j = 0; j < fixed.size(); ++j) {
    ComplexVec h = linear_convolve(fixed.filter(j), trainable.filter(j));
    if (wrap_length != 0 && h.size() > wrap_length) h = fold(h, wrap_length);
    filters.push_back(std::move(h));
  }
  const std::size_t out_hop = hop.value_or(fixed.hop());
  nlohmann::json meta = {{"fixed_kind", to_string(fixed.kind())},
                         {"trainable_kind", to_string(trainable.kind())},
                         {"wrap_length", wrap_length},
                         {"fixed", to_json(fixed)},
                         {"trainable", to_json(trainable)}};
  return Filterbank(std::move(filters), out_hop, FilterbankKind::kHybrid, std::move(meta));
}

Filterbank compose_hybrid(const HybridParts& parts) {
  return compose_hybrid(parts.fixed, parts.trainable, parts.hop, parts.wrap_length);
}

HybridParts decompose_hybrid(const Filterbank& hybrid) {
  const auto& meta = hybrid.metadata();
  if (hybrid.kind() != FilterbankKind::kHybrid || !meta.contains("fixed") ||
      !meta.contains("trainable")) {
    throw InvalidArgument("filterbank does not record hybrid parents");
  }
  HybridParts parts;
  parts.fixed = filterbank_from_json(meta.at("fixed"));
  parts.trainable = filterbank_from_json(meta.at("trainable"));
  parts.hop = hybrid.hop();
  parts.wrap_length = meta.value("wrap_length", std::size_t{0});
  return parts;
}

Filterbank canonical_tight(const Filterbank& fb, std::size_t n) {
  if (fb.max_length() > n) throw InvalidArgument("canonical_tight: filter longer than n");
  std::vector<ComplexVec> spectra;
  spectra.reserve(fb.size());
  for (const ComplexVec& f : fb.filters()) spectra.push_back(dft_padded(f, n));
  RealVec s(n, 0.0);
  for (const ComplexVec& w : spectra) {
    for (std::size_t k = 0; k < n; ++k) s[k] += std::norm(w[k]);
  }
  const FrameBounds bounds = bounds_from_spectrum(s);
  if (!bounds.is_frame()) {
    throw DomainError("filterbank does not cover the spectrum (A = 0 at bin " +
                      std::to_string(bounds.argmin_bin) + ")");
  }
  std::vector<ComplexVec> out;
  out.reserve(fb.size());
  for (ComplexVec& w : spectra) {
    for (std::size_t k = 0; k < n; ++k) w[k] /= std::sqrt(s[k]);
    out.push_back(idft(w));
  }
  nlohmann::json meta = fb.metadata();
  meta["tightened_length"] = n;
  return Filterbank(std::move(out), fb.hop(), fb.kind(), std::move(meta));
}

nlohmann::json to_json(const Filterbank& fb) {
  nlohmann::json filters = nlohmann::json::array();
  for (const ComplexVec& f : fb.filters()) {
    nlohmann::json taps = nlohmann::json::array();
    for (const Complex& v : f) taps.push_back({v.real(), v.imag()});
    filters.push_back(std::move(taps));
  }
  return {{"format", kFormatName},
          {"version", kFormatVersion},
          {"tag", to_string(fb.kind())},
          {"hop", fb.hop()},
          {"metadata", fb.metadata()},
          {"filters", std::move(filters)}};
}

Filterbank filterbank_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("filterbank document is not a JSON object");
  for (const char* field : {"version", "tag", "hop", "filters"}) {
    if (!doc.contains(field)) {
      throw ParseError(std::string("filterbank document is missing field \"") + field + "\"");
    }
  }
  if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kFormatVersion) {
    throw ParseError("unsupported filterbank format version " + doc["version"].dump() +
                     " (expected " + std::to_string(kFormatVersion) + ")");
  }
  if (!doc["hop"].is_number_unsigned() || doc["hop"].get<std::size_t>() == 0) {
    throw ParseError("field \"hop\" must be a positive integer");
  }
  if (!doc["filters"].is_array()) throw ParseError("field \"filters\" must be an array");
  std::vector<ComplexVec> filters;
  for (const auto& taps : doc["filters"]) {
    if (!taps.is_array()) throw ParseError("each filter must be an array of [re, im] pairs");
    ComplexVec f;
    f.reserve(taps.size());
    for (const auto& tap : taps) {
      if (!tap.is_array() || tap.size() != 2 || !tap[0].is_number() || !tap[1].is_number()) {
        throw ParseError("filter taps must be [re, im] number pairs");
      }
      f.emplace_back(tap[0].get<double>(), tap[1].get<double>());
    }
    filters.push_back(std::move(f));
  }
  nlohmann::json meta = doc.value("metadata", nlohmann::json::object());
  try {
    return Filterbank(std::move(filters), doc["hop"].get<std::size_t>(),
                      kind_from_string(doc["tag"].get<std::string>()), std::move(meta));
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid filterbank document: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid filterbank document: ") + e.what());
  }
}

void save(const Filterbank& fb, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_json(fb).dump(1) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

Filterbank load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return filterbank_from_json(doc);
}

}  // namespace tightfb

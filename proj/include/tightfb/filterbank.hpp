#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tightfb/signal.hpp"

namespace tightfb {

enum class FilterbankKind { kStft, kAuditory, kRandom, kHybrid };

std::string to_string(FilterbankKind kind);
FilterbankKind kind_from_string(const std::string& name);

// J complex FIR impulse responses plus the analysis hop.
class Filterbank {
 public:
  Filterbank() = default;
  Filterbank(std::vector<ComplexVec> filters, std::size_t hop, FilterbankKind kind,
             nlohmann::json metadata = nlohmann::json::object());

  const std::vector<ComplexVec>& filters() const { return filters_; }
  const ComplexVec& filter(std::size_t j) const { return filters_[j]; }
  std::size_t size() const { return filters_.size(); }
  std::size_t hop() const { return hop_; }
  FilterbankKind kind() const { return kind_; }
  const nlohmann::json& metadata() const { return metadata_; }

  std::size_t max_length() const;
  bool is_real() const;

  Filterbank with_filters(std::vector<ComplexVec> filters) const;
  Filterbank with_hop(std::size_t hop) const;
  Filterbank scaled(double factor) const;

  friend bool operator==(const Filterbank&, const Filterbank&) = default;

 private:
  std::vector<ComplexVec> filters_;
  std::size_t hop_ = 1;
  FilterbankKind kind_ = FilterbankKind::kRandom;
  nlohmann::json metadata_ = nlohmann::json::object();
};

// Fixed part Psi and trainable part Phi of a hybrid encoder. Channel j of
// the composed bank is trainable_j * fixed_j.
struct HybridParts {
  Filterbank fixed;
  Filterbank trainable;
  std::size_t hop = 1;
  // When non-zero, composed filters longer than this are folded modulo it.
  std::size_t wrap_length = 0;
};

struct AuditorySpec {
  std::size_t channels = 256;
  int sample_rate = 16000;
  double f_min = 0.0;
  double f_max = 8000.0;
  std::size_t filter_length = 512;
  std::size_t hop = 128;
  // Length on which the bank is made tight; 0 means filter_length. Values
  // above filter_length return filters of that length.
  std::size_t tight_length = 0;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);
// Equally spaced mel grid between f_min and f_max, inclusive.
std::vector<double> mel_center_frequencies(std::size_t count, double f_min, double f_max);

Filterbank make_random(std::size_t channels, std::size_t length, double sigma2,
                       std::size_t hop, std::uint64_t seed);
// sigma2 = 1 / (J T).
Filterbank make_random(std::size_t channels, std::size_t length, std::size_t hop,
                       std::uint64_t seed);
Filterbank make_delta(std::size_t channels, std::size_t hop = 1);
Filterbank make_stft(std::size_t num_channels, std::size_t window_length, std::size_t hop);
Filterbank make_auditory(const AuditorySpec& spec);

// Periodic Hann window of length n.
RealVec hann_window(std::size_t n);

ComplexVec linear_convolve(std::span<const Complex> a, std::span<const Complex> b);
// Sums samples whose indices agree modulo n.
ComplexVec fold(std::span<const Complex> v, std::size_t n);

Filterbank compose_hybrid(const Filterbank& fixed, const Filterbank& trainable,
                          std::optional<std::size_t> hop = std::nullopt,
                          std::size_t wrap_length = 0);
Filterbank compose_hybrid(const HybridParts& parts);
// Recovers the parents recorded by compose_hybrid.
HybridParts decompose_hybrid(const Filterbank& hybrid);

// Divides every filter's length-n DFT by sqrt(S[k]); filters come back with
// length n and S' == 1.
Filterbank canonical_tight(const Filterbank& fb, std::size_t n);

nlohmann::json to_json(const Filterbank& fb);
Filterbank filterbank_from_json(const nlohmann::json& doc);
void save(const Filterbank& fb, const std::filesystem::path& path);
Filterbank load(const std::filesystem::path& path);

}  // namespace tightfb

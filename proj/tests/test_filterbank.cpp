#include <doctest.h>

#include <cstring>
#include <fstream>

#include "test_util.hpp"
#include "tightfb/errors.hpp"
#include "tightfb/filterbank.hpp"
#include "tightfb/frame.hpp"

using namespace tightfb;
using namespace tightfb::testing;

TEST_CASE("make_random") {
  SUBCASE("conv1d encoder configuration") {
    const Filterbank fb = make_random(256, 32, 8, 1);
    CHECK(fb.size() == 256);
    CHECK(fb.max_length() == 32);
    CHECK(fb.hop() == 8);
    CHECK(fb.kind() == FilterbankKind::kRandom);
    CHECK(fb.is_real());
    CHECK(fb.metadata().at("sigma2").get<double>() == doctest::Approx(1.0 / (256 * 32)));
  }
  SUBCASE("deterministic given the seed") {
    CHECK(make_random(4, 8, 0.1, 1, 42) == make_random(4, 8, 0.1, 1, 42));
    CHECK_FALSE(make_random(4, 8, 0.1, 1, 42) == make_random(4, 8, 0.1, 1, 43));
  }
  SUBCASE("sample variance matches sigma2") {
    // 10 banks of 64 x 16 taps pool 10240 entries; std of the estimate ~1.4%.
    const double sigma2 = 1.0 / (64.0 * 16.0);
    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Filterbank fb = make_random(64, 16, sigma2, 1, seed);
      for (const ComplexVec& f : fb.filters()) {
        for (const Complex& v : f) {
          sum += v.real();
          sum2 += v.real() * v.real();
          ++count;
        }
      }
    }
    const double mean = sum / count;
    const double var = sum2 / count - mean * mean;
    CHECK(count >= 10000);
    CHECK(std::abs(var - sigma2) <= 0.05 * sigma2);
  }
  SUBCASE("invalid variance") {
    CHECK_THROWS_AS(make_random(4, 8, 0.0, 1, 1), InvalidArgument);
    CHECK_THROWS_AS(make_random(4, 8, -1.0, 1, 1), InvalidArgument);
  }
}

TEST_CASE("make_stft") {
  SUBCASE("baseline configuration") {
    const Filterbank fb = make_stft(256, 512, 256);
    CHECK(fb.size() == 256);
    CHECK(fb.max_length() == 512);
    CHECK(fb.hop() == 256);
  }
  SUBCASE("single channel is an unmodulated Hann window") {
    const Filterbank fb = make_stft(1, 4, 1);
    const double expected[] = {0.0, 0.5, 1.0, 0.5};
    for (std::size_t t = 0; t < 4; ++t) CHECK(std::abs(fb.filter(0)[t] - expected[t]) < 1e-15);
  }
  SUBCASE("channel j is modulated to bin j") {
    const Filterbank fb = make_stft(8, 16, 4);
    const ComplexVec spec = dft(fb.filter(3));
    std::size_t peak = 0;
    for (std::size_t k = 0; k < 16; ++k) {
      if (std::abs(spec[k]) > std::abs(spec[peak])) peak = k;
    }
    CHECK(peak == 3);
  }
  SUBCASE("too many channels") { CHECK_THROWS_AS(make_stft(65, 64, 32), InvalidArgument); }
}

TEST_CASE("mel grid") {
  SUBCASE("two channels span the full range") {
    const auto c = mel_center_frequencies(2, 0.0, 8000.0);
    CHECK(c[0] == 0.0);
    CHECK(c[1] == 8000.0);
    CHECK(mel_to_hz(hz_to_mel(8000.0)) == doctest::Approx(8000.0).epsilon(1e-12));
  }
  SUBCASE("constant mel spacing") {
    const auto c = mel_center_frequencies(40, 50.0, 7600.0);
    const double step = hz_to_mel(c[1]) - hz_to_mel(c[0]);
    for (std::size_t j = 1; j + 1 < c.size(); ++j) {
      CHECK(rel_diff(hz_to_mel(c[j + 1]) - hz_to_mel(c[j]), step) < 1e-9);
    }
  }
  SUBCASE("known value") {
    // 2595 log10(1 + 1000/700)
    CHECK(hz_to_mel(1000.0) == doctest::Approx(999.98554).epsilon(1e-7));
  }
}

TEST_CASE("make_auditory") {
  SUBCASE("audlet configuration") {
    AuditorySpec spec;  // 256 bands, 512 taps, hop 128, 16 kHz
    const Filterbank fb = make_auditory(spec);
    CHECK(fb.kind() == FilterbankKind::kAuditory);
    CHECK(fb.max_length() == 512);
    CHECK(fb.hop() == 128);
    // DC and Nyquist bands are real; the 254 interior bands get conjugate twins.
    CHECK(fb.size() == 256 + 254);
    CHECK(frame_bounds_fft(fb, 512).kappa == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("tight at hop 1 on its design length") {
    AuditorySpec spec;
    spec.channels = 24;
    spec.filter_length = 256;
    spec.hop = 1;
    const Filterbank fb = make_auditory(spec);
    CHECK(std::abs(frame_bounds_fft(fb, 256).kappa - 1.0) < 1e-8);
    CHECK(is_tight(fb, 256, 1e-8));
  }
  SUBCASE("tight_length widens the filters to that length") {
    AuditorySpec spec;
    spec.channels = 16;
    spec.filter_length = 128;
    spec.tight_length = 1000;
    spec.hop = 1;
    const Filterbank fb = make_auditory(spec);
    CHECK(fb.max_length() == 1000);
    CHECK(std::abs(frame_bounds_fft(fb, 1000).kappa - 1.0) < 1e-8);
  }
  SUBCASE("bands are mel spaced and band-limited") {
    AuditorySpec spec;
    spec.channels = 12;
    spec.filter_length = 512;
    const Filterbank fb = make_auditory(spec);
    const auto centers = fb.metadata().at("center_frequencies_hz").get<std::vector<double>>();
    REQUIRE(centers.size() == fb.size());
    const auto grid = mel_center_frequencies(12, 0.0, 8000.0);
    for (std::size_t j = 0; j < 12; ++j) CHECK(centers[j] == doctest::Approx(grid[j]));
    // Peak response of band 5 sits near its center frequency.
    const ComplexVec spec5 = dft_padded(fb.filter(5), 4096);
    std::size_t peak = 0;
    for (std::size_t k = 0; k < 4096; ++k) {
      if (std::abs(spec5[k]) > std::abs(spec5[peak])) peak = k;
    }
    const double f_peak = peak * 16000.0 / 4096.0;
    CHECK(f_peak > grid[4]);
    CHECK(f_peak < grid[6]);
  }
  SUBCASE("sub-band range still covers the spectrum") {
    AuditorySpec spec;
    spec.channels = 8;
    spec.f_min = 200.0;
    spec.f_max = 6000.0;
    spec.filter_length = 256;
    const Filterbank fb = make_auditory(spec);
    CHECK(fb.size() == 16);
    CHECK(std::abs(frame_bounds_fft(fb, 256).kappa - 1.0) < 1e-8);
  }
  SUBCASE("invalid specs") {
    AuditorySpec spec;
    spec.channels = 1;
    CHECK_THROWS_AS(make_auditory(spec), InvalidArgument);
    spec = AuditorySpec{};
    spec.f_max = 9000.0;
    CHECK_THROWS_AS(make_auditory(spec), InvalidArgument);
    spec = AuditorySpec{};
    spec.f_min = 8000.0;
    CHECK_THROWS_AS(make_auditory(spec), InvalidArgument);
  }
}

TEST_CASE("compose_hybrid") {
  AuditorySpec spec;
  spec.channels = 6;
  spec.filter_length = 64;
  spec.hop = 4;
  const Filterbank psi = make_auditory(spec);

  SUBCASE("delta trainable part leaves the fixed filters unchanged") {
    const Filterbank h = compose_hybrid(psi, make_delta(psi.size()));
    REQUIRE(h.size() == psi.size());
    for (std::size_t j = 0; j < psi.size(); ++j) CHECK(h.filter(j) == psi.filter(j));
    CHECK(h.hop() == psi.hop());
  }
  SUBCASE("delta fixed part leaves the trainable filters unchanged") {
    const Filterbank phi = make_random(psi.size(), 5, 1, 3);
    const Filterbank h = compose_hybrid(make_delta(psi.size()), phi);
    for (std::size_t j = 0; j < phi.size(); ++j) CHECK(h.filter(j) == phi.filter(j));
  }
  SUBCASE("hybrid audlet length") {
    const Filterbank audlet = make_auditory(AuditorySpec{});
    const Filterbank phi = make_random(audlet.size(), 11, 1, 5);
    const Filterbank h = compose_hybrid(audlet, phi);
    CHECK(h.max_length() == 522);
    CHECK(h.hop() == 128);
    CHECK(compose_hybrid(audlet, phi, std::size_t{1}).hop() == 1);
  }
  SUBCASE("convolution theorem") {
    const Filterbank phi = make_random(psi.size(), 7, 1, 9);
    const Filterbank h = compose_hybrid(psi, phi);
    const std::size_t n = 128;
    for (std::size_t j = 0; j < psi.size(); ++j) {
      const ComplexVec lhs = dft_padded(h.filter(j), n);
      const ComplexVec a = dft_padded(psi.filter(j), n);
      const ComplexVec b = dft_padded(phi.filter(j), n);
      ComplexVec rhs(n);
      for (std::size_t k = 0; k < n; ++k) rhs[k] = a[k] * b[k];
      CHECK(max_abs_diff(lhs, rhs) < 1e-10 * std::max(1.0, max_abs(rhs)));
    }
  }
  SUBCASE("analysis factorizes channel by channel") {
    const Filterbank phi = make_random(psi.size(), 7, 1, 9);
    const Filterbank h = compose_hybrid(psi, phi, std::size_t{1});
    const Signal x = random_signal(128, 4);
    const Coefficients direct = analyze(h, x);
    const Coefficients inner = analyze(psi.with_hop(1), x);
    for (std::size_t j = 0; j < psi.size(); ++j) {
      RealVec re(128), im(128);
      for (std::size_t n = 0; n < 128; ++n) {
        re[n] = inner(n, j).real();
        im[n] = inner(n, j).imag();
      }
      const ComplexVec a = circular_convolve(re, phi.filter(j));
      const ComplexVec b = circular_convolve(im, phi.filter(j));
      for (std::size_t n = 0; n < 128; ++n) {
        CHECK(std::abs(direct(n, j) - (a[n] + Complex(0, 1) * b[n])) < 1e-10);
      }
    }
  }
  SUBCASE("wrap folds the composition onto the circle") {
    const Filterbank phi = make_random(psi.size(), 8, 1, 2);
    const Filterbank h = compose_hybrid(psi, phi, std::size_t{1}, 64);
    CHECK(h.max_length() == 64);
    const ComplexVec full = linear_convolve(psi.filter(0), phi.filter(0));
    const ComplexVec folded = fold(full, 64);
    CHECK(h.filter(0) == folded);
    // Folding samples the spectrum of the long filter on the 64-point grid.
    const ComplexVec a = dft(folded);
    ComplexVec b(64);
    for (std::size_t k = 0; k < 64; ++k) {
      for (std::size_t t = 0; t < full.size(); ++t) {
        b[k] += full[t] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * t) / 64.0);
      }
    }
    CHECK(max_abs_diff(a, b) < 1e-10);
  }
  SUBCASE("records both parents") {
    const Filterbank phi = make_random(psi.size(), 3, 1, 2);
    const Filterbank h = compose_hybrid(psi, phi);
    CHECK(h.kind() == FilterbankKind::kHybrid);
    CHECK(h.metadata().at("fixed_kind") == "auditory");
    CHECK(h.metadata().at("trainable_kind") == "random");
    const HybridParts parts = decompose_hybrid(h);
    CHECK(parts.fixed == psi);
    CHECK(parts.trainable == phi);
    CHECK(compose_hybrid(parts) == h);
  }
  SUBCASE("channel mismatch") {
    CHECK_THROWS_AS(compose_hybrid(psi, make_random(psi.size() + 1, 3, 1, 1)), InvalidArgument);
  }
}

TEST_CASE("canonical_tight") {
  SUBCASE("two deltas are scaled by 1/sqrt(2)") {
    const Filterbank fb({ComplexVec{1}, ComplexVec{0, 1}}, 1, FilterbankKind::kRandom);
    const Filterbank t = canonical_tight(fb, 8);
    CHECK(t.max_length() == 8);
    CHECK(std::abs(t.filter(0)[0] - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(t.filter(1)[1] - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(frame_bounds_fft(t, 8).kappa - 1.0) < 1e-14);
  }
  SUBCASE("random banks become tight") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Filterbank t = canonical_tight(random_complex_bank(3, 9, 1, seed), 40);
      const FrameBounds b = frame_bounds_fft(t, 40);
      CHECK(std::abs(b.kappa - 1.0) < 1e-10);
      CHECK(std::abs(b.A - 1.0) < 1e-10);
    }
  }
  SUBCASE("boxcar with even N has a spectral null") {
    // |1 + e^{-i pi}|^2 = 0 at k = N/2.
    const Filterbank fb({ComplexVec{1, 1}}, 1, FilterbankKind::kRandom);
    try {
      canonical_tight(fb, 8);
      FAIL("expected DomainError");
    } catch (const DomainError& e) {
      CHECK(std::string(e.what()).find("does not cover the spectrum") != std::string::npos);
    }
    CHECK_NOTHROW(canonical_tight(fb, 7));
  }
}

TEST_CASE("filterbank container") {
  SUBCASE("round trip is bit exact") {
    const Filterbank fb = canonical_tight(random_complex_bank(4, 6, 2, 8), 16);
    const auto path = temp_path("fb.json");
    save(fb, path);
    const Filterbank back = load(path);
    CHECK(back == fb);
    for (std::size_t j = 0; j < fb.size(); ++j) {
      CHECK(std::memcmp(back.filter(j).data(), fb.filter(j).data(),
                        fb.filter(j).size() * sizeof(Complex)) == 0);
    }
  }
  SUBCASE("missing hop names the field") {
    nlohmann::json doc = to_json(make_delta(2));
    doc.erase("hop");
    try {
      filterbank_from_json(doc);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("\"hop\"") != std::string::npos);
    }
  }
  SUBCASE("version mismatch") {
    nlohmann::json doc = to_json(make_delta(2));
    doc["version"] = 99;
    CHECK_THROWS_AS(filterbank_from_json(doc), ParseError);
  }
  SUBCASE("malformed documents") {
    const auto path = temp_path("broken.json");
    std::ofstream(path) << "{ not json";
    CHECK_THROWS_AS(load(path), ParseError);
    nlohmann::json doc = to_json(make_delta(2));
    doc["filters"][0][0] = {1.0};
    CHECK_THROWS_AS(filterbank_from_json(doc), ParseError);
    CHECK_THROWS_AS(load(temp_path("missing.json")), IoError);
  }
  SUBCASE("hybrid metadata keeps both parent tags") {
    const Filterbank h = compose_hybrid(make_stft(4, 8, 2), make_random(4, 3, 1, 1));
    const auto path = temp_path("hybrid.json");
    save(h, path);
    const Filterbank back = load(path);
    CHECK(back.metadata().at("fixed_kind") == "stft");
    CHECK(back.metadata().at("trainable_kind") == "random");
    CHECK(decompose_hybrid(back).fixed == make_stft(4, 8, 2));
  }
  SUBCASE("golden file") {
    const Filterbank fb = load(std::filesystem::path(TIGHTFB_GOLDEN_DIR) / "two_deltas.json");
    CHECK(fb.size() == 2);
    CHECK(fb.hop() == 1);
    CHECK(fb.filter(1) == ComplexVec{0.0, 1.0});
    const FrameBounds b = frame_bounds_fft(fb, 8);
    CHECK(b.A == 2.0);
    CHECK(b.B == 2.0);
  }
}

#include <doctest.h>

#include "test_util.hpp"
#include "tightfb/errors.hpp"
#include "tightfb/frame.hpp"
#include "tightfb/signal.hpp"

using namespace tightfb;
using namespace tightfb::testing;

TEST_CASE("dft of a delta is all ones") {
  const ComplexVec out = dft(ComplexVec{1, 0, 0, 0});
  for (const Complex& v : out) CHECK(std::abs(v - Complex(1, 0)) < 1e-15);
}

TEST_CASE("dft of a constant is a scaled delta") {
  const ComplexVec out = dft(ComplexVec{1, 1, 1, 1});
  CHECK(std::abs(out[0] - Complex(4, 0)) < 1e-15);
  for (std::size_t k = 1; k < 4; ++k) CHECK(std::abs(out[k]) < 1e-15);
}

TEST_CASE("dft rejects empty input") {
  CHECK_THROWS_AS(dft(ComplexVec{}), InvalidArgument);
  CHECK_THROWS_AS(idft(ComplexVec{}), InvalidArgument);
}

TEST_CASE("dft matches the defining sum for power-of-two and other lengths") {
  for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 12u, 17u, 64u, 100u, 243u}) {
    const ComplexVec v = random_complex(n, n);
    const ComplexVec fast = dft(v);
    const ComplexVec slow = naive_dft(v);
    CHECK(max_abs_diff(fast, slow) <= 1e-11 * std::max(1.0, max_abs(slow)));
    const ComplexVec back = idft(fast);
    CHECK(max_abs_diff(back, v) <= 1e-12 * max_abs(v));
  }
}

TEST_CASE("Parseval under the unnormalized convention") {
  const ComplexVec v = random_complex(64, 7);
  double e_time = 0, e_freq = 0;
  for (const Complex& x : v) e_time += std::norm(x);
  for (const Complex& x : dft(v)) e_freq += std::norm(x);
  CHECK(rel_diff(e_freq, 64.0 * e_time) < 1e-13);
}

TEST_CASE("circular_convolve examples") {
  const RealVec x{1, 2, 3, 4};
  SUBCASE("identity kernel") {
    const ComplexVec y = circular_convolve(x, ComplexVec{1});
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(y[i] - x[i]) < 1e-14);
  }
  SUBCASE("impulse response") {
    const Complex a(0.5, -1.0), b(2.0, 0.25);
    const ComplexVec y = circular_convolve(RealVec{1, 0, 0, 0}, ComplexVec{a, b});
    CHECK(std::abs(y[0] - a) < 1e-14);
    CHECK(std::abs(y[1] - b) < 1e-14);
    CHECK(std::abs(y[2]) < 1e-14);
    CHECK(std::abs(y[3]) < 1e-14);
  }
  SUBCASE("two-tap wraparound") {
    // out[0] = x[0] + x[3] = 5, out[n] = x[n] + x[n-1] otherwise.
    const ComplexVec expected{5, 3, 5, 7};
    CHECK(max_abs_diff(circular_convolve(x, ComplexVec{1, 1}), expected) < 1e-14);
    CHECK(max_abs_diff(circular_convolve_direct(x, ComplexVec{1, 1}), expected) == 0.0);
  }
  SUBCASE("filter longer than signal") {
    CHECK_THROWS_AS(circular_convolve(x, ComplexVec(5, 1.0)), InvalidArgument);
    CHECK_THROWS_AS(circular_convolve_direct(x, ComplexVec(5, 1.0)), InvalidArgument);
  }
}

TEST_CASE("FFT and direct circular convolution agree") {
  std::uint64_t seed = 1;
  for (std::size_t n : {1u, 7u, 64u, 100u, 257u, 1024u}) {
    for (std::size_t t : {std::size_t{1}, n / 3 + 1, n}) {
      if (t > n) continue;
      const RealVec x = random_real(n, ++seed);
      const ComplexVec w = random_complex(t, ++seed);
      const ComplexVec fast = circular_convolve(x, w);
      const ComplexVec slow = circular_convolve_direct(x, w);
      CHECK(max_abs_diff(fast, slow) <= 1e-10 * max_abs(slow));
    }
  }
}

TEST_CASE("analyze examples") {
  SUBCASE("delta encoder is the identity") {
    const Filterbank fb({ComplexVec{1}}, 1, FilterbankKind::kRandom);
    const Signal x = random_signal(32, 3);
    const Coefficients c = analyze(fb, x);
    REQUIRE(c.frames() == 32);
    REQUIRE(c.channels() == 1);
    for (std::size_t n = 0; n < 32; ++n) CHECK(std::abs(c(n, 0) - x[n]) < 1e-13);
  }
  SUBCASE("shift operator") {
    const Filterbank fb({ComplexVec{1}, ComplexVec{0, 1}}, 1, FilterbankKind::kRandom);
    const Coefficients c = analyze(fb, Signal({1, 2, 3, 4}, 16000));
    const double ch0[] = {1, 2, 3, 4};
    const double ch1[] = {4, 1, 2, 3};
    for (std::size_t n = 0; n < 4; ++n) {
      CHECK(std::abs(c(n, 0) - ch0[n]) < 1e-14);
      CHECK(std::abs(c(n, 1) - ch1[n]) < 1e-14);
    }
  }
  SUBCASE("decimation keeps every hop-th output") {
    const Filterbank fb1 = random_complex_bank(3, 5, 1, 11);
    const Filterbank fb4 = fb1.with_hop(4);
    const Signal x = random_signal(24, 12);
    const Coefficients full = analyze(fb1, x);
    const Coefficients dec = analyze(fb4, x);
    REQUIRE(dec.frames() == 6);
    for (std::size_t m = 0; m < 6; ++m) {
      for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(dec(m, j) - full(4 * m, j)) < 1e-13);
    }
  }
  SUBCASE("errors") {
    const Filterbank fb = random_complex_bank(2, 4, 3, 5);
    CHECK_THROWS_AS(analyze(fb, random_signal(16, 1)), InvalidArgument);  // 3 does not divide 16
    CHECK_THROWS_AS(analyze(fb.with_hop(1), random_signal(3, 1)), InvalidArgument);
  }
}

TEST_CASE("analysis energy lies between the spectral frame bounds") {
  const Filterbank fb = make_random(4, 8, 1.0 / 32.0, 1, 99);
  const FrameBounds b = frame_bounds_fft(fb, 64);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Signal x = random_signal(64, 500 + s);
    const double e = analyze(fb, x).squared_norm();
    const double nx = squared_norm(x.samples());
    CHECK(e >= b.A * nx * (1 - 1e-9));
    CHECK(e <= b.B * nx * (1 + 1e-9));
  }
}

TEST_CASE("Parseval identity for the undecimated encoder") {
  const Filterbank fb = random_complex_bank(5, 9, 1, 3);
  const std::size_t n = 48;
  const RealVec s = frame_spectrum(fb, n);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Signal x = random_signal(n, seed + 70);
    const ComplexVec xf = dft_real(x.samples());
    double rhs = 0.0;
    for (std::size_t k = 0; k < n; ++k) rhs += s[k] * std::norm(xf[k]);
    rhs /= static_cast<double>(n);
    CHECK(rel_diff(analyze(fb, x).squared_norm(), rhs) < 1e-9);
  }
}

TEST_CASE("synthesize is the adjoint of analyze") {
  SUBCASE("delta encoder") {
    const Filterbank fb({ComplexVec{1}}, 1, FilterbankKind::kRandom);
    const Signal x = random_signal(16, 8);
    const Signal y = synthesize(fb, analyze(fb, x));
    for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(y[i] - x[i]) < 1e-14);
  }
  SUBCASE("adjoint identity over random triples") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(seed);
      const std::size_t hop = std::size_t{1} << (rng() % 3);  // 1, 2, 4
      const std::size_t n = 64;
      const std::size_t J = 1 + rng() % 5;
      const std::size_t T = 1 + rng() % 16;
      const Filterbank fb = random_complex_bank(J, T, hop, seed + 1);
      const Signal x = random_signal(n, seed + 1000);
      Coefficients c(n / hop, J, hop, n);
      const ComplexVec cv = random_complex(c.values().size(), seed + 2000);
      std::copy(cv.begin(), cv.end(), c.values().begin());
      const double lhs = real_inner(analyze(fb, x), c);
      const double rhs = dot(x.samples(), synthesize(fb, c).samples());
      const double scale = std::sqrt(squared_norm(x.samples()) * c.squared_norm());
      CHECK(std::abs(lhs - rhs) <= 1e-10 * scale);
      ++checked;
    }
    CHECK(checked == 100);
  }
  SUBCASE("shape mismatch") {
    const Filterbank fb = random_complex_bank(2, 4, 1, 5);
    Coefficients c(16, 3, 1, 16);
    CHECK_THROWS_AS(synthesize(fb, c), InvalidArgument);
  }
}

TEST_CASE("tight encoder reconstructs through its transpose") {
  const Filterbank fb = canonical_tight(random_complex_bank(3, 6, 1, 21), 32);
  const double A = frame_bounds_fft(fb, 32).A;
  const Signal x = random_signal(32, 4);
  const Signal y = synthesize(fb, analyze(fb, x));
  for (std::size_t i = 0; i < 32; ++i) CHECK(std::abs(y[i] / A - x[i]) < 1e-8);
}

TEST_CASE("analyze is linear") {
  const Filterbank fb = random_complex_bank(3, 7, 2, 17);
  const RealVec x = random_real(40, 1), y = random_real(40, 2);
  const double a = 0.7, b = -1.3;
  RealVec z(40);
  for (std::size_t i = 0; i < 40; ++i) z[i] = a * x[i] + b * y[i];
  const Coefficients cx = analyze(fb, x), cy = analyze(fb, y), cz = analyze(fb, z);
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < cz.values().size(); ++i) {
    const Complex expected = a * cx.values()[i] + b * cy.values()[i];
    diff = std::max(diff, std::abs(cz.values()[i] - expected));
    scale = std::max(scale, std::abs(expected));
  }
  CHECK(diff <= 1e-12 * scale);
}

TEST_CASE("signal rejects non-finite samples") {
  CHECK_THROWS_AS(Signal({1.0, std::nan("")}, 16000), InvalidArgument);
  CHECK_THROWS_AS(Signal({}, 16000), InvalidArgument);
  CHECK_THROWS_AS(Signal({1.0}, 0), InvalidArgument);
}

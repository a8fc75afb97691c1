// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <vector>

#include "mave/enhance.h"
#include "mave/mask.h"
#include "support/checks.h"
#include "support/temp_dir.h"

using mave::Complex;
using mave::ErrorCode;
using mave::MaskGrid;
using mave::test::CodeOf;

TEST_CASE("compression of 1 with K=10, C=0.1") {
  const double e = std::exp(-0.1);
  CHECK(mave::CompressMaskValue(1.0) == doctest::Approx(10.0 * (1.0 - e) / (1.0 + e)).epsilon(1e-12));
  CHECK(mave::CompressMaskValue(1.0) == doctest::Approx(0.499584).epsilon(1e-6));
  CHECK(mave::CompressMaskValue(0.0) == 0.0);
}

TEST_CASE("decompression inverts compression on (-10, 10)") {
  for (double m = -9.99; m < 10.0; m += 0.37)
    CHECK(std::abs(mave::DecompressMaskValue(mave::CompressMaskValue(m)) - m) < 1e-9);
}

TEST_CASE("compression is odd, monotone and bounded") {
  double prev = -mave::kMaskBoundK;
  for (double m = -500.0; m <= 500.0; m += 0.5) {
    const double v = mave::CompressMaskValue(m);
    CHECK(v == doctest::Approx(-mave::CompressMaskValue(-m)));
    CHECK(v >= prev);
    CHECK(std::abs(v) <= mave::kMaskBoundK);
    prev = v;
  }
  CHECK(std::isfinite(mave::DecompressMaskValue(mave::kMaskBoundK)));
}

TEST_CASE("ideal cIRM of a clean mixture is one") {
  const auto x = mave::test::Gaussian(4000, 1);
  const auto spec = mave::Stft(x);
  const auto mask = mave::IdealCirm(spec, spec);
  for (const auto& v : mask.data()) {
    CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(v.imag()) < 1e-12);
  }
}

TEST_CASE("ideal cIRM recovers the target exactly in the raw domain") {
  const auto s = mave::test::Gaussian(6000, 2);
  const auto n = mave::test::Gaussian(6000, 3);
  std::vector<double> y(6000);
  for (std::size_t t = 0; t < y.size(); ++t) y[t] = s[t] + n[t];
  const auto ys = mave::Stft(y);
  const auto out = mave::ApplyMask(ys, mave::IdealCirm(ys, mave::Stft(s)), y.size());
  double worst = 0.0;
  for (std::size_t t = 0; t < s.size(); ++t) worst = std::max(worst, std::abs(out[t] - s[t]));
  CHECK(worst < 1e-9);
}

TEST_CASE("compressed masks stay inside the bound") {
  const auto s = mave::test::Gaussian(4000, 4);
  const auto n = mave::test::Gaussian(4000, 5, 3.0);
  std::vector<double> y(4000);
  for (std::size_t t = 0; t < y.size(); ++t) y[t] = s[t] + n[t];
  const auto mask = mave::IdealCirm(mave::Stft(y), mave::Stft(s), true);
  CHECK(mask.compressed());
  for (const auto& v : mask.data()) {
    CHECK(std::abs(v.real()) < mave::kMaskBoundK);
    CHECK(std::abs(v.imag()) < mave::kMaskBoundK);
  }
}

TEST_CASE("ideal IRM is real and non-negative") {
  const auto s = mave::test::Gaussian(3000, 6);
  const auto n = mave::test::Gaussian(3000, 7);
  std::vector<double> y(3000);
  for (std::size_t t = 0; t < y.size(); ++t) y[t] = s[t] + n[t];
  const auto mask = mave::IdealIrm(mave::Stft(y), mave::Stft(s));
  for (const auto& v : mask.data()) {
    CHECK(v.imag() == 0.0);
    CHECK(v.real() >= 0.0);
  }
}

TEST_CASE("unit and zero masks") {
  const auto x = mave::test::Gaussian(5000, 8);
  const auto spec = mave::Stft(x);
  const auto ones = mave::ApplyMask(spec, MaskGrid(spec.bins(), spec.frames(), false, 1.0), x.size());
  const auto zeros = mave::ApplyMask(spec, MaskGrid(spec.bins(), spec.frames()), x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    CHECK(ones[t] == doctest::Approx(x[t]).epsilon(1e-9));
    CHECK(zeros[t] == 0.0);
  }
  CHECK(mave::ApplyMask(spec, MaskGrid(spec.bins(), spec.frames(), false, 1.0), 100).size() == 100);
}

TEST_CASE("mask application contract errors") {
  const auto spec = mave::Stft(mave::test::Gaussian(2000, 9));
  CHECK(CodeOf([&] {
          mave::ApplyMask(spec, MaskGrid(spec.bins(), spec.frames(), true, 0.5), 2000);
        }) == ErrorCode::kCompressedMaskApplied);
  CHECK(CodeOf([&] { mave::ApplyMask(spec, MaskGrid(3, 3), 2000); }) ==
        ErrorCode::kShapeMismatch);
  const auto other = mave::Stft(mave::test::Gaussian(3000, 9));
  CHECK(CodeOf([&] { mave::IdealCirm(spec, other); }) == ErrorCode::kShapeMismatch);
}

TEST_CASE("mask files round trip and reject bad headers") {
  mave::test::TempDir dir;
  mave::MaskSet set;
  for (int m = 0; m < 2; ++m) {
    MaskGrid g(5, 7, true);
    for (std::size_t f = 0; f < 5; ++f)
      for (std::size_t n = 0; n < 7; ++n)
        g.at(f, n) = Complex(0.25 * f - m, 0.5 * n);
    set.masks.push_back(g);
  }
  const auto path = dir.path() / "a.mask";
  mave::WriteMaskSet(set, path);
  const auto back = mave::ReadMaskSet(path);
  REQUIRE(back.masks.size() == 2);
  CHECK(back.compressed());
  CHECK(back.k == doctest::Approx(10.0));
  CHECK(back.c == doctest::Approx(0.1));
  for (int m = 0; m < 2; ++m)
    for (std::size_t i = 0; i < 35; ++i)
      CHECK(back.masks[m].data()[i] == set.masks[m].data()[i]);

  std::ofstream(dir.path() / "bad.mask", std::ios::binary) << "NOTAMASK0000";
  CHECK(CodeOf([&] { mave::ReadMaskSet(dir.path() / "bad.mask"); }) ==
        ErrorCode::kMalformedFile);
}

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "scarscope/spectral.hpp"

using namespace scarscope;

TEST_CASE("pure cosine lands in the right bin") {
  const int n = 1024;
  const double dt = 0.05;
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = std::cos(1.0 * k * dt);
  Spectrum s = fft_spectrum(x, dt, WindowKind::none);
  Eigen::Index imax;
  s.magnitudes.maxCoeff(&imax);
  const double dw = 2 * M_PI / (n * dt);
  REQUIRE(std::abs(s.frequencies[imax] - 1.0) <= dw);
  REQUIRE(s.frequencies[1] == Catch::Approx(dw));
}

TEST_CASE("constant series has an empty spectrum after mean subtraction") {
  std::vector<double> x(128, 3.7);
  Spectrum s = fft_spectrum(x, 0.1, WindowKind::none);
  REQUIRE(s.magnitudes.maxCoeff() < 1e-12);
}

TEST_CASE("Parseval identity for the unwindowed transform") {
  std::mt19937 rng(5);
  std::normal_distribution<double> gauss;
  const int n = 500;
  std::vector<double> x(n);
  for (auto& v : x) v = gauss(rng);
  double mean = 0;
  for (double v : x) mean += v;
  mean /= n;
  double time_power = 0;
  for (double v : x) time_power += (v - mean) * (v - mean);

  Spectrum s = fft_spectrum(x, 0.05, WindowKind::none);
  // half-spectrum: double the interior bins (n even keeps a lone Nyquist bin)
  double freq_power = s.magnitudes[0] * s.magnitudes[0];
  for (Eigen::Index k = 1; k < s.magnitudes.size(); ++k) {
    const bool nyquist = (n % 2 == 0) && (k == s.magnitudes.size() - 1);
    freq_power += (nyquist ? 1.0 : 2.0) * s.magnitudes[k] * s.magnitudes[k];
  }
  freq_power /= n;
  REQUIRE(freq_power == Catch::Approx(time_power).epsilon(1e-8));
}

TEST_CASE("uniform-grid validation") {
  std::vector<double> x(64, 0.0);
  REQUIRE_THROWS_AS(fft_spectrum(std::vector<double>(8, 0.0), 0.1), usage_error);
  REQUIRE_THROWS_AS(fft_spectrum(x, -0.1), usage_error);

  ScramblingField f;
  f.kind = FieldKind::otoc;
  f.sites = {1};
  f.times = {0.0, 0.1, 0.3};  // non-uniform
  f.values.setOnes(1, 3);
  f.flags.setZero(1, 3);
  REQUIRE_THROWS_AS(fft_spectrum(f, 1), usage_error);
}

TEST_CASE("two tones give exactly two peaks") {
  const int n = 2048;
  const double dt = 0.05;
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = std::cos(1.0 * k * dt) + std::cos(2.0 * k * dt);
  Spectrum s = fft_spectrum(x, dt, WindowKind::hann);
  auto peaks = detect_peaks(s, 0.2);
  REQUIRE(peaks.size() == 2);
  REQUIRE(peaks[0].frequency == Catch::Approx(1.0).margin(0.01));
  REQUIRE(peaks[1].frequency == Catch::Approx(2.0).margin(0.01));
}

TEST_CASE("single tone over a noise floor") {
  std::mt19937 rng(11);
  std::normal_distribution<double> gauss(0.0, 0.05);
  const int n = 1024;
  const double dt = 0.05;
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = std::cos(1.5 * k * dt) + gauss(rng);
  auto peaks = detect_peaks(fft_spectrum(x, dt, WindowKind::hann), 0.5);
  REQUIRE(peaks.size() == 1);
  REQUIRE(peaks[0].frequency == Catch::Approx(1.5).margin(0.02));
}

TEST_CASE("synthetic sharp front reproduces arrivals and velocity") {
  ScramblingField f;
  f.kind = FieldKind::otoc;
  const int i = 1;
  const double v = 0.5, dt = 0.05;
  for (int j = 2; j <= 9; ++j) f.sites.push_back(j);
  for (int k = 0; k < 600; ++k) f.times.push_back(k * dt);
  f.values.setOnes(f.site_count(), f.time_count());
  f.flags.setZero(f.site_count(), f.time_count());
  for (Eigen::Index j = 0; j < f.site_count(); ++j) {
    const double arrive = std::abs(f.sites[j] - i) / v;
    for (Eigen::Index k = 0; k < f.time_count(); ++k)
      if (f.times[k] >= arrive) f.values(j, k) = 0.5;  // 1 - Re F jumps to 0.5
  }
  ArrivalTimes arr = lightcone_front(f, 0.05);
  for (std::size_t j = 0; j < arr.sites.size(); ++j) {
    REQUIRE(arr.times[j].has_value());
    REQUIRE(std::abs(*arr.times[j] - std::abs(arr.sites[j] - i) / v) <= dt);
  }
  LightConeFit fit = fit_velocity(arr, i);
  REQUIRE(fit.velocity == Catch::Approx(0.5).margin(0.01));
  REQUIRE(fit.residual < dt);

  // threshold monotonicity: larger threshold never yields earlier arrivals
  ArrivalTimes later = lightcone_front(f, 0.2);
  for (std::size_t j = 0; j < arr.sites.size(); ++j)
    REQUIRE(*later.times[j] >= *arr.times[j] - 1e-12);
}

TEST_CASE("field identically one never crosses") {
  ScramblingField f;
  f.kind = FieldKind::otoc;
  f.sites = {1, 2, 3, 4};
  for (int k = 0; k < 100; ++k) f.times.push_back(k * 0.05);
  f.values.setOnes(4, 100);
  f.flags.setZero(4, 100);
  ArrivalTimes arr = lightcone_front(f, 0.05);
  for (const auto& t : arr.times) REQUIRE_FALSE(t.has_value());
  REQUIRE_THROWS_AS(fit_velocity(arr, 1), usage_error);
}

TEST_CASE("exact line fit") {
  ArrivalTimes arr;
  arr.sites = {2, 3, 4, 5, 6};
  for (int j : arr.sites) arr.times.push_back(2.0 * (j - 1));  // t = 2 d
  LightConeFit fit = fit_velocity(arr, 1);
  REQUIRE(fit.velocity == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(fit.residual < 1e-12);

  // symmetric relabeling about i leaves the fit unchanged
  ArrivalTimes mirror;
  mirror.sites = {0, -1, -2, -3, -4};
  mirror.times = arr.times;
  LightConeFit fit2 = fit_velocity(mirror, 1);
  REQUIRE(fit2.velocity == Catch::Approx(fit.velocity));

  ArrivalTimes degenerate;
  degenerate.sites = {3, 3, 3, 3};
  degenerate.times = {1.0, 1.0, 1.0, 1.0};
  REQUIRE_THROWS_AS(fit_velocity(degenerate, 1), usage_error);
}

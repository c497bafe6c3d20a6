#pragma once

#include <fftw3.h>

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scarscope/scramble.hpp"

namespace scarscope {

enum class WindowKind { none, hann };

struct Spectrum {
  Eigen::VectorXd frequencies;  // rad/time, spacing 2*pi/(N dt)
  Eigen::VectorXd magnitudes;
  WindowKind window = WindowKind::none;
  std::map<std::string, std::string> meta;
};

// Magnitude spectrum of the mean-subtracted, optionally Hann-windowed series.
inline Spectrum fft_spectrum(const std::vector<double>& series, double dt,
                             WindowKind window = WindowKind::hann) {
  const int n = static_cast<int>(series.size());
  if (n < 32) throw usage_error("fft_spectrum: need at least 32 samples");
  if (dt <= 0) throw usage_error("fft_spectrum: dt must be positive");

  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(series.data(), n);
  x.array() -= x.mean();
  if (window == WindowKind::hann)
    for (int k = 0; k < n; ++k)
      x[k] *= 0.5 * (1.0 - std::cos(2.0 * M_PI * k / (n - 1)));

  std::vector<cplx> out(n / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(n, x.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                        FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  Spectrum spec;
  spec.window = window;
  spec.frequencies.resize(n / 2 + 1);
  spec.magnitudes.resize(n / 2 + 1);
  const double dw = 2.0 * M_PI / (n * dt);
  for (int k = 0; k <= n / 2; ++k) {
    spec.frequencies[k] = k * dw;
    spec.magnitudes[k] = std::abs(out[k]);
  }
  spec.meta["n"] = std::to_string(n);
  spec.meta["dt"] = std::to_string(dt);
  spec.meta["window"] = window == WindowKind::hann ? "hann" : "none";
  spec.meta["peak_interpolation"] = "parabolic";
  return spec;
}

// Convenience: spectrum of one site row of a field (real part for OTOCs).
inline Spectrum fft_spectrum(const ScramblingField& field, int site,
                             WindowKind window = WindowKind::hann) {
  auto it = std::find(field.sites.begin(), field.sites.end(), site);
  if (it == field.sites.end()) throw usage_error("fft_spectrum: site not in field");
  Eigen::Index row = it - field.sites.begin();
  if (field.times.size() < 2) throw usage_error("fft_spectrum: field has no time grid");
  const double dt = field.times[1] - field.times[0];
  for (std::size_t k = 1; k < field.times.size(); ++k)
    if (std::abs(field.times[k] - field.times[k - 1] - dt) > 1e-9 * std::max(1.0, dt))
      throw usage_error("fft_spectrum: field time grid is not uniform");
  std::vector<double> series(field.times.size());
  for (std::size_t k = 0; k < series.size(); ++k)
    series[k] = field.values(row, static_cast<Eigen::Index>(k)).real();
  return fft_spectrum(series, dt, window);
}

struct Peak {
  double frequency = 0;  // parabolically refined
  double magnitude = 0;
  int bin = 0;
};

// Local maxima above prominence_floor x max magnitude, sorted by
// frequency. Plateaus resolve to their lowest-frequency bin.
inline std::vector<Peak> detect_peaks(const Spectrum& spec, double prominence_floor) {
  const Eigen::Index n = spec.magnitudes.size();
  std::vector<Peak> peaks;
  if (n < 3) return peaks;
  const double floor = prominence_floor * spec.magnitudes.maxCoeff();
  const double dw = spec.frequencies[1] - spec.frequencies[0];
  for (Eigen::Index k = 1; k + 1 < n; ++k) {
    const double m = spec.magnitudes[k];
    if (m <= floor) continue;
    if (!(m > spec.magnitudes[k - 1] && m >= spec.magnitudes[k + 1])) continue;
    Peak p;
    p.bin = static_cast<int>(k);
    p.magnitude = m;
    // quadratic vertex through the three bins around the maximum
    const double y0 = spec.magnitudes[k - 1], y1 = m, y2 = spec.magnitudes[k + 1];
    const double denom = y0 - 2 * y1 + y2;
    double shift = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
    shift = std::clamp(shift, -0.5, 0.5);
    p.frequency = spec.frequencies[k] + shift * dw;
    peaks.push_back(p);
  }
  return peaks;
}

struct ArrivalTimes {
  std::vector<int> sites;
  std::vector<std::optional<double>> times;  // absent when never crossing
  double threshold = 0;
};

// First time the deviation metric (1 - Re F for OTOCs, chi for Holevo)
// crosses the threshold, linearly interpolated between grid points.
inline ArrivalTimes lightcone_front(const ScramblingField& field, double threshold) {
  ArrivalTimes arr;
  arr.sites = field.sites;
  arr.threshold = threshold;
  arr.times.resize(field.sites.size());
  for (Eigen::Index j = 0; j < field.site_count(); ++j) {
    std::optional<double> hit;
    double prev = 0;
    for (Eigen::Index it = 0; it < field.time_count(); ++it) {
      const double v = field.kind == FieldKind::otoc ? 1.0 - field.values(j, it).real()
                                                     : field.values(j, it).real();
      if (v >= threshold) {
        if (it == 0) {
          hit = field.times[0];
        } else {
          const double t0 = field.times[it - 1], t1 = field.times[it];
          hit = t0 + (threshold - prev) / (v - prev) * (t1 - t0);
        }
        break;
      }
      prev = v;
    }
    arr.times[static_cast<std::size_t>(j)] = hit;
  }
  return arr;
}

struct LightConeFit {
  double velocity = 0;   // sites per unit time
  double intercept = 0;  // time offset of the front
  double residual = 0;   // rms of the fit
  double threshold = 0;
  int sites_used = 0;
};

// Least-squares line t = |j - i|/v + c through the crossing times.
inline LightConeFit fit_velocity(const ArrivalTimes& arrivals, int i_site) {
  std::vector<double> d, t;
  for (std::size_t k = 0; k < arrivals.sites.size(); ++k) {
    if (!arrivals.times[k]) continue;
    d.push_back(std::abs(arrivals.sites[k] - i_site));
    t.push_back(*arrivals.times[k]);
  }
  if (d.size() < 4) throw usage_error("fit_velocity: need at least 4 sites with arrivals");
  const double n = static_cast<double>(d.size());
  double dm = 0, tm = 0;
  for (std::size_t k = 0; k < d.size(); ++k) { dm += d[k]; tm += t[k]; }
  dm /= n; tm /= n;
  double sdd = 0, sdt = 0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    sdd += (d[k] - dm) * (d[k] - dm);
    sdt += (d[k] - dm) * (t[k] - tm);
  }
  if (sdd == 0) throw usage_error("fit_velocity: all arrivals at the same distance");
  const double slope = sdt / sdd;
  if (slope <= 0) throw usage_error("fit_velocity: front is not moving outward");
  LightConeFit fit;
  fit.velocity = 1.0 / slope;
  fit.intercept = tm - slope * dm;
  fit.threshold = arrivals.threshold;
  fit.sites_used = static_cast<int>(d.size());
  double ss = 0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double r = t[k] - (slope * d[k] + fit.intercept);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace scarscope

// Copyright (c) 2026 The prosim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "prosim/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "prosim/common.hpp"

namespace prosim {

namespace {

constexpr double kEnergyFloor = 1e-10;
constexpr double kLogMagFloor = 1e-10;

size_t NextPowerOfTwo(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place iterative radix-2 FFT. data.size() must be a power of two.
void Fft(std::vector<std::complex<double>>& data, bool inverse) {
  size_t n = data.size();
  if (n <= 1) return;
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double angle = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    std::complex<double> wn(std::cos(angle), std::sin(angle));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = data[i + k];
        std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wn;
      }
    }
  }
  if (inverse) {
    for (auto& x : data) x /= static_cast<double>(n);
  }
}

// Sum with four accumulators; fixed order, but without the serial latency
// chain of a plain left-to-right reduction.
double Dot(const double* a, const double* b, size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return ((s0 + s1) + (s2 + s3));
}

}  // namespace

FrameGrid MakeFrameGrid(const AudioBuffer& buf, double frame_ms, double hop_ms) {
  if (hop_ms <= 0.0 || frame_ms < hop_ms) {
    throw Error("frame grid: need frame_ms >= hop_ms > 0");
  }
  FrameGrid grid;
  grid.sample_rate = buf.sample_rate;
  grid.frame_length = static_cast<size_t>(
      std::llround(frame_ms * 1e-3 * buf.sample_rate));
  grid.hop = static_cast<size_t>(std::llround(hop_ms * 1e-3 * buf.sample_rate));
  if (grid.frame_length == 0 || grid.hop == 0) {
    throw Error("frame grid: frame or hop rounds to zero samples");
  }
  if (buf.samples.size() < grid.frame_length) {
    throw Error("frame grid: buffer shorter than one frame");
  }
  grid.n_frames = (buf.samples.size() - grid.frame_length) / grid.hop + 1;
  return grid;
}

std::vector<double> HannWindow(size_t n) {
  std::vector<double> w(n);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / static_cast<double>(n - 1));
  }
  return w;
}

std::vector<double> MagnitudeSpectrum(std::span<const double> frame) {
  size_t n = NextPowerOfTwo(std::max<size_t>(frame.size(), 2));
  std::vector<std::complex<double>> data(n);
  for (size_t i = 0; i < frame.size(); ++i) data[i] = frame[i];
  Fft(data, false);
  std::vector<double> mags(n / 2 + 1);
  for (size_t k = 0; k <= n / 2; ++k) mags[k] = std::abs(data[k]);
  return mags;
}

double LogEnergy(std::span<const double> frame) {
  double ms = 0.0;
  for (double v : frame) ms += v * v;
  if (!frame.empty()) ms /= static_cast<double>(frame.size());
  return 10.0 * std::log10(ms + kEnergyFloor);
}

PitchTrack AutocorrPitch(const AudioBuffer& buf, const FrameGrid& grid,
                         const PitchOptions& options) {
  const double fs = grid.sample_rate;
  const size_t lag_min = static_cast<size_t>(std::ceil(fs / options.f0_max_hz));
  const size_t lag_max = static_cast<size_t>(std::floor(fs / options.f0_min_hz));
  const size_t window = static_cast<size_t>(
      std::llround(options.window_ms * 1e-3 * fs));
  const ptrdiff_t n_samples = static_cast<ptrdiff_t>(buf.samples.size());

  PitchTrack track;
  track.f0_hz.assign(grid.n_frames, 0.0);
  track.voicing_strength.assign(grid.n_frames, 0.0);
  track.candidate_hz.assign(grid.n_frames, 0.0);

  std::vector<double> w;
  std::vector<double> r;
  for (size_t i = 0; i < grid.n_frames; ++i) {
    ptrdiff_t center = static_cast<ptrdiff_t>(grid.FrameStart(i) +
                                              grid.frame_length / 2);
    ptrdiff_t lo = std::max<ptrdiff_t>(0, center - static_cast<ptrdiff_t>(window / 2));
    ptrdiff_t hi = std::min(n_samples, lo + static_cast<ptrdiff_t>(window));
    size_t w_len = static_cast<size_t>(hi - lo);
    if (w_len <= lag_min + 8) continue;

    w.assign(buf.samples.begin() + lo, buf.samples.begin() + hi);
    double mean = 0.0;
    for (double v : w) mean += v;
    mean /= static_cast<double>(w_len);
    for (double& v : w) v -= mean;

    // Prefix sums of squares for the per-lag normalization terms.
    std::vector<double> sq_prefix(w_len + 1, 0.0);
    for (size_t t = 0; t < w_len; ++t) {
      sq_prefix[t + 1] = sq_prefix[t] + w[t] * w[t];
    }
    if (sq_prefix[w_len] < 1e-12) continue;  // silence

    size_t max_lag = std::min(lag_max, w_len - 8);
    r.assign(max_lag + 1, 0.0);
    for (size_t lag = lag_min; lag <= max_lag; ++lag) {
      size_t overlap = w_len - lag;
      double num = Dot(w.data(), w.data() + lag, overlap);
      double e1 = sq_prefix[overlap];
      double e2 = sq_prefix[w_len] - sq_prefix[lag];
      double denom = std::sqrt(std::max(e1 * e2, 1e-24));
      r[lag] = num / denom;
    }

    size_t best = lag_min;
    for (size_t lag = lag_min + 1; lag <= max_lag; ++lag) {
      if (r[lag] > r[best]) best = lag;
    }

    // Octave-error suppression: a strongly periodic signal scores nearly as
    // well at twice its period, so a best lag whose half also scores close
    // to the maximum is treated as a subharmonic and replaced.
    size_t half = best / 2;
    if (half >= lag_min && r[half] >= options.octave_suppression * r[best]) {
      best = half;
      while (best > lag_min && r[best - 1] > r[best]) --best;
      while (best < max_lag && r[best + 1] > r[best]) ++best;
    }

    double peak = r[best];
    track.candidate_hz[i] = fs / static_cast<double>(best);
    if (peak < options.voicing_threshold) continue;

    double refined = static_cast<double>(best);
    if (best > lag_min && best < max_lag) {
      double denom = r[best - 1] - 2.0 * r[best] + r[best + 1];
      if (std::abs(denom) > 1e-12) {
        double delta = 0.5 * (r[best - 1] - r[best + 1]) / denom;
        refined += std::clamp(delta, -0.5, 0.5);
      }
    }
    track.f0_hz[i] = fs / refined;
    track.voicing_strength[i] = std::clamp(peak, 0.0, 1.0);
  }
  return track;
}

std::vector<double> SpectralFlux(const std::vector<std::vector<double>>& spectra) {
  if (spectra.size() < 2) throw Error("spectral flux: need at least two frames");
  size_t n_bins = spectra[0].size();
  std::vector<double> prev(n_bins, 0.0), cur(n_bins, 0.0);
  std::vector<double> flux(spectra.size(), 0.0);

  auto normalize = [&](const std::vector<double>& s, std::vector<double>& out) {
    double norm = std::sqrt(Dot(s.data(), s.data(), s.size()));
    if (norm <= 0.0) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    for (size_t k = 0; k < s.size(); ++k) out[k] = s[k] / norm;
  };

  normalize(spectra[0], prev);
  for (size_t i = 1; i < spectra.size(); ++i) {
    if (spectra[i].size() != n_bins) throw Error("spectral flux: ragged spectra");
    normalize(spectra[i], cur);
    double f = 0.0;
    for (size_t k = 0; k < n_bins; ++k) {
      double d = cur[k] - prev[k];
      if (d > 0.0) f += d;
    }
    flux[i] = f;
    std::swap(prev, cur);
  }
  return flux;
}

std::vector<double> Cpps(const AudioBuffer& buf, const FrameGrid& grid,
                         const CppsOptions& options) {
  const double fs = grid.sample_rate;
  const size_t window = static_cast<size_t>(
      std::llround(options.window_ms * 1e-3 * fs));
  const size_t fft_size = NextPowerOfTwo(window);
  const size_t n_quef = fft_size / 2 + 1;
  const ptrdiff_t n_samples = static_cast<ptrdiff_t>(buf.samples.size());
  const std::vector<double> hann = HannWindow(window);

  // Quefrency bins covering [quefrency_min_s, quefrency_max_s].
  size_t q_lo = static_cast<size_t>(std::ceil(options.quefrency_min_s * fs));
  size_t q_hi = static_cast<size_t>(std::floor(options.quefrency_max_s * fs));
  q_hi = std::min(q_hi, n_quef - 1);
  if (q_lo >= q_hi) throw Error("cpps: empty quefrency range");

  // Per-frame real cepstrum of the dB log magnitude spectrum.
  std::vector<std::vector<double>> cepstra(grid.n_frames);
  std::vector<std::complex<double>> data(fft_size);
  for (size_t i = 0; i < grid.n_frames; ++i) {
    ptrdiff_t center = static_cast<ptrdiff_t>(grid.FrameStart(i) +
                                              grid.frame_length / 2);
    ptrdiff_t lo = std::max<ptrdiff_t>(0, center - static_cast<ptrdiff_t>(window / 2));
    ptrdiff_t hi = std::min(n_samples, lo + static_cast<ptrdiff_t>(window));

    std::fill(data.begin(), data.end(), std::complex<double>(0.0, 0.0));
    for (ptrdiff_t t = lo; t < hi; ++t) {
      data[t - lo] = buf.samples[t] * hann[t - lo];
    }
    Fft(data, false);
    // Symmetric log spectrum; its inverse transform is real and even.
    std::vector<double> logmag(n_quef);
    for (size_t k = 0; k < n_quef; ++k) {
      logmag[k] = 20.0 * std::log10(std::abs(data[k]) + kLogMagFloor);
    }
    for (size_t k = 0; k < fft_size; ++k) {
      size_t idx = k <= fft_size / 2 ? k : fft_size - k;
      data[k] = logmag[idx];
    }
    Fft(data, true);
    cepstra[i].resize(n_quef);
    for (size_t q = 0; q < n_quef; ++q) cepstra[i][q] = data[q].real();
  }

  // Moving average across time, then across quefrency.
  auto smooth = [](const std::vector<double>& v, size_t width) {
    if (width <= 1 || v.empty()) return v;
    size_t before = (width - 1) / 2;
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
      size_t lo = i >= before ? i - before : 0;
      size_t hi = std::min(v.size(), i + (width - before));
      double s = 0.0;
      for (size_t j = lo; j < hi; ++j) s += v[j];
      out[i] = s / static_cast<double>(hi - lo);
    }
    return out;
  };

  std::vector<std::vector<double>> smoothed(grid.n_frames,
                                            std::vector<double>(n_quef));
  {
    std::vector<double> column(grid.n_frames);
    for (size_t q = 0; q < n_quef; ++q) {
      for (size_t i = 0; i < grid.n_frames; ++i) column[i] = cepstra[i][q];
      std::vector<double> sm = smooth(column, options.time_smooth_frames);
      for (size_t i = 0; i < grid.n_frames; ++i) smoothed[i][q] = sm[i];
    }
    for (size_t i = 0; i < grid.n_frames; ++i) {
      smoothed[i] = smooth(smoothed[i], options.quefrency_smooth_bins);
    }
  }

  std::vector<double> out(grid.n_frames, 0.0);
  for (size_t i = 0; i < grid.n_frames; ++i) {
    const std::vector<double>& c = smoothed[i];
    // Least-squares line over the quefrency range.
    double n = static_cast<double>(q_hi - q_lo + 1);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t q = q_lo; q <= q_hi; ++q) {
      double x = static_cast<double>(q);
      sx += x;
      sy += c[q];
      sxx += x * x;
      sxy += x * c[q];
    }
    double denom = n * sxx - sx * sx;
    double slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
    double intercept = (sy - slope * sx) / n;

    size_t peak = q_lo;
    for (size_t q = q_lo + 1; q <= q_hi; ++q) {
      if (c[q] > c[peak]) peak = q;
    }
    out[i] = c[peak] - (intercept + slope * static_cast<double>(peak));
  }
  return out;
}

}  // namespace prosim

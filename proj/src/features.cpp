#include "features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <mutex>
#include <numbers>

#include "errors.hpp"

namespace colorforest {

namespace {

constexpr int kLocalWindowRadius = 2;  // 5x5 stddev window
constexpr double kGaborSigmaFactor = 0.56;
constexpr int kSiftPatchRadius = 8;       // offsets -8..7
constexpr int kSiftCellSize = 4;
constexpr int kSiftOriBins = 8;
constexpr double kSiftClip = 0.2;

void require_gray(const Raster& img, const char* who) {
  if (img.channels() != 1 || img.width() <= 0 || img.height() <= 0) {
    throw InvalidArgument(std::string(who) + ": expected a non-empty single-channel raster");
  }
}

void require_match(const Raster& img, const SuperpixelMap& sp, const char* who) {
  if (sp.width != img.width() || sp.height != img.height()) {
    throw InvalidArgument(std::string(who) + ": superpixel map shape does not match the raster");
  }
}

// Mean of `values` over each superpixel, paired with the mean over the union
// of its neighbors' member sets. Isolated superpixels reuse their own mean.
std::vector<std::pair<double, double>> pooled_means(const std::vector<double>& values,
                                                    const SuperpixelMap& sp) {
  std::vector<double> sums(sp.count, 0.0);
  for (int id = 0; id < sp.count; ++id) {
    double s = 0.0;
    for (int px : sp.members[id]) s += values[px];
    sums[id] = s;
  }
  std::vector<std::pair<double, double>> out(sp.count);
  for (int id = 0; id < sp.count; ++id) {
    const double own = sums[id] / static_cast<double>(sp.members[id].size());
    double nsum = 0.0;
    std::size_t ncount = 0;
    for (int nb : sp.neighbors[id]) {
      nsum += sums[nb];
      ncount += sp.members[nb].size();
    }
    out[id] = {own, ncount == 0 ? own : nsum / static_cast<double>(ncount)};
  }
  return out;
}

// Smallest 5-smooth size >= n; keeps FFTW on its fast code paths.
int next_fast_size(int n) {
  for (;; ++n) {
    int m = n;
    for (int p : {2, 3, 5}) {
      while (m % p == 0) m /= p;
    }
    if (m == 1) return n;
  }
}

std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

// Out-of-place 2D real FFT pair over a fixed rows x cols grid.
class Fft2d {
 public:
  Fft2d(int rows, int cols)
      : rows_(rows),
        cols_(cols),
        spec_cols_(cols / 2 + 1),
        real_(fftw_alloc_real(static_cast<std::size_t>(rows) * cols)),
        spec_(fftw_alloc_complex(static_cast<std::size_t>(rows) * spec_cols_)) {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    forward_ = fftw_plan_dft_r2c_2d(rows_, cols_, real_, spec_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_2d(rows_, cols_, spec_, real_, FFTW_ESTIMATE);
  }

  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  ~Fft2d() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(real_);
    fftw_free(spec_);
  }

  double& real_at(int row, int col) {
    return real_[static_cast<std::size_t>(row) * cols_ + col];
  }

  void zero_real() {
    std::fill(real_, real_ + static_cast<std::size_t>(rows_) * cols_, 0.0);
  }

  void forward() { fftw_execute(forward_); }
  void inverse() { fftw_execute(inverse_); }

  std::vector<std::complex<double>> copy_spectrum() const {
    const std::size_t n = static_cast<std::size_t>(rows_) * spec_cols_;
    std::vector<std::complex<double>> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = {spec_[i][0], spec_[i][1]};
    return out;
  }

  // spec <- spec * other, elementwise.
  void multiply_spectrum(const std::vector<std::complex<double>>& other) {
    const std::size_t n = static_cast<std::size_t>(rows_) * spec_cols_;
    for (std::size_t i = 0; i < n; ++i) {
      const std::complex<double> p =
          std::complex<double>(spec_[i][0], spec_[i][1]) * other[i];
      spec_[i][0] = p.real();
      spec_[i][1] = p.imag();
    }
  }

 private:
  int rows_;
  int cols_;
  int spec_cols_;
  double* real_;
  fftw_complex* spec_;
  fftw_plan forward_;
  fftw_plan inverse_;
};

}  // namespace

GaborKernel make_gabor_kernel(int orientation, int scale) {
  if (orientation < 0 || orientation >= kGaborOrientations) {
    throw InvalidArgument("make_gabor_kernel: orientation out of range");
  }
  if (scale < 0 || scale >= kGaborScales) {
    throw InvalidArgument("make_gabor_kernel: scale out of range");
  }
  GaborKernel k;
  k.wavelength = std::numbers::pi * std::exp(static_cast<double>(scale));
  k.sigma = kGaborSigmaFactor * k.wavelength;
  k.radius = static_cast<int>(std::ceil(3.0 * k.sigma));
  const double theta = static_cast<double>(orientation) * std::numbers::pi / 8.0;
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const int side = 2 * k.radius + 1;
  const std::size_t taps = static_cast<std::size_t>(side) * side;
  k.real.resize(taps);
  k.imag.resize(taps);
  double mean_re = 0.0;
  double mean_im = 0.0;
  std::size_t i = 0;
  for (int dy = -k.radius; dy <= k.radius; ++dy) {
    for (int dx = -k.radius; dx <= k.radius; ++dx, ++i) {
      const double envelope =
          std::exp(-(static_cast<double>(dx) * dx + static_cast<double>(dy) * dy) /
                   (2.0 * k.sigma * k.sigma));
      const double phase =
          2.0 * std::numbers::pi * (dx * ct + dy * st) / k.wavelength;
      k.real[i] = envelope * std::cos(phase);
      k.imag[i] = envelope * std::sin(phase);
      mean_re += k.real[i];
      mean_im += k.imag[i];
    }
  }
  mean_re /= static_cast<double>(taps);
  mean_im /= static_cast<double>(taps);
  for (std::size_t t = 0; t < taps; ++t) {
    k.real[t] -= mean_re;
    k.imag[t] -= mean_im;
  }
  return k;
}

std::vector<std::pair<double, double>> intensity_feature(const Raster& gray,
                                                         const SuperpixelMap& sp) {
  require_gray(gray, "intensity_feature");
  require_match(gray, sp, "intensity_feature");
  std::vector<double> values(gray.plane(0).begin(), gray.plane(0).end());
  return pooled_means(values, sp);
}

Raster local_stddev_map(const Raster& gray) {
  require_gray(gray, "local_stddev_map");
  const int h = gray.height();
  const int w = gray.width();
  Raster out(w, h, 1);
  for (int r = 0; r < h; ++r) {
    const int r0 = std::max(r - kLocalWindowRadius, 0);
    const int r1 = std::min(r + kLocalWindowRadius, h - 1);
    for (int c = 0; c < w; ++c) {
      const int c0 = std::max(c - kLocalWindowRadius, 0);
      const int c1 = std::min(c + kLocalWindowRadius, w - 1);
      // Two-pass variance on values shifted by the window center. The shift
      // keeps the sums cancellation-free and makes constant windows exactly 0.
      const double shift = gray.at(0, r, c);
      double sum = 0.0;
      for (int y = r0; y <= r1; ++y) {
        for (int x = c0; x <= c1; ++x) sum += gray.at(0, y, x) - shift;
      }
      const double n = static_cast<double>((r1 - r0 + 1) * (c1 - c0 + 1));
      const double mean = sum / n;
      double sq = 0.0;
      for (int y = r0; y <= r1; ++y) {
        for (int x = c0; x <= c1; ++x) {
          const double d = gray.at(0, y, x) - shift - mean;
          sq += d * d;
        }
      }
      out.at(0, r, c) = std::sqrt(sq / n);
    }
  }
  return out;
}

std::vector<std::pair<double, double>> stddev_feature(const Raster& gray,
                                                      const SuperpixelMap& sp) {
  require_match(gray, sp, "stddev_feature");
  const Raster sd = local_stddev_map(gray);
  std::vector<double> values(sd.plane(0).begin(), sd.plane(0).end());
  return pooled_means(values, sp);
}

std::vector<Raster> gabor_magnitudes(const Raster& gray) {
  require_gray(gray, "gabor_magnitudes");
  const int h = gray.height();
  const int w = gray.width();
  std::vector<std::vector<double>> mag(kGaborDim);

  // One padded-image FFT per scale, shared by its eight orientations.
  for (int s = 0; s < kGaborScales; ++s) {
    GaborKernel kern = make_gabor_kernel(0, s);
    const int radius = kern.radius;
    const int side = 2 * radius + 1;
    const int padded_h = h + 2 * radius;
    const int padded_w = w + 2 * radius;
    const int fft_h = next_fast_size(padded_h);
    const int fft_w = next_fast_size(padded_w);
    Fft2d fft(fft_h, fft_w);

    fft.zero_real();
    for (int y = 0; y < padded_h; ++y) {
      const int sy = std::clamp(y - radius, 0, h - 1);
      for (int x = 0; x < padded_w; ++x) {
        const int sx = std::clamp(x - radius, 0, w - 1);
        fft.real_at(y, x) = gray.at(0, sy, sx);
      }
    }
    fft.forward();
    const std::vector<std::complex<double>> image_spec = fft.copy_spectrum();

    for (int o = 0; o < kGaborOrientations; ++o) {
      if (o != 0) kern = make_gabor_kernel(o, s);

      // Correlation via circular convolution: tap (dy, dx) is written at the
      // wrapped position (-dy mod fft_h, -dx mod fft_w).
      auto response = [&](const std::vector<double>& taps) {
        fft.zero_real();
        for (int dy = -radius; dy <= radius; ++dy) {
          const int y = (fft_h - dy) % fft_h;
          for (int dx = -radius; dx <= radius; ++dx) {
            const int x = (fft_w - dx) % fft_w;
            fft.real_at(y, x) = taps[static_cast<std::size_t>(dy + radius) * side +
                                     (dx + radius)];
          }
        }
        fft.forward();
        fft.multiply_spectrum(image_spec);
        fft.inverse();
        std::vector<double> out(static_cast<std::size_t>(h) * w);
        const double scale = 1.0 / (static_cast<double>(fft_h) * fft_w);
        for (int r = 0; r < h; ++r) {
          for (int c = 0; c < w; ++c) {
            out[static_cast<std::size_t>(r) * w + c] =
                fft.real_at(r + radius, c + radius) * scale;
          }
        }
        return out;
      };

      const std::vector<double> even = response(kern.real);
      const std::vector<double> odd = response(kern.imag);
      std::vector<double>& m = mag[kGaborScales * o + s];
      m.resize(even.size());
      for (std::size_t i = 0; i < even.size(); ++i) {
        m[i] = std::hypot(even[i], odd[i]);
      }
    }
  }

  std::vector<Raster> out;
  out.reserve(kGaborDim);
  for (int d = 0; d < kGaborDim; ++d) {
    Raster plane(w, h, 1);
    std::copy(mag[d].begin(), mag[d].end(), plane.plane(0).begin());
    out.push_back(std::move(plane));
  }
  return out;
}

std::vector<std::array<double, kGaborDim>> gabor_feature(const Raster& gray,
                                                         const SuperpixelMap& sp) {
  require_match(gray, sp, "gabor_feature");
  const std::vector<Raster> planes = gabor_magnitudes(gray);
  std::vector<std::array<double, kGaborDim>> out(sp.count);
  for (auto& f : out) f.fill(0.0);
  for (int d = 0; d < kGaborDim; ++d) {
    const std::span<const double> values = planes[d].plane(0);
    for (int id = 0; id < sp.count; ++id) {
      double s = 0.0;
      for (int px : sp.members[id]) s += values[px];
      out[id][d] = s / static_cast<double>(sp.members[id].size());
    }
  }
  return out;
}

std::array<double, kSiftDim> sift_descriptor_at(const Raster& gray, int row, int col) {
  require_gray(gray, "sift_descriptor_at");
  if (row < 0 || row >= gray.height() || col < 0 || col >= gray.width()) {
    throw InvalidArgument("sift_descriptor_at: center out of bounds");
  }
  const int h = gray.height();
  const int w = gray.width();
  std::array<double, kSiftDim> desc{};

  for (int dy = -kSiftPatchRadius; dy < kSiftPatchRadius; ++dy) {
    const int y = row + dy;
    if (y < 0 || y >= h) continue;
    const int cell_r = (dy + kSiftPatchRadius) / kSiftCellSize;
    for (int dx = -kSiftPatchRadius; dx < kSiftPatchRadius; ++dx) {
      const int x = col + dx;
      if (x < 0 || x >= w) continue;
      const double gx = 0.5 * (gray.at(0, y, std::min(x + 1, w - 1)) -
                               gray.at(0, y, std::max(x - 1, 0)));
      const double gy = 0.5 * (gray.at(0, std::min(y + 1, h - 1), x) -
                               gray.at(0, std::max(y - 1, 0), x));
      const double magnitude = std::hypot(gx, gy);
      if (magnitude == 0.0) continue;
      double angle = std::atan2(gy, gx);
      if (angle < 0.0) angle += 2.0 * std::numbers::pi;
      const double bin_pos = angle / (2.0 * std::numbers::pi / kSiftOriBins);
      int bin0 = static_cast<int>(bin_pos) % kSiftOriBins;
      const double frac = bin_pos - std::floor(bin_pos);
      const int bin1 = (bin0 + 1) % kSiftOriBins;
      const int cell_c = (dx + kSiftPatchRadius) / kSiftCellSize;
      const int base = (cell_r * 4 + cell_c) * kSiftOriBins;
      desc[base + bin0] += magnitude * (1.0 - frac);
      desc[base + bin1] += magnitude * frac;
    }
  }

  double norm_sq = 0.0;
  for (double v : desc) norm_sq += v * v;
  if (norm_sq <= 0.0) return desc;
  double inv = 1.0 / std::sqrt(norm_sq);
  for (double& v : desc) v = std::min(v * inv, kSiftClip);
  norm_sq = 0.0;
  for (double v : desc) norm_sq += v * v;
  inv = 1.0 / std::sqrt(norm_sq);
  for (double& v : desc) v *= inv;
  return desc;
}

std::vector<std::array<double, kSiftDim>> dense_sift_feature(const Raster& gray,
                                                             const SuperpixelMap& sp) {
  require_match(gray, sp, "dense_sift_feature");
  std::vector<std::array<double, kSiftDim>> out(sp.count);
  for (auto& f : out) f.fill(0.0);
  const int w = gray.width();
  for (int id = 0; id < sp.count; ++id) {
    auto& acc = out[id];
    for (int px : sp.members[id]) {
      const std::array<double, kSiftDim> d = sift_descriptor_at(gray, px / w, px % w);
      for (int i = 0; i < kSiftDim; ++i) acc[i] += d[i];
    }
    const double inv = 1.0 / static_cast<double>(sp.members[id].size());
    for (double& v : acc) v *= inv;
  }
  return out;
}

std::vector<FeatureVector> assemble_features(const Raster& gray,
                                             const SuperpixelMap& sp,
                                             const FeatureScales& scales) {
  require_gray(gray, "assemble_features");
  require_match(gray, sp, "assemble_features");
  const auto intensity = intensity_feature(gray, sp);
  const auto stddev = stddev_feature(gray, sp);
  const auto gabor = gabor_feature(gray, sp);
  const auto sift = dense_sift_feature(gray, sp);

  std::vector<FeatureVector> out(sp.count);
  for (int id = 0; id < sp.count; ++id) {
    FeatureVector& f = out[id];
    f[0] = intensity[id].first;
    f[1] = intensity[id].second;
    f[2] = stddev[id].first;
    f[3] = stddev[id].second;
    for (int d = 0; d < kGaborDim; ++d) {
      f[kGaborOffset + d] = gabor[id][d] * scales.gabor;
    }
    for (int d = 0; d < kSiftDim; ++d) {
      f[kSiftOffset + d] = sift[id][d] * scales.sift;
    }
  }
  return out;
}

}  // namespace colorforest

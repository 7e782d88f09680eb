#include "propagate.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

#include "errors.hpp"

namespace colorforest {

namespace {

constexpr double kSigmaFloor = 1e-4;

void require_gray(const Raster& img, const char* who) {
  if (img.channels() != 1 || img.width() <= 0 || img.height() <= 0) {
    throw InvalidArgument(std::string(who) + ": expected a non-empty single-channel raster");
  }
}

// y = (I - W) x over every pixel row.
void apply_system(const WeightStencil& st, const std::vector<double>& x,
                  std::vector<double>& y) {
  const std::size_t n = st.pixel_count();
  for (std::size_t p = 0; p < n; ++p) {
    double acc = x[p];
    for (std::size_t k = st.offsets[p]; k < st.offsets[p + 1]; ++k) {
      acc -= st.weights[k] * x[st.neighbors[k]];
    }
    y[p] = acc;
  }
}

// y = (I - W)^T r; W is asymmetric (sigma is per-row), so the transpose
// scatters each row's weights onto its neighbors.
void apply_system_transpose(const WeightStencil& st, const std::vector<double>& r,
                            std::vector<double>& y) {
  const std::size_t n = st.pixel_count();
  std::copy(r.begin(), r.end(), y.begin());
  for (std::size_t q = 0; q < n; ++q) {
    const double rq = r[q];
    for (std::size_t k = st.offsets[q]; k < st.offsets[q + 1]; ++k) {
      y[st.neighbors[k]] -= st.weights[k] * rq;
    }
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Least-squares solve of (I - W) c = 0 with c fixed at scribble pixels,
// as conjugate gradient on the normal equations restricted to free pixels.
std::vector<double> solve_channel(const WeightStencil& st,
                                  const std::vector<char>& fixed,
                                  const std::vector<double>& fixed_values,
                                  double tolerance, int max_iterations,
                                  const char* channel_name) {
  const std::size_t n = st.pixel_count();
  auto project_free = [&fixed](std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (fixed[i]) v[i] = 0.0;
    }
  };

  bool any_free = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!fixed[i]) {
      any_free = true;
      break;
    }
  }
  if (!any_free) return fixed_values;

  // b = -A^T A s on the free coordinates, s = scribble embedding.
  std::vector<double> tmp1(n), tmp2(n);
  apply_system(st, fixed_values, tmp1);
  apply_system_transpose(st, tmp1, tmp2);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = -tmp2[i];
  project_free(b);

  std::vector<double> x(n, 0.0);
  const double b_norm = std::sqrt(dot(b, b));
  if (b_norm > 0.0) {
    std::vector<double> r(b);
    std::vector<double> p(b);
    double rr = dot(r, r);
    std::vector<double> best_x(x);
    double best_rr = rr;
    bool converged = false;
    for (int it = 0; it < max_iterations; ++it) {
      apply_system(st, p, tmp1);
      apply_system_transpose(st, tmp1, tmp2);
      project_free(tmp2);  // tmp2 = A_f^T A_f p
      const double denom = dot(p, tmp2);
      if (denom <= 0.0) break;  // numerically exhausted search direction
      const double alpha = rr / denom;
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
      for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * tmp2[i];
      const double rr_next = dot(r, r);
      if (rr_next < best_rr) {
        best_rr = rr_next;
        best_x = x;
      }
      if (std::sqrt(rr_next) < tolerance * b_norm) {
        converged = true;
        break;
      }
      const double beta = rr_next / rr;
      for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
      rr = rr_next;
    }
    if (!converged) {
      std::cerr << "warning: " << channel_name << " chroma solve stopped at relative residual "
                << std::sqrt(best_rr) / b_norm << " after " << max_iterations
                << " iterations\n";
      x = best_x;
    }
  }

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = fixed[i] ? fixed_values[i] : x[i];
  return out;
}

}  // namespace

double luminance_affinity(double yp, double yq, double sigma_p) {
  if (!(sigma_p > 0.0)) {
    throw InvalidArgument("luminance_affinity: sigma must be positive");
  }
  const double d = yp - yq;
  return std::exp(-(d * d) / (2.0 * sigma_p * sigma_p));
}

WeightStencil compute_weights(const Raster& gray) {
  require_gray(gray, "compute_weights");
  const int h = gray.height();
  const int w = gray.width();
  WeightStencil st;
  st.width = w;
  st.height = h;
  const std::size_t n = st.pixel_count();
  st.sigma.resize(n);
  st.offsets.assign(n + 1, 0);

  for (int r = 0; r < h; ++r) {
    const int r0 = std::max(r - 1, 0);
    const int r1 = std::min(r + 1, h - 1);
    for (int c = 0; c < w; ++c) {
      const int c0 = std::max(c - 1, 0);
      const int c1 = std::min(c + 1, w - 1);
      double sum = 0.0;
      double sum_sq = 0.0;
      for (int y = r0; y <= r1; ++y) {
        for (int x = c0; x <= c1; ++x) {
          const double v = gray.at(0, y, x);
          sum += v;
          sum_sq += v * v;
        }
      }
      const double m = static_cast<double>((r1 - r0 + 1) * (c1 - c0 + 1));
      const double variance = std::max(sum_sq / m - (sum / m) * (sum / m), 0.0);
      st.sigma[static_cast<std::size_t>(r) * w + c] =
          std::max(std::sqrt(variance), kSigmaFloor);
    }
  }

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t p = static_cast<std::size_t>(r) * w + c;
      const double yp = gray.at(0, r, c);
      const double sigma = st.sigma[p];
      const std::size_t begin = st.weights.size();
      double total = 0.0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const int nr = r + dr;
          const int nc = c + dc;
          if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
          const double raw = luminance_affinity(yp, gray.at(0, nr, nc), sigma);
          st.neighbors.push_back(nr * w + nc);
          st.weights.push_back(raw);
          total += raw;
        }
      }
      for (std::size_t k = begin; k < st.weights.size(); ++k) st.weights[k] /= total;
      st.offsets[p + 1] = st.weights.size();
    }
  }
  return st;
}

ScribbleSet place_scribbles(const SuperpixelMap& sp, const std::vector<int>& labels,
                            const ChromaPalette& palette, const Raster& gray) {
  require_gray(gray, "place_scribbles");
  if (gray.width() != sp.width || gray.height() != sp.height) {
    throw InvalidArgument("place_scribbles: raster shape does not match superpixels");
  }
  if (static_cast<int>(labels.size()) != sp.count) {
    throw InvalidArgument("place_scribbles: label count does not match superpixel count");
  }
  ScribbleSet set;
  set.entries.reserve(sp.count);
  for (int id = 0; id < sp.count; ++id) {
    const int px = centroid_pixel(sp, id);
    const double g = gray.plane(0)[px];
    const ColorTriple gray_lab = rgb_to_lab({ColorSpace::kSrgb, g, g, g});
    const auto [a, b] = label_to_chroma(palette, labels[id]);
    const ColorTriple rgb = lab_to_rgb({ColorSpace::kLab, gray_lab.v0, a, b});
    const ColorTriple yuv = rgb_to_yuv(rgb);
    set.entries.push_back({px, yuv.v1, yuv.v2});
  }
  return set;
}

std::pair<Raster, Raster> propagate_chroma(const WeightStencil& stencil,
                                           const ScribbleSet& scribbles,
                                           double tolerance, int max_iterations) {
  if (stencil.width <= 0 || stencil.height <= 0) {
    throw InvalidArgument("propagate_chroma: empty stencil");
  }
  if (scribbles.entries.empty()) {
    throw InvalidArgument("propagate_chroma: at least one scribble is required");
  }
  if (!(tolerance > 0.0) || max_iterations < 1) {
    throw InvalidArgument("propagate_chroma: bad solver parameters");
  }
  const std::size_t n = stencil.pixel_count();
  std::vector<char> fixed(n, 0);
  std::vector<double> fixed_u(n, 0.0);
  std::vector<double> fixed_v(n, 0.0);
  for (const Scribble& s : scribbles.entries) {
    if (s.pixel < 0 || static_cast<std::size_t>(s.pixel) >= n) {
      throw InvalidArgument("propagate_chroma: scribble pixel out of range");
    }
    if (fixed[s.pixel]) {
      throw InvalidArgument("propagate_chroma: duplicate scribble at pixel " +
                            std::to_string(s.pixel));
    }
    fixed[s.pixel] = 1;
    fixed_u[s.pixel] = s.u;
    fixed_v[s.pixel] = s.v;
  }

  const std::vector<double> u =
      solve_channel(stencil, fixed, fixed_u, tolerance, max_iterations, "U");
  const std::vector<double> v =
      solve_channel(stencil, fixed, fixed_v, tolerance, max_iterations, "V");

  Raster ur(stencil.width, stencil.height, 1);
  Raster vr(stencil.width, stencil.height, 1);
  std::copy(u.begin(), u.end(), ur.plane(0).begin());
  std::copy(v.begin(), v.end(), vr.plane(0).begin());
  return {std::move(ur), std::move(vr)};
}

Raster compose_output(const Raster& gray, const Raster& u, const Raster& v) {
  require_gray(gray, "compose_output");
  if (!gray.same_shape(u) || !gray.same_shape(v)) {
    throw InvalidArgument("compose_output: channel shapes differ");
  }
  Raster out(gray.width(), gray.height(), 3);
  const std::size_t n = gray.pixel_count();
  const std::span<const double> yp = gray.plane(0);
  const std::span<const double> up = u.plane(0);
  const std::span<const double> vp = v.plane(0);
  for (std::size_t i = 0; i < n; ++i) {
    const ColorTriple rgb = yuv_to_rgb({ColorSpace::kYuv, yp[i], up[i], vp[i]});
    out.plane(0)[i] = rgb.v0;
    out.plane(1)[i] = rgb.v1;
    out.plane(2)[i] = rgb.v2;
  }
  return out;
}

}  // namespace colorforest

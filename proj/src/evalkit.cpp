#include "sdcomp/evalkit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "sdcomp/errors.hpp"

namespace sdcomp {

namespace {

// Solve a 4x4 linear system by Gaussian elimination with partial
// pivoting; throws on (near-)singular systems.
std::array<double, 4> solve4(std::array<std::array<double, 4>, 4> a, std::array<double, 4> b) {
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int row = col + 1; row < 4; ++row)
      if (std::fabs(a[row][col]) > std::fabs(a[pivot][col])) pivot = row;
    if (std::fabs(a[pivot][col]) < 1e-12)
      throw FormatError("bd-rate: degenerate fit (singular normal equations)");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int row = col + 1; row < 4; ++row) {
      double f = a[row][col] / a[col][col];
      for (int k = col; k < 4; ++k) a[row][k] -= f * a[col][k];
      b[row] -= f * b[col];
    }
  }
  std::array<double, 4> x{};
  for (int row = 3; row >= 0; --row) {
    double s = b[row];
    for (int k = row + 1; k < 4; ++k) s -= a[row][k] * x[k];
    x[row] = s / a[row][row];
  }
  return x;
}

struct CubicFit {
  std::array<double, 4> coeff;  // in t = quality - center
  double center;
};

// Least-squares cubic of log10(rate) against quality, fitted in a
// centered basis for conditioning.
CubicFit fit_log_rate(const RdCurve& curve) {
  double center = 0.0;
  for (const auto& p : curve.points) center += p.quality;
  center /= double(curve.points.size());

  std::array<std::array<double, 4>, 4> ata{};
  std::array<double, 4> atb{};
  for (const auto& p : curve.points) {
    double t = p.quality - center;
    double log_rate = std::log10(p.rate);
    std::array<double, 4> row = {1.0, t, t * t, t * t * t};
    for (int i = 0; i < 4; ++i) {
      atb[i] += row[i] * log_rate;
      for (int j = 0; j < 4; ++j) ata[i][j] += row[i] * row[j];
    }
  }
  return CubicFit{solve4(ata, atb), center};
}

double integrate_fit(const CubicFit& fit, double lo, double hi) {
  double a = lo - fit.center;
  double b = hi - fit.center;
  auto antiderivative = [&](double t) {
    return fit.coeff[0] * t + fit.coeff[1] * t * t / 2.0 + fit.coeff[2] * t * t * t / 3.0 +
           fit.coeff[3] * t * t * t * t / 4.0;
  };
  return antiderivative(b) - antiderivative(a);
}

}  // namespace

void validate_curve(const RdCurve& curve) {
  if (curve.points.size() < 4)
    throw FormatError("rd curve: needs at least 4 points");
  for (size_t i = 0; i < curve.points.size(); ++i) {
    const RdPoint& p = curve.points[i];
    if (!(p.rate > 0.0) || !std::isfinite(p.rate) || !std::isfinite(p.quality))
      throw FormatError("rd curve: rates must be finite and positive, qualities finite");
    if (i > 0) {
      if (!(p.rate > curve.points[i - 1].rate))
        throw FormatError("rd curve: rates must be strictly increasing");
      if (p.quality < curve.points[i - 1].quality)
        throw FormatError("rd curve: qualities must be non-decreasing");
    }
  }
}

double psnr(const Image& a, const Image& b, const Bitmap* mask) {
  if (a.width != b.width || a.height != b.height)
    throw FormatError("psnr: image dimensions differ");
  if (mask && (mask->width != a.width || mask->height != a.height))
    throw FormatError("psnr: mask dimensions differ from images");

  uint64_t sum_sq = 0;
  uint64_t samples = 0;
  size_t count = size_t(a.width) * a.height;
  for (size_t i = 0; i < count; ++i) {
    if (mask && !mask->bits[i]) continue;
    for (int c = 0; c < 3; ++c) {
      int d = int(a.pixels[i * 3 + c]) - int(b.pixels[i * 3 + c]);
      sum_sq += uint64_t(int64_t(d) * d);
    }
    samples += 3;
  }
  if (samples == 0) throw FormatError("psnr: empty mask");
  if (sum_sq == 0) return std::numeric_limits<double>::infinity();
  double mse = double(sum_sq) / double(samples);
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double bpp(size_t stream_bytes, uint32_t width, uint32_t height) {
  if (width == 0 || height == 0) throw FormatError("bpp: empty frame");
  return 8.0 * double(stream_bytes) / (double(width) * double(height));
}

std::vector<RdSweepRow> rd_sweep(const Image& img, const SemanticPriors& priors,
                                 const Ranking& ranking, const std::vector<int>& filters,
                                 const std::vector<QualityProfile>& profiles) {
  if (filters.empty() || profiles.empty())
    throw FormatError("rd sweep: needs at least one filter and one profile");
  for (int f : filters)
    if (f < 1 || f > 5) throw FormatError("rd sweep: filters must be in [1,5]");

  std::vector<int> sorted_filters = filters;
  std::sort(sorted_filters.begin(), sorted_filters.end());
  sorted_filters.erase(std::unique(sorted_filters.begin(), sorted_filters.end()),
                       sorted_filters.end());

  // Union of ranked-object masks/boxes, full-frame.
  Bitmap object_union(img.width, img.height);
  bool any_ranked = false;
  for (const auto& [id, level] : ranking.level_of) {
    (void)level;
    const GroundedObject* obj = find_object(priors, id);
    if (!obj) throw FormatError("rd sweep: ranking references unknown object id");
    any_ranked = true;
    for (uint32_t row = 0; row < obj->bbox.h; ++row) {
      for (uint32_t col = 0; col < obj->bbox.w; ++col) {
        if (obj->mask && !obj->mask->bits[size_t(row) * obj->bbox.w + col]) continue;
        object_union.bits[size_t(obj->bbox.y + row) * img.width + obj->bbox.x + col] = 1;
      }
    }
  }

  std::map<size_t, std::vector<uint8_t>> encoded;  // profile index -> bytes
  std::vector<RdSweepRow> rows;
  for (int filter : sorted_filters) {
    for (size_t pi = 0; pi < profiles.size(); ++pi) {
      auto it = encoded.find(pi);
      if (it == encoded.end())
        it = encoded.emplace(pi, encode_image(img, priors, ranking, profiles[pi])).first;
      std::vector<uint8_t> cut = truncate(it->second, LevelCode(filter));
      Image recon = decode_image(cut, LevelFilter{kLevelBackground});

      RdSweepRow row;
      row.filter = filter;
      row.profile = profiles[pi];
      row.bpp = bpp(cut.size(), img.width, img.height);
      row.psnr_full = psnr(img, recon);
      row.psnr_objects = any_ranked ? psnr(img, recon, &object_union)
                                    : std::numeric_limits<double>::quiet_NaN();
      rows.push_back(row);
    }
  }
  return rows;
}

std::string rd_sweep_csv(const std::vector<RdSweepRow>& rows) {
  std::string out = "filter,profile,bpp,psnr_full,psnr_objects\n";
  char buf[160];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%d-%d-%d-%d-%d,%.6g,%.6g,%.6g\n", row.filter,
                  row.profile.l1.value, row.profile.l2.value, row.profile.l3.value,
                  row.profile.other.value, row.profile.background.value, row.bpp,
                  row.psnr_full, row.psnr_objects);
    out += buf;
  }
  return out;
}

double bd_rate(const RdCurve& anchor, const RdCurve& test) {
  validate_curve(anchor);
  validate_curve(test);

  double lo = std::max(anchor.points.front().quality, test.points.front().quality);
  double hi = std::min(anchor.points.back().quality, test.points.back().quality);
  if (!(lo < hi)) throw FormatError("bd-rate: curves have no overlapping quality interval");

  CubicFit anchor_fit = fit_log_rate(anchor);
  CubicFit test_fit = fit_log_rate(test);
  double delta =
      (integrate_fit(test_fit, lo, hi) - integrate_fit(anchor_fit, lo, hi)) / (hi - lo);
  return (std::pow(10.0, delta) - 1.0) * 100.0;
}

}  // namespace sdcomp

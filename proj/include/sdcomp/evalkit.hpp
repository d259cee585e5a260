#pragma once

#include <string>
#include <vector>

#include "sdcomp/image.hpp"
#include "sdcomp/pipeline.hpp"
#include "sdcomp/priors.hpp"

namespace sdcomp {

struct RdPoint {
  double rate = 0.0;     // bits per pixel
  double quality = 0.0;  // dB or task metric
};

// Valid curves hold >= 4 points with strictly increasing rate and
// non-decreasing quality.
struct RdCurve {
  std::vector<RdPoint> points;
};

void validate_curve(const RdCurve& curve);

// RGB-sample MSE based PSNR; +infinity for identical inputs. A mask, if
// given, must be full-frame and restricts the sample set.
double psnr(const Image& a, const Image& b, const Bitmap* mask = nullptr);

double bpp(size_t stream_bytes, uint32_t width, uint32_t height);

struct RdSweepRow {
  int filter = 5;
  QualityProfile profile;
  double bpp = 0.0;
  double psnr_full = 0.0;
  double psnr_objects = 0.0;  // NaN when no ranked object exists
};

// For each (filter, profile): encode, truncate at the filter level,
// decode, measure full-frame PSNR and PSNR restricted to the union of
// ranked-object masks/boxes. Filters are swept in ascending order,
// profiles in the given order.
std::vector<RdSweepRow> rd_sweep(const Image& img, const SemanticPriors& priors,
                                 const Ranking& ranking, const std::vector<int>& filters,
                                 const std::vector<QualityProfile>& profiles);

// CSV: header `filter,profile,bpp,psnr_full,psnr_objects`, 6 significant
// digits, profile printed as dash-joined quality indices.
std::string rd_sweep_csv(const std::vector<RdSweepRow>& rows);

// Bjontegaard delta rate in percent: least-squares cubic fit of
// log10(rate) over quality per curve, integrated over the shared quality
// interval.
double bd_rate(const RdCurve& anchor, const RdCurve& test);

}  // namespace sdcomp

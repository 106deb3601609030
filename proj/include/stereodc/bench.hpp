#pragma once

#include <string>
#include <vector>

#include "stereodc/codec.hpp"
#include "stereodc/image.hpp"

namespace stereodc {

// RD curve for Bjontegaard statistics: >= 4 points, bpp strictly increasing.
struct RDCurve {
    std::vector<RDPoint> points;

    void validate() const;
};

// One row of the rate-allocation report. Per-stream bpp is substream bytes
// over single-image pixels; the total averages over both images.
struct AllocationRow {
    double lambda = 0.0;
    double bpp_total = 0.0;
    double psnr_avg = 0.0;
    double bpp_r = 0.0;
    double psnr_r = 0.0;
    double bpp_l = 0.0;
    double psnr_l = 0.0;
    double bpp_d = 0.0;
    double psnr_pred = 0.0;  // PSNR of the warped prediction vs the left view
};

double psnr(const PlanarImage& a, const PlanarImage& b);

// 5-scale MS-SSIM on luma: 11x11 Gaussian window (sigma 1.5), scale weights
// (0.0448, 0.2856, 0.3001, 0.2363, 0.1333), dyadic 2x2-mean downsampling.
// Images smaller than 176 px use fewer scales (weights renormalized); the
// scale count actually used is reported through *scales_used if non-null.
double ms_ssim(const PlanarImage& a, const PlanarImage& b, int* scales_used = nullptr);

struct BDResult {
    double bd_rate = 0.0;  // percent
    double bd_psnr = 0.0;  // dB
};

// Standard Bjontegaard deltas: cubic fits of PSNR vs log10(rate) (and the
// inverse), integrated over the overlap interval.
BDResult bd_metrics(const RDCurve& anchor, const RDCurve& test);

struct StereoPairFiles {
    std::string left;
    std::string right;
    std::string name;
};

struct SweepOptions {
    std::vector<double> lambdas{0.001, 0.002, 0.005, 0.01, 0.02};
    std::vector<double> qp_grid{8.0, 16.0, 32.0, 64.0, 128.0};
    CodecConfig base;
    bool ablation = false;
    int jobs = 1;
    std::string out_dir;            // CSVs land here when non-empty
    bool dump_streams = false;      // write per-pair bitstreams under out_dir
};

struct SweepPoint {
    double lambda = 0.0;
    double bpp = 0.0;
    double psnr = 0.0;
    double msssim = 0.0;
    AllocationRow allocation;
};

struct SweepResult {
    std::vector<SweepPoint> points;           // one per lambda (full/base config)
    std::vector<std::vector<SweepPoint>> ablation_points;  // per case 1..4 + full
    int pairs_used = 0;
    int pairs_skipped = 0;

    RDCurve curve() const;
};

SweepResult rd_sweep(const std::vector<StereoPairFiles>& pairs, const SweepOptions& opts);

// Number formatting shared by CSV output and CLI summaries (6 significant
// digits) so printed numbers always equal the stored ones.
std::string format_number(double v);

std::string rd_curve_csv(const SweepResult& r);
std::string allocation_csv(const SweepResult& r);
std::string ablation_csv(const SweepResult& r);

// Scan a directory for "*_left.(pgm|ppm)" files with matching "_right"
// siblings, sorted by name.
std::vector<StereoPairFiles> find_stereo_pairs(const std::string& dir);

}  // namespace stereodc

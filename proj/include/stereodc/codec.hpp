#pragma once

#include <cstdint>
#include <vector>

#include "stereodc/disparity.hpp"
#include "stereodc/entropy.hpp"
#include "stereodc/image.hpp"
#include "stereodc/transform.hpp"
#include "stereodc/warp.hpp"

namespace stereodc {

// Quantization steps and float-valued knobs travel in the header as f32,
// so they are stored as float here to keep encoder and decoder bit-equal.
struct CodecConfig {
    float qp_r = 16.0f;
    float qp_l = 16.0f;
    MatchParams match;
    bool use_disparity = true;  // off: Case 1 (independent coding)
    bool use_prior = true;      // off: Case 2 (no cross-view prior)
    bool align_prior = true;    // off: Case 3 (prior not warped)
    bool use_prn = true;        // off: Case 4 (no prior refinement)
    float w_prior = 0.5f;
    int disparity_downsample = 4;

    void validate() const;

    // Ablation presets matching the feature-flag chain.
    static CodecConfig case1() { return with_flags(false, false, false, false); }
    static CodecConfig case2() { return with_flags(true, false, false, false); }
    static CodecConfig case3() { return with_flags(true, true, false, false); }
    static CodecConfig case4() { return with_flags(true, true, true, false); }
    static CodecConfig full() { return with_flags(true, true, true, true); }

private:
    static CodecConfig with_flags(bool disp, bool prior, bool align, bool prn) {
        CodecConfig c;
        c.use_disparity = disp;
        c.use_prior = prior;
        c.align_prior = align;
        c.use_prn = prn;
        return c;
    }
};

// Container mirroring the on-disk layout: fixed header plus three
// length-prefixed substreams.
struct Bitstream {
    static constexpr uint8_t kVersion = 1;
    static constexpr size_t kHeaderBytes = 36;

    uint8_t version = kVersion;
    bool use_disparity = true;
    bool use_prior = true;
    bool align_prior = true;
    bool use_prn = true;
    bool color = false;
    uint16_t width = 0;
    uint16_t height = 0;
    float qp_r = 0.0f;
    float qp_l = 0.0f;
    uint16_t max_disparity = 0;
    float w_prior = 0.0f;
    std::vector<uint8_t> right;
    std::vector<uint8_t> disp;
    std::vector<uint8_t> left;

    size_t total_bytes() const {
        return kHeaderBytes + right.size() + disp.size() + left.size();
    }

    std::vector<uint8_t> serialize() const;
    static Bitstream parse(const std::vector<uint8_t>& bytes);
};

struct RDPoint {
    double bpp = 0.0;   // average over both images
    double psnr = 0.0;  // average of left and right, dB
};

// Everything the encoder knows at the end of a closed-loop encode; the
// bench layer reads rates and reconstructions from here.
struct EncodeResult {
    Bitstream bitstream;
    PlanarImage recon_left;
    PlanarImage recon_right;
    PlanarImage prediction;  // x_r warped into the left view (rounded for reporting)
    double est_bits_right = 0.0;
    double est_bits_disp = 0.0;
    double est_bits_left = 0.0;

    double estimated_bpp(int width, int height) const {
        double px = static_cast<double>(width) * height;
        return (est_bits_right + est_bits_disp + est_bits_left +
                8.0 * Bitstream::kHeaderBytes) / (2.0 * px);
    }
};

EncodeResult encode_pair_full(const PlanarImage& left, const PlanarImage& right,
                              const CodecConfig& cfg);

inline Bitstream encode_pair(const PlanarImage& left, const PlanarImage& right,
                             const CodecConfig& cfg) {
    return encode_pair_full(left, right, cfg).bitstream;
}

struct DecodedPair {
    PlanarImage left;
    PlanarImage right;
};

DecodedPair decode_pair(const Bitstream& bs);

// Exhaustive Lagrangian search over the qp grid: J = bpp + lambda * MSE
// (rate from the model estimate, distortion averaged over both views).
// Ties break toward the lower rate.
struct RDSearchResult {
    CodecConfig config;
    RDPoint point;
    EncodeResult result;  // encode at the winning grid point
};

RDSearchResult rd_search(const PlanarImage& left, const PlanarImage& right, double lambda,
                         const std::vector<double>& qp_grid, const CodecConfig& base);

// Disparity-map resampling used by the disparity substream.
DisparityMap median_downsample(const DisparityMap& d, int factor);
DisparityMap bilinear_upsample(const DisparityMap& grid, int factor, int out_w, int out_h);

}  // namespace stereodc

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stereodc/image.hpp"

namespace stereodc {

// Per-pixel, per-candidate matching costs. d candidates cover [0, max_disparity].
struct CostVolume {
    int width = 0;
    int height = 0;
    int num_disparities = 0;
    std::vector<float> costs;  // (y * width + x) * num_disparities + d

    CostVolume() = default;
    CostVolume(int w, int h, int d)
        : width(w), height(h), num_disparities(d),
          costs(static_cast<size_t>(w) * h * d, 0.0f) {}

    float at(int x, int y, int d) const {
        return costs[(static_cast<size_t>(y) * width + x) * num_disparities + d];
    }
    float& at(int x, int y, int d) {
        return costs[(static_cast<size_t>(y) * width + x) * num_disparities + d];
    }
};

// Horizontal disparity aligned with the left view, stored in quarter-pel
// fixed point: value v means the matching right-view column is x - v/4.
struct DisparityMap {
    int width = 0;
    int height = 0;
    std::vector<int32_t> values;

    DisparityMap() = default;
    DisparityMap(int w, int h, int32_t fill = 0)
        : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

    int32_t at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
    int32_t& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }

    bool operator==(const DisparityMap& o) const = default;
};

struct MatchParams {
    int max_disparity = 64;  // search range [0, max_disparity] whole pixels
    int block_radius = 2;    // SAD window is (2r+1)^2
    // Penalties are on the SAD scale of the default 5x5 window (sums of up
    // to 25 eight-bit differences).
    float sgm_p1 = 800.0f;   // penalty for |delta d| == 1 between neighbors
    float sgm_p2 = 3200.0f;  // penalty for |delta d| > 1

    void validate() const {
        require(max_disparity >= 1, "max_disparity must be >= 1");
        require(block_radius >= 0, "block_radius must be >= 0");
        require(sgm_p1 > 0.0f && sgm_p1 <= sgm_p2, "need 0 < P1 <= P2");
    }
};

// SAD over a (2r+1)^2 window. Window coordinates and the disparity-shifted
// right-view column are clamped to the image border.
CostVolume matching_cost(const FloatPlane& left, const FloatPlane& right,
                         const MatchParams& p);

// 4-path semi-global aggregation (L->R, R->L, T->B, B->T); each path
// subtracts its running minimum, output is the sum of the four paths.
CostVolume aggregate_costs(const CostVolume& cv, const MatchParams& p);

// Winner-take-all argmin (ties toward smaller d) with parabola sub-pel
// refinement, result rounded to quarter-pel.
DisparityMap select_disparity(const CostVolume& cv);

// to_luma -> matching_cost -> aggregate_costs -> select_disparity.
DisparityMap estimate_disparity(const PlanarImage& left, const PlanarImage& right,
                                const MatchParams& p);

// Debug dump: "DMAP" + width u16 + height u16 + values as big-endian u16.
std::vector<uint8_t> serialize_disparity(const DisparityMap& d);
void dump_disparity(const DisparityMap& d, const std::string& path);

}  // namespace stereodc

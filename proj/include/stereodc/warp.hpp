#pragma once

#include <vector>

#include "stereodc/disparity.hpp"
#include "stereodc/image.hpp"

namespace stereodc {

// Per-pixel validity of a warped plane: true where both bilinear source
// columns were inside the right image.
struct ValidityMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> flags;

    ValidityMask() = default;
    ValidityMask(int w, int h, bool fill = true)
        : width(w), height(h), flags(static_cast<size_t>(w) * h, fill ? 1 : 0) {}

    bool at(int x, int y) const { return flags[static_cast<size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { flags[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }

    bool all_true() const {
        for (uint8_t f : flags)
            if (!f) return false;
        return true;
    }
};

struct WarpResult {
    FloatPlane plane;
    ValidityMask mask;
};

// Backward warp: out(x,y) samples src at (x - d(x,y)/4, y) with horizontal
// linear interpolation; source columns clamp to [0, width-1] and the mask
// records where clamping occurred.
WarpResult warp_right_to_left(const FloatPlane& src, const DisparityMap& d);

// Deterministic stand-in for learned prior refinement: invalid pixels are
// filled from the nearest valid pixel in the same row (ties toward the
// left), then a single 3x3 mean pass runs at pixels whose 3x3 neighborhood
// touched an invalid pixel.
FloatPlane refine_prior(const FloatPlane& prior, const ValidityMask& mask);

}  // namespace stereodc

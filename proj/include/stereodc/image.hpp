#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stereodc/error.hpp"

namespace stereodc {

// 8-bit raster, 1 (gray) or 3 (RGB) planes stored plane-major.
struct PlanarImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<uint8_t> samples;  // channels * width * height

    PlanarImage() = default;
    PlanarImage(int w, int h, int ch, uint8_t fill = 0)
        : width(w), height(h), channels(ch),
          samples(static_cast<size_t>(w) * h * ch, fill) {
        require(w > 0 && h > 0, "image dimensions must be positive");
        require(ch == 1 || ch == 3, "channels must be 1 or 3");
    }

    size_t plane_size() const { return static_cast<size_t>(width) * height; }

    uint8_t at(int c, int x, int y) const {
        return samples[c * plane_size() + static_cast<size_t>(y) * width + x];
    }
    uint8_t& at(int c, int x, int y) {
        return samples[c * plane_size() + static_cast<size_t>(y) * width + x];
    }

    bool operator==(const PlanarImage& o) const = default;
};

// Floating-point plane for residuals, transforms and warped priors.
struct FloatPlane {
    int width = 0;
    int height = 0;
    std::vector<double> values;  // width * height, row-major

    FloatPlane() = default;
    FloatPlane(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {
        require(w > 0 && h > 0, "plane dimensions must be positive");
    }

    double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
};

// Binary PGM (P5) / PPM (P6), maxval 255 only. Parse errors report the
// offending byte offset.
PlanarImage read_image(const std::string& path);
PlanarImage parse_pnm(const std::vector<uint8_t>& bytes, const std::string& origin);

void write_image(const PlanarImage& img, const std::string& path);
std::vector<uint8_t> serialize_pnm(const PlanarImage& img);

// Gray: identity cast. RGB: BT.601 weights 0.299 R + 0.587 G + 0.114 B.
FloatPlane to_luma(const PlanarImage& img);

// Extract one channel as a float plane / pack planes back into an image
// (values rounded half away from zero and clamped to [0,255]).
FloatPlane channel_plane(const PlanarImage& img, int c);
PlanarImage planes_to_image(const std::vector<FloatPlane>& planes);

std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<uint8_t>& bytes);

}  // namespace stereodc

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "stereodc/image.hpp"

namespace stereodc {

// Coefficients of the 8x8 block transform. Dimensions are padded up to
// multiples of 8; the pre-padding size is kept for cropping on inverse.
struct CoeffPlane {
    int width = 0;   // padded, multiple of 8
    int height = 0;  // padded, multiple of 8
    int orig_width = 0;
    int orig_height = 0;
    std::vector<double> values;  // row-major over the padded plane

    CoeffPlane() = default;
    CoeffPlane(int w, int h, int ow, int oh)
        : width(w), height(h), orig_width(ow), orig_height(oh),
          values(static_cast<size_t>(w) * h, 0.0) {}

    double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }

    int blocks_x() const { return width / 8; }
    int blocks_y() const { return height / 8; }

    // Coefficient of zig-zag band b in block (bx, by).
    double band(int bx, int by, int b) const;
};

struct QuantPlane {
    int width = 0;
    int height = 0;
    int orig_width = 0;
    int orig_height = 0;
    std::vector<int32_t> values;

    QuantPlane() = default;
    QuantPlane(int w, int h, int ow, int oh)
        : width(w), height(h), orig_width(ow), orig_height(oh),
          values(static_cast<size_t>(w) * h, 0) {}

    int32_t at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
    int32_t& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }

    int blocks_x() const { return width / 8; }
    int blocks_y() const { return height / 8; }

    int32_t band(int bx, int by, int b) const;
    void set_band(int bx, int by, int b, int32_t v);
};

// Zig-zag scan of an 8x8 block: kZigZag[b] = (x, y) of band b.
extern const std::array<std::pair<int, int>, 64> kZigZag;

// Orthonormal 2-D DCT-II per 8x8 block; the input is edge-replicated up to
// multiples of 8.
CoeffPlane forward_dct8(const FloatPlane& plane);
FloatPlane inverse_dct8(const CoeffPlane& coeffs);

// Uniform scalar quantizer, round half away from zero.
QuantPlane quantize(const CoeffPlane& coeffs, double qp);
CoeffPlane dequantize(const QuantPlane& q, double qp);

}  // namespace stereodc

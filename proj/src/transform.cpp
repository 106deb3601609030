#include "stereodc/transform.hpp"

#include <cmath>

namespace stereodc {

const std::array<std::pair<int, int>, 64> kZigZag = [] {
    std::array<std::pair<int, int>, 64> zz{};
    int x = 0, y = 0;
    bool up = true;
    for (int b = 0; b < 64; ++b) {
        zz[b] = {x, y};
        if (up) {
            if (x == 7) { ++y; up = false; }
            else if (y == 0) { ++x; up = false; }
            else { ++x; --y; }
        } else {
            if (y == 7) { ++x; up = true; }
            else if (x == 0) { ++y; up = true; }
            else { --x; ++y; }
        }
    }
    return zz;
}();

double CoeffPlane::band(int bx, int by, int b) const {
    auto [x, y] = kZigZag[b];
    return at(bx * 8 + x, by * 8 + y);
}

int32_t QuantPlane::band(int bx, int by, int b) const {
    auto [x, y] = kZigZag[b];
    return at(bx * 8 + x, by * 8 + y);
}

void QuantPlane::set_band(int bx, int by, int b, int32_t v) {
    auto [x, y] = kZigZag[b];
    at(bx * 8 + x, by * 8 + y) = v;
}

namespace {

// Orthonormal DCT-II basis: B[u][x] = c(u) cos((2x+1) u pi / 16).
struct DctBasis {
    double b[8][8];
    DctBasis() {
        const double pi = std::acos(-1.0);
        for (int u = 0; u < 8; ++u) {
            double c = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            for (int x = 0; x < 8; ++x)
                b[u][x] = c * std::cos((2 * x + 1) * u * pi / 16.0);
        }
    }
};

const DctBasis kBasis;

inline int pad8(int v) { return (v + 7) & ~7; }

}  // namespace

CoeffPlane forward_dct8(const FloatPlane& plane) {
    const int ow = plane.width, oh = plane.height;
    const int w = pad8(ow), h = pad8(oh);
    CoeffPlane out(w, h, ow, oh);

    double block[8][8], tmp[8][8];
    for (int by = 0; by < h / 8; ++by) {
        for (int bx = 0; bx < w / 8; ++bx) {
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x) {
                    int sx = std::min(bx * 8 + x, ow - 1);
                    int sy = std::min(by * 8 + y, oh - 1);
                    block[y][x] = plane.at(sx, sy);
                }
            // rows then columns
            for (int y = 0; y < 8; ++y)
                for (int u = 0; u < 8; ++u) {
                    double s = 0.0;
                    for (int x = 0; x < 8; ++x) s += kBasis.b[u][x] * block[y][x];
                    tmp[y][u] = s;
                }
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v) {
                    double s = 0.0;
                    for (int y = 0; y < 8; ++y) s += kBasis.b[v][y] * tmp[y][u];
                    out.at(bx * 8 + u, by * 8 + v) = s;
                }
        }
    }
    return out;
}

FloatPlane inverse_dct8(const CoeffPlane& coeffs) {
    const int w = coeffs.width, h = coeffs.height;
    require(w % 8 == 0 && h % 8 == 0, "coefficient plane not padded to 8");
    FloatPlane padded(w, h);

    double block[8][8], tmp[8][8];
    for (int by = 0; by < h / 8; ++by) {
        for (int bx = 0; bx < w / 8; ++bx) {
            for (int v = 0; v < 8; ++v)
                for (int u = 0; u < 8; ++u) block[v][u] = coeffs.at(bx * 8 + u, by * 8 + v);
            for (int v = 0; v < 8; ++v)
                for (int x = 0; x < 8; ++x) {
                    double s = 0.0;
                    for (int u = 0; u < 8; ++u) s += kBasis.b[u][x] * block[v][u];
                    tmp[v][x] = s;
                }
            for (int x = 0; x < 8; ++x)
                for (int y = 0; y < 8; ++y) {
                    double s = 0.0;
                    for (int v = 0; v < 8; ++v) s += kBasis.b[v][y] * tmp[v][x];
                    padded.at(bx * 8 + x, by * 8 + y) = s;
                }
        }
    }

    if (coeffs.orig_width == w && coeffs.orig_height == h) return padded;
    FloatPlane out(coeffs.orig_width, coeffs.orig_height);
    for (int y = 0; y < coeffs.orig_height; ++y)
        for (int x = 0; x < coeffs.orig_width; ++x) out.at(x, y) = padded.at(x, y);
    return out;
}

QuantPlane quantize(const CoeffPlane& coeffs, double qp) {
    require(qp > 0.0, "quantization step must be positive");
    QuantPlane q(coeffs.width, coeffs.height, coeffs.orig_width, coeffs.orig_height);
    for (size_t i = 0; i < coeffs.values.size(); ++i)
        q.values[i] = static_cast<int32_t>(std::llround(coeffs.values[i] / qp));
    return q;
}

CoeffPlane dequantize(const QuantPlane& q, double qp) {
    require(qp > 0.0, "quantization step must be positive");
    CoeffPlane c(q.width, q.height, q.orig_width, q.orig_height);
    for (size_t i = 0; i < q.values.size(); ++i) c.values[i] = q.values[i] * qp;
    return c;
}

}  // namespace stereodc

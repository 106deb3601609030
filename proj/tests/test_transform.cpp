#include <cmath>

#include "doctest.h"
#include "stereodc/transform.hpp"
#include "testutil.hpp"

using namespace stereodc;

namespace {

// Direct O(64^2) DCT-II of one 8x8 block straight from the definition;
// oracle for the separable implementation.
void reference_dct_block(const double in[8][8], double out[8][8]) {
    const double pi = std::acos(-1.0);
    for (int v = 0; v < 8; ++v)
        for (int u = 0; u < 8; ++u) {
            double cu = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            double cv = v == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            double s = 0.0;
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    s += in[y][x] * std::cos((2 * x + 1) * u * pi / 16.0) *
                         std::cos((2 * y + 1) * v * pi / 16.0);
            out[v][u] = cu * cv * s;
        }
}

}  // namespace

TEST_CASE("constant block: DC = 8c, AC = 0") {
    FloatPlane p(8, 8, 7.0);
    CoeffPlane c = forward_dct8(p);
    CHECK(c.at(0, 0) == doctest::Approx(56.0).epsilon(1e-12));
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            if (x || y) CHECK(std::abs(c.at(x, y)) < 1e-9);
}

TEST_CASE("impulse block matches the basis product") {
    for (auto [ix, iy] : {std::pair{0, 0}, {3, 5}, {7, 7}}) {
        FloatPlane p(8, 8, 0.0);
        p.at(ix, iy) = 1.0;
        CoeffPlane c = forward_dct8(p);
        double in[8][8] = {};
        in[iy][ix] = 1.0;
        double ref[8][8];
        reference_dct_block(in, ref);
        for (int v = 0; v < 8; ++v)
            for (int u = 0; u < 8; ++u)
                CHECK(c.at(u, v) == doctest::Approx(ref[v][u]).epsilon(1e-12));
    }
}

TEST_CASE("forward matches the reference on a random block") {
    FloatPlane p = testutil::random_plane(8, 8, 21, -100.0, 100.0);
    double in[8][8];
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) in[y][x] = p.at(x, y);
    double ref[8][8];
    reference_dct_block(in, ref);
    CoeffPlane c = forward_dct8(p);
    for (int v = 0; v < 8; ++v)
        for (int u = 0; u < 8; ++u)
            CHECK(c.at(u, v) == doctest::Approx(ref[v][u]).epsilon(1e-10));
}

TEST_CASE("round trip is identity within 1e-10") {
    for (auto [w, h] : {std::pair{8, 8}, {16, 24}, {13, 9}, {1, 1}}) {
        FloatPlane p = testutil::random_plane(w, h, 7 * w + h, 0.0, 255.0);
        FloatPlane back = inverse_dct8(forward_dct8(p));
        REQUIRE(back.width == w);
        REQUIRE(back.height == h);
        for (size_t i = 0; i < p.values.size(); ++i)
            CHECK(std::abs(back.values[i] - p.values[i]) < 1e-10);
    }
}

TEST_CASE("Parseval per plane on padded-free sizes") {
    FloatPlane p = testutil::random_plane(16, 16, 5, -50.0, 50.0);
    CoeffPlane c = forward_dct8(p);
    double e_in = 0.0, e_out = 0.0;
    for (double v : p.values) e_in += v * v;
    for (double v : c.values) e_out += v * v;
    CHECK(e_out == doctest::Approx(e_in).epsilon(1e-9));
}

TEST_CASE("quantize rounds half away from zero") {
    CoeffPlane c(8, 8, 8, 8);
    c.at(0, 0) = 10.6;
    c.at(1, 0) = -2.0;
    c.at(2, 0) = 0.0;
    QuantPlane q = quantize(c, 4.0);
    CHECK(q.at(0, 0) == 3);   // round(2.65)
    CHECK(q.at(1, 0) == -1);  // -0.5 away from zero
    CHECK(q.at(2, 0) == 0);
    CHECK_THROWS_AS(quantize(c, 0.0), Error);
    CHECK_THROWS_AS(quantize(c, -1.0), Error);
}

TEST_CASE("dequantize and the qp/2 bound") {
    CoeffPlane c(8, 8, 8, 8);
    c.at(0, 0) = 10.6;
    QuantPlane q = quantize(c, 4.0);
    CHECK(dequantize(q, 4.0).at(0, 0) == doctest::Approx(12.0));

    FloatPlane p = testutil::random_plane(16, 8, 11, -200.0, 200.0);
    CoeffPlane coeffs = forward_dct8(p);
    for (double qp : {0.5, 4.0, 17.0}) {
        CoeffPlane back = dequantize(quantize(coeffs, qp), qp);
        for (size_t i = 0; i < coeffs.values.size(); ++i)
            CHECK(std::abs(back.values[i] - coeffs.values[i]) <= qp / 2 + 1e-12);
    }
}

TEST_CASE("fine quantization reconstructs above 60 dB") {
    FloatPlane p = testutil::random_plane(32, 24, 3, 0.0, 255.0);
    FloatPlane back = inverse_dct8(dequantize(quantize(forward_dct8(p), 0.01), 0.01));
    double mse = 0.0;
    for (size_t i = 0; i < p.values.size(); ++i) {
        double d = back.values[i] - p.values[i];
        mse += d * d;
    }
    mse /= static_cast<double>(p.values.size());
    double psnr = 10.0 * std::log10(255.0 * 255.0 / mse);
    CHECK(psnr > 60.0);
}

TEST_CASE("zig-zag order is a permutation starting DC, (1,0), (0,1)") {
    CHECK(kZigZag[0] == std::pair{0, 0});
    CHECK(kZigZag[1] == std::pair{1, 0});
    CHECK(kZigZag[2] == std::pair{0, 1});
    CHECK(kZigZag[63] == std::pair{7, 7});
    bool seen[8][8] = {};
    for (auto [x, y] : kZigZag) seen[y][x] = true;
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) CHECK(seen[y][x]);
}

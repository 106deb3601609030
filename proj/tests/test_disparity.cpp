#include <cmath>

#include "doctest.h"
#include "stereodc/disparity.hpp"
#include "testutil.hpp"

using namespace stereodc;

namespace {

// Brute-force SAD with the clamp-into-image window convention.
double oracle_cost(const FloatPlane& l, const FloatPlane& r, int x, int y, int d, int rad) {
    auto cl = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
    double sum = 0.0;
    for (int j = -rad; j <= rad; ++j)
        for (int i = -rad; i <= rad; ++i) {
            int cx = cl(x + i, l.width - 1), cy = cl(y + j, l.height - 1);
            sum += std::abs(l.at(cx, cy) - r.at(cl(cx - d, r.width - 1), cy));
        }
    return sum;
}

// Independent scanline DP for one direction.
void oracle_sgm_line(const CostVolume& cv, CostVolume& out, int x0, int y0, int dx, int dy,
                     float p1, float p2) {
    int D = cv.num_disparities;
    std::vector<float> prev(D), cur(D);
    int x = x0, y = y0;
    for (int d = 0; d < D; ++d) {
        prev[d] = cv.at(x, y, d);
        out.at(x, y, d) += prev[d];
    }
    for (;;) {
        x += dx;
        y += dy;
        if (x < 0 || x >= cv.width || y < 0 || y >= cv.height) break;
        float pmin = *std::min_element(prev.begin(), prev.end());
        for (int d = 0; d < D; ++d) {
            float best = prev[d];
            if (d > 0) best = std::min(best, prev[d - 1] + p1);
            if (d + 1 < D) best = std::min(best, prev[d + 1] + p1);
            best = std::min(best, pmin + p2);
            cur[d] = cv.at(x, y, d) + best - pmin;
            out.at(x, y, d) += cur[d];
        }
        prev = cur;
    }
}

}  // namespace

TEST_CASE("single-pixel SAD is the absolute difference") {
    FloatPlane l(4, 1), r(4, 1);
    for (int x = 0; x < 4; ++x) {
        l.at(x, 0) = 10.0;
        r.at(x, 0) = 12.0;
    }
    MatchParams p;
    p.max_disparity = 2;
    p.block_radius = 0;
    CostVolume cv = matching_cost(l, r, p);
    CHECK(cv.at(2, 0, 1) == doctest::Approx(2.0));
    CHECK(cv.at(2, 0, 0) == doctest::Approx(2.0));
}

TEST_CASE("identical images have zero cost at d = 0") {
    FloatPlane l = testutil::random_plane(16, 8, 3, 0.0, 255.0);
    MatchParams p;
    p.max_disparity = 4;
    p.block_radius = 1;
    CostVolume cv = matching_cost(l, l, p);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 16; ++x) CHECK(cv.at(x, y, 0) == 0.0f);
}

TEST_CASE("matching_cost equals the brute-force oracle") {
    auto pair = testutil::shifted_pair(24, 10, 1, 3, 77);
    FloatPlane l = to_luma(pair.left), r = to_luma(pair.right);
    MatchParams p;
    p.max_disparity = 5;
    p.block_radius = 1;
    CostVolume cv = matching_cost(l, r, p);
    for (int d = 0; d <= 5; ++d)
        for (int y = 0; y < 10; ++y)
            for (int x = 0; x < 24; ++x) {
                double ref = oracle_cost(l, r, x, y, d, 1);
                CHECK(std::abs(cv.at(x, y, d) - ref) <= 1e-4 * std::max(1.0, ref));
            }
    // interior columns at the true shift have exactly zero cost
    for (int y = 2; y < 8; ++y)
        for (int x = 5; x < 20; ++x) CHECK(cv.at(x, y, 3) == 0.0f);
}

TEST_CASE("matching_cost rejects mismatched planes") {
    FloatPlane a(4, 4), b(5, 4);
    CHECK_THROWS_AS(matching_cost(a, b, MatchParams{}), Error);
}

TEST_CASE("aggregation with zero penalties is 4x the input") {
    CostVolume cv(5, 3, 4);
    uint64_t s = 9;
    for (auto& c : cv.costs) c = static_cast<float>(testutil::splitmix64(s) % 100);
    MatchParams p;
    p.sgm_p1 = 0.0f;
    p.sgm_p2 = 0.0f;
    CostVolume agg = aggregate_costs(cv, p);
    for (size_t i = 0; i < cv.costs.size(); ++i)
        CHECK(agg.costs[i] == doctest::Approx(4.0f * cv.costs[i]));
}

TEST_CASE("1x1 volume aggregates to 4x input") {
    CostVolume cv(1, 1, 3);
    cv.at(0, 0, 0) = 5;
    cv.at(0, 0, 1) = 2;
    cv.at(0, 0, 2) = 9;
    CostVolume agg = aggregate_costs(cv, MatchParams{});
    for (int d = 0; d < 3; ++d) CHECK(agg.at(0, 0, d) == doctest::Approx(4.0f * cv.at(0, 0, d)));
}

TEST_CASE("3x1 hand volume matches an independent DP") {
    CostVolume cv(3, 1, 3);
    float vals[3][3] = {{4, 1, 6}, {2, 5, 0}, {7, 3, 2}};
    for (int x = 0; x < 3; ++x)
        for (int d = 0; d < 3; ++d) cv.at(x, 0, d) = vals[x][d];
    MatchParams p;
    p.sgm_p1 = 1.0f;
    p.sgm_p2 = 2.0f;
    CostVolume expect(3, 1, 3);
    oracle_sgm_line(cv, expect, 0, 0, 1, 0, 1.0f, 2.0f);
    oracle_sgm_line(cv, expect, 2, 0, -1, 0, 1.0f, 2.0f);
    oracle_sgm_line(cv, expect, 0, 0, 0, 1, 1.0f, 2.0f);   // single pixel column
    oracle_sgm_line(cv, expect, 1, 0, 0, 1, 1.0f, 2.0f);
    oracle_sgm_line(cv, expect, 2, 0, 0, 1, 1.0f, 2.0f);
    oracle_sgm_line(cv, expect, 0, 0, 0, -1, 1.0f, 2.0f);
    oracle_sgm_line(cv, expect, 1, 0, 0, -1, 1.0f, 2.0f);
    oracle_sgm_line(cv, expect, 2, 0, 0, -1, 1.0f, 2.0f);
    CostVolume agg = aggregate_costs(cv, p);
    for (int x = 0; x < 3; ++x)
        for (int d = 0; d < 3; ++d)
            CHECK(agg.at(x, 0, d) == doctest::Approx(expect.at(x, 0, d)));
}

TEST_CASE("aggregation matches the oracle on a random 2-D volume") {
    CostVolume cv(7, 5, 4);
    uint64_t s = 31;
    for (auto& c : cv.costs) c = static_cast<float>(testutil::splitmix64(s) % 50);
    MatchParams p;
    p.sgm_p1 = 3.0f;
    p.sgm_p2 = 11.0f;
    CostVolume expect(7, 5, 4);
    for (int y = 0; y < 5; ++y) {
        oracle_sgm_line(cv, expect, 0, y, 1, 0, p.sgm_p1, p.sgm_p2);
        oracle_sgm_line(cv, expect, 6, y, -1, 0, p.sgm_p1, p.sgm_p2);
    }
    for (int x = 0; x < 7; ++x) {
        oracle_sgm_line(cv, expect, x, 0, 0, 1, p.sgm_p1, p.sgm_p2);
        oracle_sgm_line(cv, expect, x, 4, 0, -1, p.sgm_p1, p.sgm_p2);
    }
    CostVolume agg = aggregate_costs(cv, p);
    for (size_t i = 0; i < cv.costs.size(); ++i)
        CHECK(agg.costs[i] == doctest::Approx(expect.costs[i]));
}

TEST_CASE("zero penalties preserve the per-pixel argmin") {
    CostVolume cv(9, 4, 6);
    uint64_t s = 12;
    for (auto& c : cv.costs) c = static_cast<float>(testutil::splitmix64(s) % 1000);
    MatchParams p;
    p.sgm_p1 = 0.0f;
    p.sgm_p2 = 0.0f;
    CostVolume agg = aggregate_costs(cv, p);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 9; ++x) {
            int a = 0, b = 0;
            for (int d = 1; d < 6; ++d) {
                if (cv.at(x, y, d) < cv.at(x, y, a)) a = d;
                if (agg.at(x, y, d) < agg.at(x, y, b)) b = d;
            }
            CHECK(a == b);
        }
}

TEST_CASE("sub-pel selection follows the parabola formula") {
    CostVolume cv(1, 1, 3);
    SUBCASE("costs (5,2,7): delta = -0.125, stored 4 * 0.875 rounds to 4") {
        cv.at(0, 0, 0) = 5;
        cv.at(0, 0, 1) = 2;
        cv.at(0, 0, 2) = 7;
        CHECK(select_disparity(cv).at(0, 0) == 4);
    }
    SUBCASE("symmetric neighbors (4,2,4) give an integer result") {
        cv.at(0, 0, 0) = 4;
        cv.at(0, 0, 1) = 2;
        cv.at(0, 0, 2) = 4;
        CHECK(select_disparity(cv).at(0, 0) == 4);
    }
    SUBCASE("costs (6,2,4): delta = +1/6, one quarter-pel up") {
        cv.at(0, 0, 0) = 6;
        cv.at(0, 0, 1) = 2;
        cv.at(0, 0, 2) = 4;
        CHECK(select_disparity(cv).at(0, 0) == 5);
    }
    SUBCASE("argmin at the border skips refinement") {
        cv.at(0, 0, 0) = 1;
        cv.at(0, 0, 1) = 2;
        cv.at(0, 0, 2) = 4;
        CHECK(select_disparity(cv).at(0, 0) == 0);
    }
    SUBCASE("flat costs tie toward d = 0") {
        cv.at(0, 0, 0) = 3;
        cv.at(0, 0, 1) = 3;
        cv.at(0, 0, 2) = 3;
        CHECK(select_disparity(cv).at(0, 0) == 0);
    }
}

TEST_CASE("selected disparities stay in [0, 4*max_disparity]") {
    CostVolume cv(20, 6, 9);
    uint64_t s = 3;
    for (auto& c : cv.costs) c = static_cast<float>(testutil::splitmix64(s) % 256);
    DisparityMap m = select_disparity(cv);
    for (int32_t v : m.values) {
        CHECK(v >= 0);
        CHECK(v <= 4 * 8);
    }
}

TEST_CASE("identical views estimate an all-zero map") {
    PlanarImage img = testutil::scene_image(testutil::Scene(4), 48, 20, 1);
    MatchParams p;
    p.max_disparity = 8;
    DisparityMap m = estimate_disparity(img, img, p);
    for (int32_t v : m.values) CHECK(v == 0);
}

TEST_CASE("uniform integer shifts are recovered on the interior") {
    for (int shift : {2, 5, 9}) {
        auto pair = testutil::shifted_pair(96, 48, 1, shift, 1000 + shift);
        MatchParams p;
        p.max_disparity = 16;
        DisparityMap m = estimate_disparity(pair.left, pair.right, p);
        int margin = p.max_disparity + p.block_radius;
        int hits = 0, total = 0;
        for (int y = margin; y < 48 - margin; ++y)
            for (int x = margin; x < 96 - margin; ++x) {
                ++total;
                if (m.at(x, y) == 4 * shift) ++hits;
            }
        INFO("shift ", shift, ": ", hits, "/", total);
        CHECK(hits >= static_cast<int>(0.95 * total));
    }
}

TEST_CASE("search range clamps oversized shifts") {
    auto pair = testutil::shifted_pair(64, 24, 1, 12, 55);
    MatchParams p;
    p.max_disparity = 6;
    DisparityMap m = estimate_disparity(pair.left, pair.right, p);
    for (int32_t v : m.values) {
        CHECK(v >= 0);
        CHECK(v <= 4 * 6);
    }
}

TEST_CASE("estimation is deterministic") {
    auto pair = testutil::shifted_pair(40, 18, 3, 4, 8);
    MatchParams p;
    p.max_disparity = 8;
    CHECK(estimate_disparity(pair.left, pair.right, p) ==
          estimate_disparity(pair.left, pair.right, p));
}

TEST_CASE("disparity dump format") {
    DisparityMap m(2, 1);
    m.at(0, 0) = 0x0102;
    m.at(1, 0) = 7;
    auto bytes = serialize_disparity(m);
    std::vector<uint8_t> expect = {'D', 'M', 'A', 'P', 0, 2, 0, 1, 1, 2, 0, 7};
    CHECK(bytes == expect);
}

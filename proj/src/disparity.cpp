#include "stereodc/disparity.hpp"

#include <algorithm>
#include <cmath>

namespace stereodc {

namespace {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

CostVolume matching_cost(const FloatPlane& left, const FloatPlane& right,
                         const MatchParams& p) {
    require(p.max_disparity >= 1, "max_disparity must be >= 1");
    require(p.block_radius >= 0, "block_radius must be >= 0");
    require(left.width == right.width && left.height == right.height,
            "matching_cost: dimension mismatch");
    const int w = left.width, h = left.height;
    const int D = p.max_disparity + 1;
    const int r = p.block_radius;

    CostVolume cv(w, h, D);
    FloatPlane diff(w, h);
    FloatPlane hsum(w, h);
    for (int d = 0; d < D; ++d) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                diff.at(x, y) = std::abs(left.at(x, y) - right.at(clampi(x - d, 0, w - 1), y));
        // Separable window sums; window coordinates clamp to the border,
        // which equals summing over the edge-replicated diff plane.
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double s = 0.0;
                for (int i = -r; i <= r; ++i) s += diff.at(clampi(x + i, 0, w - 1), y);
                hsum.at(x, y) = s;
            }
        }
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double s = 0.0;
                for (int j = -r; j <= r; ++j) s += hsum.at(x, clampi(y + j, 0, h - 1));
                cv.at(x, y, d) = static_cast<float>(s);
            }
        }
    }
    return cv;
}

namespace {

// One DP step of a scanline pass: cur[d] = cost[d] +
// min(prev[d], prev[d+-1]+P1, prev_min+P2) - prev_min.
void sgm_step(const float* cost, const float* prev, float* cur, int D,
              float p1, float p2) {
    float prev_min = prev[0];
    for (int d = 1; d < D; ++d) prev_min = std::min(prev_min, prev[d]);
    for (int d = 0; d < D; ++d) {
        float best = prev[d];
        if (d > 0) best = std::min(best, prev[d - 1] + p1);
        if (d + 1 < D) best = std::min(best, prev[d + 1] + p1);
        best = std::min(best, prev_min + p2);
        cur[d] = cost[d] + best - prev_min;
    }
}

}  // namespace

CostVolume aggregate_costs(const CostVolume& cv, const MatchParams& p) {
    // Zero penalties are allowed here (paths reduce to the raw costs);
    // the full pipeline invariant 0 < P1 <= P2 is checked in validate().
    require(p.sgm_p1 >= 0.0f && p.sgm_p1 <= p.sgm_p2, "need 0 <= P1 <= P2");
    const int w = cv.width, h = cv.height, D = cv.num_disparities;
    CostVolume out(w, h, D);
    std::vector<float> prev(D), cur(D);

    auto run_line = [&](int x0, int y0, int dx, int dy) {
        int x = x0, y = y0;
        const float* c = &cv.costs[(static_cast<size_t>(y) * w + x) * D];
        for (int d = 0; d < D; ++d) prev[d] = c[d];
        float* o = &out.costs[(static_cast<size_t>(y) * w + x) * D];
        for (int d = 0; d < D; ++d) o[d] += prev[d];
        for (;;) {
            x += dx;
            y += dy;
            if (x < 0 || x >= w || y < 0 || y >= h) break;
            c = &cv.costs[(static_cast<size_t>(y) * w + x) * D];
            sgm_step(c, prev.data(), cur.data(), D, p.sgm_p1, p.sgm_p2);
            o = &out.costs[(static_cast<size_t>(y) * w + x) * D];
            for (int d = 0; d < D; ++d) o[d] += cur[d];
            std::swap(prev, cur);
        }
    };

    for (int y = 0; y < h; ++y) run_line(0, y, 1, 0);       // left -> right
    for (int y = 0; y < h; ++y) run_line(w - 1, y, -1, 0);  // right -> left
    for (int x = 0; x < w; ++x) run_line(x, 0, 0, 1);       // top -> bottom
    for (int x = 0; x < w; ++x) run_line(x, h - 1, 0, -1);  // bottom -> top
    return out;
}

DisparityMap select_disparity(const CostVolume& cv) {
    const int w = cv.width, h = cv.height, D = cv.num_disparities;
    DisparityMap map(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float* c = &cv.costs[(static_cast<size_t>(y) * w + x) * D];
            int best = 0;
            for (int d = 1; d < D; ++d)
                if (c[d] < c[best]) best = d;  // strict '<' ties toward smaller d
            double delta = 0.0;
            if (best > 0 && best + 1 < D) {
                double cm = c[best - 1], c0 = c[best], cp = c[best + 1];
                double denom = 2.0 * (cm - 2.0 * c0 + cp);
                if (denom != 0.0) {
                    delta = (cm - cp) / denom;
                    delta = std::clamp(delta, -0.5, 0.5);
                }
            }
            map.at(x, y) = static_cast<int32_t>(std::llround(4.0 * (best + delta)));
        }
    }
    return map;
}

DisparityMap estimate_disparity(const PlanarImage& left, const PlanarImage& right,
                                const MatchParams& p) {
    p.validate();
    require(left.width == right.width && left.height == right.height,
            "estimate_disparity: dimension mismatch");
    CostVolume cv = matching_cost(to_luma(left), to_luma(right), p);
    return select_disparity(aggregate_costs(cv, p));
}

std::vector<uint8_t> serialize_disparity(const DisparityMap& d) {
    require(d.width <= 65535 && d.height <= 65535, "disparity map too large for dump");
    std::vector<uint8_t> out;
    out.reserve(8 + d.values.size() * 2);
    for (char c : {'D', 'M', 'A', 'P'}) out.push_back(static_cast<uint8_t>(c));
    auto push16 = [&](uint32_t v) {
        out.push_back(static_cast<uint8_t>(v >> 8));
        out.push_back(static_cast<uint8_t>(v & 0xff));
    };
    push16(static_cast<uint32_t>(d.width));
    push16(static_cast<uint32_t>(d.height));
    for (int32_t v : d.values) {
        require(v >= 0 && v <= 65535, "disparity value out of u16 range");
        push16(static_cast<uint32_t>(v));
    }
    return out;
}

void dump_disparity(const DisparityMap& d, const std::string& path) {
    write_file(path, serialize_disparity(d));
}

}  // namespace stereodc

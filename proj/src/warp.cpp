#include "stereodc/warp.hpp"

#include <cmath>
#include <limits>

namespace stereodc {

WarpResult warp_right_to_left(const FloatPlane& src, const DisparityMap& d) {
    require(src.width == d.width && src.height == d.height,
            "warp_right_to_left: dimension mismatch");
    const int w = src.width, h = src.height;
    WarpResult res{FloatPlane(w, h), ValidityMask(w, h)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            // Quarter-pel disparity; the fractional part is k/4 so the
            // interpolation weights are exact in binary floating point.
            int64_t dq = d.at(x, y);
            int64_t x0_64 = x - ((dq + 3) >> 2);  // floor(x - dq/4)
            int x0 = static_cast<int>(std::clamp<int64_t>(x0_64, -1, src.width));
            int frac_q = static_cast<int>(((x - x0_64) << 2) - dq);  // 4 * frac, in [0,3]
            bool valid;
            double out;
            if (frac_q == 0) {
                valid = x0 >= 0 && x0 < w;
                int cx = x0 < 0 ? 0 : (x0 >= w ? w - 1 : x0);
                out = src.at(cx, y);
            } else {
                valid = x0 >= 0 && x0 + 1 < w;
                int cx0 = x0 < 0 ? 0 : (x0 >= w ? w - 1 : x0);
                int cx1 = x0 + 1 < 0 ? 0 : (x0 + 1 >= w ? w - 1 : x0 + 1);
                double t = frac_q * 0.25;
                out = (1.0 - t) * src.at(cx0, y) + t * src.at(cx1, y);
            }
            res.plane.at(x, y) = out;
            res.mask.set(x, y, valid);
        }
    }
    return res;
}

FloatPlane refine_prior(const FloatPlane& prior, const ValidityMask& mask) {
    require(prior.width == mask.width && prior.height == mask.height,
            "refine_prior: dimension mismatch");
    const int w = prior.width, h = prior.height;
    if (mask.all_true()) return prior;

    // Pass 1: row-wise hole fill from the nearest valid pixel.
    FloatPlane filled = prior;
    std::vector<int> left_dist(w), right_dist(w);
    std::vector<double> left_val(w), right_val(w);
    const int kFar = std::numeric_limits<int>::max() / 2;
    for (int y = 0; y < h; ++y) {
        int dist = kFar;
        double val = 0.0;
        for (int x = 0; x < w; ++x) {
            if (mask.at(x, y)) {
                dist = 0;
                val = prior.at(x, y);
            } else if (dist < kFar) {
                ++dist;
            }
            left_dist[x] = dist;
            left_val[x] = val;
        }
        dist = kFar;
        val = 0.0;
        for (int x = w - 1; x >= 0; --x) {
            if (mask.at(x, y)) {
                dist = 0;
                val = prior.at(x, y);
            } else if (dist < kFar) {
                ++dist;
            }
            right_dist[x] = dist;
            right_val[x] = val;
        }
        for (int x = 0; x < w; ++x) {
            if (mask.at(x, y)) continue;
            if (left_dist[x] >= kFar && right_dist[x] >= kFar) {
                filled.at(x, y) = 0.0;  // fully invalid row
            } else {
                filled.at(x, y) = left_dist[x] <= right_dist[x] ? left_val[x] : right_val[x];
            }
        }
    }

    // Pass 2: 3x3 mean, only where the neighborhood touched an invalid pixel.
    FloatPlane out = filled;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool touched = false;
            for (int j = -1; j <= 1 && !touched; ++j)
                for (int i = -1; i <= 1 && !touched; ++i) {
                    int nx = x + i, ny = y + j;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    if (!mask.at(nx, ny)) touched = true;
                }
            if (!touched) continue;
            double sum = 0.0;
            int n = 0;
            for (int j = -1; j <= 1; ++j)
                for (int i = -1; i <= 1; ++i) {
                    int nx = x + i, ny = y + j;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    sum += filled.at(nx, ny);
                    ++n;
                }
            out.at(x, y) = sum / n;
        }
    }
    return out;
}

}  // namespace stereodc

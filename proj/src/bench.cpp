#include "stereodc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <thread>

namespace stereodc {

// ---------------------------------------------------------------------------
// PSNR
// ---------------------------------------------------------------------------

double psnr(const PlanarImage& a, const PlanarImage& b) {
    require(a.width == b.width && a.height == b.height && a.channels == b.channels,
            "psnr: dimension mismatch");
    double sum = 0.0;
    for (size_t i = 0; i < a.samples.size(); ++i) {
        double d = static_cast<double>(a.samples[i]) - b.samples[i];
        sum += d * d;
    }
    double mse = sum / static_cast<double>(a.samples.size());
    if (mse < 1e-10) return 100.0;
    return std::min(100.0, 10.0 * std::log10(255.0 * 255.0 / mse));
}

// ---------------------------------------------------------------------------
// MS-SSIM
// ---------------------------------------------------------------------------

namespace {

constexpr int kWin = 11;
constexpr double kWinSigma = 1.5;
constexpr double kC1 = 6.5025;    // (0.01 * 255)^2
constexpr double kC2 = 58.5225;   // (0.03 * 255)^2
constexpr double kMsWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

std::array<double, kWin> gaussian_taps() {
    std::array<double, kWin> t{};
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        double d = i - (kWin - 1) / 2.0;
        t[i] = std::exp(-d * d / (2.0 * kWinSigma * kWinSigma));
        sum += t[i];
    }
    for (double& v : t) v /= sum;
    return t;
}

// Separable 11-tap Gaussian, valid region only.
FloatPlane gauss_valid(const FloatPlane& p) {
    static const std::array<double, kWin> taps = gaussian_taps();
    int ow = p.width - kWin + 1, oh = p.height - kWin + 1;
    FloatPlane horiz(ow, p.height);
    for (int y = 0; y < p.height; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < kWin; ++i) s += taps[i] * p.at(x + i, y);
            horiz.at(x, y) = s;
        }
    FloatPlane out(ow, oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < kWin; ++i) s += taps[i] * horiz.at(x, y + i);
            out.at(x, y) = s;
        }
    return out;
}

FloatPlane mul(const FloatPlane& a, const FloatPlane& b) {
    FloatPlane out(a.width, a.height);
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] = a.values[i] * b.values[i];
    return out;
}

FloatPlane downsample2(const FloatPlane& p) {
    FloatPlane out(p.width / 2, p.height / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            out.at(x, y) = 0.25 * (p.at(2 * x, 2 * y) + p.at(2 * x + 1, 2 * y) +
                                   p.at(2 * x, 2 * y + 1) + p.at(2 * x + 1, 2 * y + 1));
    return out;
}

// Mean luminance (l*cs) and contrast-structure (cs) terms at one scale.
void ssim_terms(const FloatPlane& a, const FloatPlane& b, double* mean_ssim,
                double* mean_cs) {
    FloatPlane mu1 = gauss_valid(a), mu2 = gauss_valid(b);
    FloatPlane s11 = gauss_valid(mul(a, a));
    FloatPlane s22 = gauss_valid(mul(b, b));
    FloatPlane s12 = gauss_valid(mul(a, b));
    double acc_ssim = 0.0, acc_cs = 0.0;
    size_t n = mu1.values.size();
    for (size_t i = 0; i < n; ++i) {
        double m1 = mu1.values[i], m2 = mu2.values[i];
        double v1 = s11.values[i] - m1 * m1;
        double v2 = s22.values[i] - m2 * m2;
        double cov = s12.values[i] - m1 * m2;
        double l = (2.0 * m1 * m2 + kC1) / (m1 * m1 + m2 * m2 + kC1);
        double cs = (2.0 * cov + kC2) / (v1 + v2 + kC2);
        acc_ssim += l * cs;
        acc_cs += cs;
    }
    *mean_ssim = acc_ssim / n;
    *mean_cs = acc_cs / n;
}

}  // namespace

double ms_ssim(const PlanarImage& a, const PlanarImage& b, int* scales_used) {
    require(a.width == b.width && a.height == b.height && a.channels == b.channels,
            "ms_ssim: dimension mismatch");
    int min_dim = std::min(a.width, a.height);
    require(min_dim >= kWin, "ms_ssim: image smaller than the filter window");

    int scales = 1;
    while (scales < 5 && (min_dim >> scales) >= kWin) ++scales;
    if (scales_used) *scales_used = scales;

    double wsum = 0.0;
    for (int s = 0; s < scales; ++s) wsum += kMsWeights[s];

    FloatPlane pa = to_luma(a), pb = to_luma(b);
    double score = 1.0;
    for (int s = 0; s < scales; ++s) {
        double mean_ssim, mean_cs;
        ssim_terms(pa, pb, &mean_ssim, &mean_cs);
        double w = kMsWeights[s] / wsum;
        double term = (s == scales - 1) ? mean_ssim : mean_cs;
        term = std::max(term, 1e-12);  // negative cs is possible on adversarial inputs
        score *= std::pow(term, w);
        if (s + 1 < scales) {
            pa = downsample2(pa);
            pb = downsample2(pb);
        }
    }
    return score;
}

// ---------------------------------------------------------------------------
// Bjontegaard deltas
// ---------------------------------------------------------------------------

void RDCurve::validate() const {
    require(points.size() >= 4, "RD curve needs at least 4 points");
    for (size_t i = 0; i < points.size(); ++i) {
        require(std::isfinite(points[i].bpp) && points[i].bpp > 0.0, "bpp must be positive");
        require(std::isfinite(points[i].psnr), "psnr must be finite");
        if (i) require(points[i].bpp > points[i - 1].bpp, "bpp must be strictly increasing");
    }
}

namespace {

// Least-squares cubic fit with a centered abscissa; returns coefficients
// c[0..3] for y = sum c_k (x - x0)^k.
struct CubicFit {
    double x0 = 0.0;
    std::array<double, 4> c{};

    double integral(double lo, double hi) const {
        auto anti = [&](double x) {
            double t = x - x0;
            return c[0] * t + c[1] * t * t / 2 + c[2] * t * t * t / 3 +
                   c[3] * t * t * t * t / 4;
        };
        return anti(hi) - anti(lo);
    }
};

CubicFit fit_cubic(const std::vector<double>& xs, const std::vector<double>& ys) {
    size_t n = xs.size();
    CubicFit fit;
    for (double x : xs) fit.x0 += x;
    fit.x0 /= static_cast<double>(n);

    double m[4][5] = {};
    for (size_t i = 0; i < n; ++i) {
        double t = xs[i] - fit.x0;
        double pw[7] = {1, t, t * t, t * t * t, 0, 0, 0};
        pw[4] = pw[2] * pw[2];
        pw[5] = pw[4] * t;
        pw[6] = pw[5] * t;
        for (int r = 0; r < 4; ++r) {
            for (int cc = 0; cc < 4; ++cc) m[r][cc] += pw[r + cc];
            m[r][4] += pw[r] * ys[i];
        }
    }
    // Gaussian elimination with partial pivoting.
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        require(std::abs(m[piv][col]) > 1e-12, "degenerate polynomial fit");
        if (piv != col)
            for (int cc = 0; cc < 5; ++cc) std::swap(m[piv][cc], m[col][cc]);
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            double f = m[r][col] / m[col][col];
            for (int cc = col; cc < 5; ++cc) m[r][cc] -= f * m[col][cc];
        }
    }
    for (int r = 0; r < 4; ++r) fit.c[r] = m[r][4] / m[r][r];
    return fit;
}

std::string range_str(double lo, double hi) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "[%g, %g]", lo, hi);
    return buf;
}

}  // namespace

BDResult bd_metrics(const RDCurve& anchor, const RDCurve& test) {
    anchor.validate();
    test.validate();

    std::vector<double> lr_a, p_a, lr_t, p_t;
    for (const RDPoint& pt : anchor.points) {
        lr_a.push_back(std::log10(pt.bpp));
        p_a.push_back(pt.psnr);
    }
    for (const RDPoint& pt : test.points) {
        lr_t.push_back(std::log10(pt.bpp));
        p_t.push_back(pt.psnr);
    }

    BDResult out;
    {
        // BD-PSNR: PSNR as a cubic in log-rate, averaged over the log-rate overlap.
        double lo = std::max(*std::min_element(lr_a.begin(), lr_a.end()),
                             *std::min_element(lr_t.begin(), lr_t.end()));
        double hi = std::min(*std::max_element(lr_a.begin(), lr_a.end()),
                             *std::max_element(lr_t.begin(), lr_t.end()));
        require(hi > lo, "insufficient log-rate overlap between curves: anchor " +
                             range_str(lr_a.front(), lr_a.back()) + ", test " +
                             range_str(lr_t.front(), lr_t.back()));
        CubicFit fa = fit_cubic(lr_a, p_a), ft = fit_cubic(lr_t, p_t);
        out.bd_psnr = (ft.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo);
    }
    {
        // BD-rate: log-rate as a cubic in PSNR, averaged over the PSNR overlap.
        double lo = std::max(*std::min_element(p_a.begin(), p_a.end()),
                             *std::min_element(p_t.begin(), p_t.end()));
        double hi = std::min(*std::max_element(p_a.begin(), p_a.end()),
                             *std::max_element(p_t.begin(), p_t.end()));
        require(hi > lo, "insufficient PSNR overlap between curves: anchor " +
                             range_str(p_a.front(), p_a.back()) + ", test " +
                             range_str(p_t.front(), p_t.back()));
        CubicFit fa = fit_cubic(p_a, lr_a), ft = fit_cubic(p_t, lr_t);
        double delta = (ft.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo);
        out.bd_rate = (std::pow(10.0, delta) - 1.0) * 100.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// RD sweep
// ---------------------------------------------------------------------------

namespace {

struct LoadedPair {
    PlanarImage left;
    PlanarImage right;
    std::string name;
};

struct TaskOut {
    double bpp = 0.0, psnr_avg = 0.0, msssim = 0.0;
    AllocationRow row;
    std::vector<uint8_t> stream;  // only kept when dumping
};

std::vector<CodecConfig> sweep_cases(const SweepOptions& opts) {
    if (!opts.ablation) return {opts.base};
    std::vector<CodecConfig> cases = {CodecConfig::case1(), CodecConfig::case2(),
                                      CodecConfig::case3(), CodecConfig::case4(),
                                      CodecConfig::full()};
    for (CodecConfig& c : cases) {
        c.qp_r = opts.base.qp_r;
        c.qp_l = opts.base.qp_l;
        c.match = opts.base.match;
        c.w_prior = opts.base.w_prior;
    }
    return cases;
}

}  // namespace

RDCurve SweepResult::curve() const {
    std::vector<RDPoint> pts;
    for (const SweepPoint& p : points) pts.push_back({p.bpp, p.psnr});
    std::sort(pts.begin(), pts.end(),
              [](const RDPoint& a, const RDPoint& b) { return a.bpp < b.bpp; });
    return RDCurve{pts};
}

SweepResult rd_sweep(const std::vector<StereoPairFiles>& pairs, const SweepOptions& opts) {
    require(!pairs.empty(), "rd_sweep: empty dataset");
    require(!opts.lambdas.empty(), "rd_sweep: no lambda values");

    SweepResult result;
    std::vector<LoadedPair> loaded;
    for (const StereoPairFiles& p : pairs) {
        try {
            LoadedPair lp{read_image(p.left), read_image(p.right), p.name};
            require(lp.left.width == lp.right.width && lp.left.height == lp.right.height &&
                        lp.left.channels == lp.right.channels,
                    "pair dimensions differ");
            loaded.push_back(std::move(lp));
        } catch (const Error& e) {
            std::fprintf(stderr, "warning: skipping pair %s: %s\n", p.name.c_str(), e.what());
            ++result.pairs_skipped;
        }
    }
    require(!loaded.empty(), "rd_sweep: no readable pairs");
    result.pairs_used = static_cast<int>(loaded.size());

    std::vector<CodecConfig> cases = sweep_cases(opts);
    const size_t n_cases = cases.size(), n_lambdas = opts.lambdas.size(),
                 n_pairs = loaded.size();
    std::vector<TaskOut> outs(n_cases * n_lambdas * n_pairs);

    std::atomic<size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= outs.size()) return;
            try {
                size_t pi = i % n_pairs;
                size_t li = (i / n_pairs) % n_lambdas;
                size_t ci = i / (n_pairs * n_lambdas);
                const LoadedPair& lp = loaded[pi];
                RDSearchResult rs = rd_search(lp.left, lp.right, opts.lambdas[li],
                                              opts.qp_grid, cases[ci]);
                const EncodeResult& er = rs.result;
                const Bitstream& bs = er.bitstream;
                // metrics come from the decoded stream (identical to the
                // encoder's closed-loop reconstruction by contract)
                DecodedPair dec = decode_pair(bs);
                double px = static_cast<double>(lp.left.width) * lp.left.height;
                TaskOut& t = outs[i];
                t.bpp = 8.0 * bs.total_bytes() / (2.0 * px);
                double ps_l = psnr(lp.left, dec.left);
                double ps_r = psnr(lp.right, dec.right);
                t.psnr_avg = 0.5 * (ps_l + ps_r);
                t.msssim = 0.5 * (ms_ssim(lp.left, dec.left) +
                                  ms_ssim(lp.right, dec.right));
                t.row = AllocationRow{opts.lambdas[li],
                                      t.bpp,
                                      t.psnr_avg,
                                      8.0 * bs.right.size() / px,
                                      ps_r,
                                      8.0 * bs.left.size() / px,
                                      ps_l,
                                      8.0 * bs.disp.size() / px,
                                      psnr(lp.left, er.prediction)};
                if (opts.dump_streams) t.stream = bs.serialize();
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    int jobs = std::max(1, opts.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    // Ordered reduction: averages per (case, lambda) over pairs.
    auto aggregate = [&](size_t ci, size_t li) {
        SweepPoint sp;
        sp.lambda = opts.lambdas[li];
        AllocationRow& r = sp.allocation;
        r.lambda = sp.lambda;
        for (size_t pi = 0; pi < n_pairs; ++pi) {
            const TaskOut& t = outs[(ci * n_lambdas + li) * n_pairs + pi];
            sp.bpp += t.bpp;
            sp.psnr += t.psnr_avg;
            sp.msssim += t.msssim;
            r.bpp_total += t.row.bpp_total;
            r.psnr_avg += t.row.psnr_avg;
            r.bpp_r += t.row.bpp_r;
            r.psnr_r += t.row.psnr_r;
            r.bpp_l += t.row.bpp_l;
            r.psnr_l += t.row.psnr_l;
            r.bpp_d += t.row.bpp_d;
            r.psnr_pred += t.row.psnr_pred;
        }
        double inv = 1.0 / static_cast<double>(n_pairs);
        sp.bpp *= inv;
        sp.psnr *= inv;
        sp.msssim *= inv;
        r.bpp_total *= inv;
        r.psnr_avg *= inv;
        r.bpp_r *= inv;
        r.psnr_r *= inv;
        r.bpp_l *= inv;
        r.psnr_l *= inv;
        r.bpp_d *= inv;
        r.psnr_pred *= inv;
        return sp;
    };

    size_t full_case = n_cases - 1;  // base when not ablating, full model otherwise
    for (size_t li = 0; li < n_lambdas; ++li) result.points.push_back(aggregate(full_case, li));
    if (opts.ablation) {
        result.ablation_points.resize(n_cases);
        for (size_t ci = 0; ci < n_cases; ++ci)
            for (size_t li = 0; li < n_lambdas; ++li)
                result.ablation_points[ci].push_back(aggregate(ci, li));
    }

    if (!opts.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(opts.out_dir);
        auto write_text = [](const std::string& path, const std::string& text) {
            write_file(path, std::vector<uint8_t>(text.begin(), text.end()));
        };
        write_text(opts.out_dir + "/rd_curve.csv", rd_curve_csv(result));
        write_text(opts.out_dir + "/allocation.csv", allocation_csv(result));
        if (opts.ablation) {
            write_text(opts.out_dir + "/ablation.csv", ablation_csv(result));
            // one RD-curve CSV per ablation case; rd_curve.csv is the full model
            for (size_t ci = 0; ci + 1 < result.ablation_points.size(); ++ci) {
                SweepResult one;
                one.points = result.ablation_points[ci];
                write_text(opts.out_dir + "/rd_curve_case" + std::to_string(ci + 1) + ".csv",
                           rd_curve_csv(one));
            }
        }
        if (opts.dump_streams) {
            fs::create_directories(opts.out_dir + "/streams");
            static const char* kCaseNames[] = {"case1", "case2", "case3", "case4", "full"};
            for (size_t ci = 0; ci < n_cases; ++ci)
                for (size_t li = 0; li < n_lambdas; ++li)
                    for (size_t pi = 0; pi < n_pairs; ++pi) {
                        const TaskOut& t = outs[(ci * n_lambdas + li) * n_pairs + pi];
                        std::string name = opts.out_dir + "/streams/" + loaded[pi].name +
                                           "_l" + std::to_string(li) + "_" +
                                           (opts.ablation ? kCaseNames[ci] : "base") + ".dsc";
                        write_file(name, t.stream);
                    }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string rd_curve_csv(const SweepResult& r) {
    std::string out = "lambda,bpp,psnr,msssim\n";
    for (const SweepPoint& p : r.points) {
        out += format_number(p.lambda) + "," + format_number(p.bpp) + "," +
               format_number(p.psnr) + "," + format_number(p.msssim) + "\n";
    }
    return out;
}

std::string allocation_csv(const SweepResult& r) {
    std::string out = "lambda,bpp,psnr,bpp_r,psnr_r,bpp_l,psnr_l,bpp_d,psnr_pred\n";
    for (const SweepPoint& p : r.points) {
        const AllocationRow& a = p.allocation;
        out += format_number(a.lambda) + "," + format_number(a.bpp_total) + "," +
               format_number(a.psnr_avg) + "," + format_number(a.bpp_r) + "," +
               format_number(a.psnr_r) + "," + format_number(a.bpp_l) + "," +
               format_number(a.psnr_l) + "," + format_number(a.bpp_d) + "," +
               format_number(a.psnr_pred) + "\n";
    }
    return out;
}

std::string ablation_csv(const SweepResult& r) {
    static const char* kCaseNames[] = {"case1", "case2", "case3", "case4", "full"};
    std::string out = "case,lambda,bpp,psnr\n";
    for (size_t ci = 0; ci < r.ablation_points.size(); ++ci)
        for (const SweepPoint& p : r.ablation_points[ci]) {
            out += std::string(kCaseNames[ci]) + "," + format_number(p.lambda) + "," +
                   format_number(p.bpp) + "," + format_number(p.psnr) + "\n";
        }
    return out;
}

std::vector<StereoPairFiles> find_stereo_pairs(const std::string& dir) {
    namespace fs = std::filesystem;
    require(fs::is_directory(dir), "not a directory: " + dir);
    std::vector<StereoPairFiles> pairs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string stem = entry.path().stem().string();
        std::string ext = entry.path().extension().string();
        if (ext != ".pgm" && ext != ".ppm") continue;
        const std::string suffix = "_left";
        if (stem.size() <= suffix.size() ||
            stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) != 0)
            continue;
        std::string base = stem.substr(0, stem.size() - suffix.size());
        fs::path right = entry.path().parent_path() / (base + "_right" + ext);
        if (fs::exists(right))
            pairs.push_back({entry.path().string(), right.string(), base});
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const StereoPairFiles& a, const StereoPairFiles& b) { return a.name < b.name; });
    return pairs;
}

}  // namespace stereodc

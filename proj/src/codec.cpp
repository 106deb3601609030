#include "stereodc/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace stereodc {

void CodecConfig::validate() const {
    require(qp_r > 0.0f && qp_l > 0.0f, "quantization steps must be positive");
    require(w_prior >= 0.0f, "w_prior must be non-negative");
    require(disparity_downsample == 4, "disparity downsample factor is fixed at 4");
    match.validate();
    // Feature flags form a chain: prn -> aligned prior -> prior -> disparity.
    require(!use_prn || align_prior, "use_prn requires align_prior");
    require(!align_prior || use_prior, "align_prior requires use_prior");
    require(!use_prior || use_disparity, "use_prior requires use_disparity");
}

// ---------------------------------------------------------------------------
// Bitstream layout (all integers big-endian)
// ---------------------------------------------------------------------------

namespace {

void push_u8(std::vector<uint8_t>& v, uint8_t x) { v.push_back(x); }
void push_u16(std::vector<uint8_t>& v, uint16_t x) {
    v.push_back(static_cast<uint8_t>(x >> 8));
    v.push_back(static_cast<uint8_t>(x));
}
void push_u32(std::vector<uint8_t>& v, uint32_t x) {
    v.push_back(static_cast<uint8_t>(x >> 24));
    v.push_back(static_cast<uint8_t>(x >> 16));
    v.push_back(static_cast<uint8_t>(x >> 8));
    v.push_back(static_cast<uint8_t>(x));
}
void push_f32(std::vector<uint8_t>& v, float x) { push_u32(v, std::bit_cast<uint32_t>(x)); }

struct ByteReader {
    const std::vector<uint8_t>& b;
    size_t pos = 0;
    uint8_t u8() {
        require(pos + 1 <= b.size(), "bitstream truncated");
        return b[pos++];
    }
    uint16_t u16() {
        require(pos + 2 <= b.size(), "bitstream truncated");
        uint16_t v = (static_cast<uint16_t>(b[pos]) << 8) | b[pos + 1];
        pos += 2;
        return v;
    }
    uint32_t u32() {
        require(pos + 4 <= b.size(), "bitstream truncated");
        uint32_t v = (static_cast<uint32_t>(b[pos]) << 24) | (static_cast<uint32_t>(b[pos + 1]) << 16) |
                     (static_cast<uint32_t>(b[pos + 2]) << 8) | b[pos + 3];
        pos += 4;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
};

constexpr uint8_t kFlagDisparity = 1 << 0;
constexpr uint8_t kFlagPrior = 1 << 1;
constexpr uint8_t kFlagAlign = 1 << 2;
constexpr uint8_t kFlagPrn = 1 << 3;
constexpr uint8_t kFlagColor = 1 << 4;

}  // namespace

std::vector<uint8_t> Bitstream::serialize() const {
    std::vector<uint8_t> out;
    out.reserve(total_bytes());
    for (char c : {'D', 'S', 'C', '1'}) out.push_back(static_cast<uint8_t>(c));
    push_u8(out, version);
    uint8_t flags = 0;
    if (use_disparity) flags |= kFlagDisparity;
    if (use_prior) flags |= kFlagPrior;
    if (align_prior) flags |= kFlagAlign;
    if (use_prn) flags |= kFlagPrn;
    if (color) flags |= kFlagColor;
    push_u8(out, flags);
    push_u16(out, width);
    push_u16(out, height);
    push_f32(out, qp_r);
    push_f32(out, qp_l);
    push_u16(out, max_disparity);
    push_f32(out, w_prior);
    push_u32(out, static_cast<uint32_t>(right.size()));
    push_u32(out, static_cast<uint32_t>(disp.size()));
    push_u32(out, static_cast<uint32_t>(left.size()));
    out.insert(out.end(), right.begin(), right.end());
    out.insert(out.end(), disp.begin(), disp.end());
    out.insert(out.end(), left.begin(), left.end());
    return out;
}

Bitstream Bitstream::parse(const std::vector<uint8_t>& bytes) {
    require(bytes.size() >= kHeaderBytes, "bitstream shorter than header");
    require(bytes[0] == 'D' && bytes[1] == 'S' && bytes[2] == 'C' && bytes[3] == '1',
            "bad magic (want DSC1)");
    ByteReader r{bytes, 4};
    Bitstream bs;
    bs.version = r.u8();
    require(bs.version == kVersion, "unsupported bitstream version");
    uint8_t flags = r.u8();
    bs.use_disparity = flags & kFlagDisparity;
    bs.use_prior = flags & kFlagPrior;
    bs.align_prior = flags & kFlagAlign;
    bs.use_prn = flags & kFlagPrn;
    bs.color = flags & kFlagColor;
    bs.width = r.u16();
    bs.height = r.u16();
    require(bs.width > 0 && bs.height > 0, "bad image dimensions");
    bs.qp_r = r.f32();
    bs.qp_l = r.f32();
    require(bs.qp_r > 0.0f && bs.qp_l > 0.0f, "bad quantization steps");
    bs.max_disparity = r.u16();
    bs.w_prior = r.f32();
    uint32_t len_r = r.u32();
    uint32_t len_d = r.u32();
    uint32_t len_l = r.u32();
    require(bytes.size() == kHeaderBytes + static_cast<size_t>(len_r) + len_d + len_l,
            "length mismatch between header and payload");
    auto at = bytes.begin() + kHeaderBytes;
    bs.right.assign(at, at + len_r);
    bs.disp.assign(at + len_r, at + len_r + len_d);
    bs.left.assign(at + len_r + len_d, at + len_r + len_d + len_l);
    return bs;
}

// ---------------------------------------------------------------------------
// Disparity-map resampling
// ---------------------------------------------------------------------------

DisparityMap median_downsample(const DisparityMap& d, int factor) {
    require(factor >= 1, "downsample factor must be >= 1");
    int gw = (d.width + factor - 1) / factor;
    int gh = (d.height + factor - 1) / factor;
    DisparityMap grid(gw, gh);
    std::vector<int32_t> cell;
    cell.reserve(static_cast<size_t>(factor) * factor);
    for (int gy = 0; gy < gh; ++gy) {
        for (int gx = 0; gx < gw; ++gx) {
            cell.clear();
            for (int y = gy * factor; y < std::min((gy + 1) * factor, d.height); ++y)
                for (int x = gx * factor; x < std::min((gx + 1) * factor, d.width); ++x)
                    cell.push_back(d.at(x, y));
            std::sort(cell.begin(), cell.end());
            grid.at(gx, gy) = cell[(cell.size() - 1) / 2];  // lower median
        }
    }
    return grid;
}

DisparityMap bilinear_upsample(const DisparityMap& grid, int factor, int out_w, int out_h) {
    require(factor >= 1, "upsample factor must be >= 1");
    DisparityMap out(out_w, out_h);
    const int gw = grid.width, gh = grid.height;
    const int den = 2 * factor;  // positions in units of 1/(2*factor)
    auto axis = [&](int v, int& i0, int& frac) {
        int num = 2 * v + 1 - factor;  // den * (src position)
        int q = num >= 0 ? num / den : -((-num + den - 1) / den);
        frac = num - q * den;
        i0 = q;
    };
    for (int y = 0; y < out_h; ++y) {
        int y0, fy;
        axis(y, y0, fy);
        int cy0 = std::clamp(y0, 0, gh - 1), cy1 = std::clamp(y0 + 1, 0, gh - 1);
        for (int x = 0; x < out_w; ++x) {
            int x0, fx;
            axis(x, x0, fx);
            int cx0 = std::clamp(x0, 0, gw - 1), cx1 = std::clamp(x0 + 1, 0, gw - 1);
            int64_t acc = static_cast<int64_t>(grid.at(cx0, cy0)) * (den - fx) * (den - fy) +
                          static_cast<int64_t>(grid.at(cx1, cy0)) * fx * (den - fy) +
                          static_cast<int64_t>(grid.at(cx0, cy1)) * (den - fx) * fy +
                          static_cast<int64_t>(grid.at(cx1, cy1)) * fx * fy;
            out.at(x, y) = static_cast<int32_t>((acc + den * den / 2) / (den * den));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Substream coding
// ---------------------------------------------------------------------------

namespace {

// Coefficient-plane coding: blocks in raster order, bands in zig-zag order
// inside each block. sigma comes from same-band neighbors of the causal
// blocks plus, optionally, the co-located coefficient of the prior plane.
//
// Prior coefficients carry full texture energy while the residual context
// is on the quantization-noise scale, so raw prior magnitudes would pull
// sigma far too high. The encoder calibrates one gain per band class
// (|residual| over |prior| mass) and signals it ahead of the range-coded
// payload; both sides scale the prior evidence by it.
struct PriorGains {
    std::array<float, 3> g{1.0f, 1.0f, 1.0f};  // indexed by BandClass
};

struct PlaneCtx {
    double qp;
    const ScaleTable& table;
    const CoeffPlane* prior;  // null: causal-only contexts
    double w_prior;
    PriorGains gains;
};

const GaussianCdfModel& plane_model(const QuantPlane& q, int bx, int by, int b,
                                    const PlaneCtx& p) {
    CodingContext ctx;
    ctx.band_class = classify_band(b);
    ctx.causal_neighbor_mags[0] =
        bx > 0 ? std::abs(q.band(bx - 1, by, b)) * p.qp : 0.0;
    ctx.causal_neighbor_mags[1] =
        by > 0 ? std::abs(q.band(bx, by - 1, b)) * p.qp : 0.0;
    ctx.causal_neighbor_mags[2] =
        (bx > 0 && by > 0) ? std::abs(q.band(bx - 1, by - 1, b)) * p.qp : 0.0;
    if (p.prior)
        ctx.prior_coeff_mag = p.gains.g[static_cast<int>(ctx.band_class)] *
                              std::abs(p.prior->band(bx, by, b));
    double sigma = predict_sigma(ctx, p.prior != nullptr, p.w_prior, p.qp);
    return p.table.lookup(sigma);
}

// Ratio of residual to prior coefficient mass per band class.
PriorGains calibrate_prior_gains(const CoeffPlane& residual, const CoeffPlane& prior) {
    double num[3] = {}, den[3] = {};
    for (int by = 0; by < residual.blocks_y(); ++by)
        for (int bx = 0; bx < residual.blocks_x(); ++bx)
            for (int b = 0; b < 64; ++b) {
                int k = static_cast<int>(classify_band(b));
                num[k] += std::abs(residual.band(bx, by, b));
                den[k] += std::abs(prior.band(bx, by, b));
            }
    PriorGains out;
    for (int k = 0; k < 3; ++k)
        out.g[k] = den[k] > 0.0 ? static_cast<float>(std::clamp(num[k] / den[k], 0.0, 2.0))
                                : 0.0f;
    return out;
}

double encode_quant_plane(RangeEncoder& enc, const QuantPlane& q, const PlaneCtx& p) {
    double bits = 0.0;
    for (int by = 0; by < q.blocks_y(); ++by)
        for (int bx = 0; bx < q.blocks_x(); ++bx)
            for (int b = 0; b < 64; ++b) {
                const GaussianCdfModel& m = plane_model(q, bx, by, b, p);
                int32_t v = q.band(bx, by, b);
                encode_symbol(enc, v, m);
                bits += symbol_bits(v, m);
            }
    return bits;
}

QuantPlane decode_quant_plane(RangeDecoder& dec, int padded_w, int padded_h, int orig_w,
                              int orig_h, const PlaneCtx& p) {
    QuantPlane q(padded_w, padded_h, orig_w, orig_h);
    for (int by = 0; by < q.blocks_y(); ++by)
        for (int bx = 0; bx < q.blocks_x(); ++bx)
            for (int b = 0; b < 64; ++b)
                q.set_band(bx, by, b, decode_symbol(dec, plane_model(q, bx, by, b, p)));
    return q;
}

// Disparity grid: left-neighbor deltas (first column predicts from the row
// above) under a Gaussian whose sigma tracks |delta| with an EMA of 1/16.
constexpr double kDispSigmaInit = 4.0;

int32_t disp_prediction(const DisparityMap& g, int x, int y) {
    if (x > 0) return g.at(x - 1, y);
    if (y > 0) return g.at(0, y - 1);
    return 0;
}

double encode_disparity_grid(RangeEncoder& enc, const DisparityMap& g,
                             const ScaleTable& table) {
    double bits = 0.0;
    double ema = kDispSigmaInit;
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            int32_t delta = g.at(x, y) - disp_prediction(g, x, y);
            const GaussianCdfModel& m = table.lookup(ema);
            encode_symbol(enc, delta, m);
            bits += symbol_bits(delta, m);
            ema += (std::abs(static_cast<double>(delta)) - ema) / 16.0;
        }
    return bits;
}

// max_value bounds reconstructed values (valid encoders never exceed
// 4 * max_disparity); with 64-bit accumulation a corrupt stream cannot
// overflow, it just clamps.
DisparityMap decode_disparity_grid(RangeDecoder& dec, int gw, int gh,
                                   const ScaleTable& table, int32_t max_value) {
    DisparityMap g(gw, gh);
    double ema = kDispSigmaInit;
    for (int y = 0; y < gh; ++y)
        for (int x = 0; x < gw; ++x) {
            int32_t delta = decode_symbol(dec, table.lookup(ema));
            int64_t v = static_cast<int64_t>(disp_prediction(g, x, y)) + delta;
            g.at(x, y) = static_cast<int32_t>(
                std::clamp<int64_t>(v, 0, static_cast<int64_t>(max_value)));
            ema += (std::abs(static_cast<double>(delta)) - ema) / 16.0;
        }
    return g;
}

// ---------------------------------------------------------------------------
// Pipeline helpers shared by encoder and decoder
// ---------------------------------------------------------------------------

inline int pad8(int v) { return (v + 7) & ~7; }

FloatPlane reconstruct_plane(const QuantPlane& q, double qp) {
    return inverse_dct8(dequantize(q, qp));
}

// Prediction of the left view from the decoded right image: warp each
// channel by the decoded disparity, optionally refine. Without disparity
// the prediction is identically zero (independent coding).
std::vector<FloatPlane> predict_left(const PlanarImage& recon_right,
                                     const DisparityMap* dhat, bool use_prn) {
    std::vector<FloatPlane> pred;
    pred.reserve(recon_right.channels);
    for (int c = 0; c < recon_right.channels; ++c) {
        if (!dhat) {
            pred.emplace_back(recon_right.width, recon_right.height, 0.0);
            continue;
        }
        WarpResult wr = warp_right_to_left(channel_plane(recon_right, c), *dhat);
        pred.push_back(use_prn ? refine_prior(wr.plane, wr.mask) : std::move(wr.plane));
    }
    return pred;
}

struct LeftPriors {
    std::vector<CoeffPlane> planes;  // empty when priors are off
    const CoeffPlane* get(int c) const { return planes.empty() ? nullptr : &planes[c]; }
};

LeftPriors build_left_priors(const PlanarImage& recon_right,
                             const std::vector<FloatPlane>& pred, bool use_prior,
                             bool align_prior) {
    LeftPriors out;
    if (!use_prior) return out;
    out.planes.reserve(recon_right.channels);
    for (int c = 0; c < recon_right.channels; ++c) {
        // Aligned: transform of the (possibly refined) prediction itself.
        // Unaligned: transform of the decoded right view as-is.
        out.planes.push_back(align_prior ? forward_dct8(pred[c])
                                         : forward_dct8(channel_plane(recon_right, c)));
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Encoder
// ---------------------------------------------------------------------------

namespace {

// Stateful encoder so an RD search over (qp_r, qp_l) does not redo the
// disparity estimation per grid point, nor the right branch per qp_l.
// Results are identical to a fresh encode: every cached product is a pure
// function of the inputs and the key it is cached under.
class PairEncoder {
public:
    PairEncoder(const PlanarImage& left, const PlanarImage& right, const CodecConfig& base)
        : left_(left), right_(right), base_(base) {
        base_.validate();
        require(left.width == right.width && left.height == right.height &&
                    left.channels == right.channels,
                "encode_pair: dimension mismatch");
        require(left.width <= 65535 && left.height <= 65535, "image too large for header");
    }

    EncodeResult encode(float qp_r, float qp_l) {
        const int w = left_.width, h = left_.height, ch = left_.channels;
        ensure_disparity();
        ensure_right_side(qp_r);

        EncodeResult res;
        Bitstream& bs = res.bitstream;
        bs.use_disparity = base_.use_disparity;
        bs.use_prior = base_.use_prior;
        bs.align_prior = base_.align_prior;
        bs.use_prn = base_.use_prn;
        bs.color = ch == 3;
        bs.width = static_cast<uint16_t>(w);
        bs.height = static_cast<uint16_t>(h);
        bs.qp_r = qp_r;
        bs.qp_l = qp_l;
        bs.max_disparity = static_cast<uint16_t>(base_.match.max_disparity);
        bs.w_prior = base_.w_prior;
        bs.right = right_bytes_;
        bs.disp = disp_bytes_;
        res.est_bits_right = est_bits_right_;
        res.est_bits_disp = est_bits_disp_;
        res.recon_right = recon_right_;

        // Left stream: pixel-domain residual against the prediction. The
        // payload starts with the signaled prior gains (3 f32 per channel,
        // only when priors are on), then the range-coded coefficients.
        const double qp = qp_l;
        ScaleTable table_l(qp);
        RangeEncoder enc_l;
        std::vector<uint8_t> gain_bytes;
        std::vector<FloatPlane> left_recon_planes;
        for (int c = 0; c < ch; ++c) {
            FloatPlane residual = channel_plane(left_, c);
            for (size_t i = 0; i < residual.values.size(); ++i)
                residual.values[i] -= pred_[c].values[i];
            CoeffPlane coeffs = forward_dct8(residual);
            QuantPlane q = quantize(coeffs, qp);
            PriorGains gains;
            if (priors_.get(c)) {
                gains = calibrate_prior_gains(coeffs, *priors_.get(c));
                for (float g : gains.g) push_f32(gain_bytes, g);
                res.est_bits_left += 8.0 * 12;
            }
            res.est_bits_left += encode_quant_plane(
                enc_l, q, {qp, table_l, priors_.get(c), base_.w_prior, gains});
            FloatPlane rec = reconstruct_plane(q, qp);
            for (size_t i = 0; i < rec.values.size(); ++i)
                rec.values[i] += pred_[c].values[i];
            left_recon_planes.push_back(std::move(rec));
        }
        bs.left = std::move(gain_bytes);
        std::vector<uint8_t> coded = enc_l.finish();
        bs.left.insert(bs.left.end(), coded.begin(), coded.end());
        res.recon_left = planes_to_image(left_recon_planes);
        res.prediction = planes_to_image(pred_);
        return res;
    }

private:
    void ensure_disparity() {
        if (disparity_done_ || !base_.use_disparity) {
            disparity_done_ = true;
            return;
        }
        // Estimated on the originals, coded at 1/4 spatial resolution,
        // reconstructed by bilinear upsampling.
        DisparityMap dmap = estimate_disparity(left_, right_, base_.match);
        DisparityMap grid = median_downsample(dmap, base_.disparity_downsample);
        ScaleTable table_d(1.0);
        RangeEncoder enc_d;
        est_bits_disp_ = encode_disparity_grid(enc_d, grid, table_d);
        disp_bytes_ = enc_d.finish();
        dhat_ = bilinear_upsample(grid, base_.disparity_downsample, left_.width, left_.height);
        disparity_done_ = true;
    }

    void ensure_right_side(float qp_r) {
        if (right_done_ && qp_r == cached_qp_r_) return;
        const double qp = qp_r;
        ScaleTable table_r(qp);
        RangeEncoder enc_r;
        est_bits_right_ = 0.0;
        std::vector<FloatPlane> right_recon_planes;
        for (int c = 0; c < right_.channels; ++c) {
            QuantPlane q = quantize(forward_dct8(channel_plane(right_, c)), qp);
            est_bits_right_ +=
                encode_quant_plane(enc_r, q, {qp, table_r, nullptr, base_.w_prior});
            right_recon_planes.push_back(reconstruct_plane(q, qp));
        }
        right_bytes_ = enc_r.finish();
        recon_right_ = planes_to_image(right_recon_planes);
        pred_ = predict_left(recon_right_, base_.use_disparity ? &dhat_ : nullptr,
                             base_.use_prn);
        priors_ = build_left_priors(recon_right_, pred_, base_.use_prior, base_.align_prior);
        cached_qp_r_ = qp_r;
        right_done_ = true;
    }

    const PlanarImage& left_;
    const PlanarImage& right_;
    CodecConfig base_;

    bool disparity_done_ = false;
    double est_bits_disp_ = 0.0;
    std::vector<uint8_t> disp_bytes_;
    DisparityMap dhat_;

    bool right_done_ = false;
    float cached_qp_r_ = -1.0f;
    double est_bits_right_ = 0.0;
    std::vector<uint8_t> right_bytes_;
    PlanarImage recon_right_;
    std::vector<FloatPlane> pred_;
    LeftPriors priors_;
};

}  // namespace

EncodeResult encode_pair_full(const PlanarImage& left, const PlanarImage& right,
                              const CodecConfig& cfg) {
    return PairEncoder(left, right, cfg).encode(cfg.qp_r, cfg.qp_l);
}

// ---------------------------------------------------------------------------
// Decoder
// ---------------------------------------------------------------------------

DecodedPair decode_pair(const Bitstream& bs) {
    const int w = bs.width, h = bs.height;
    const int ch = bs.color ? 3 : 1;
    const int pw = pad8(w), ph = pad8(h);
    const double qp_r = bs.qp_r, qp_l = bs.qp_l;

    ScaleTable table_r(qp_r);
    RangeDecoder dec_r(bs.right);
    std::vector<FloatPlane> right_planes;
    for (int c = 0; c < ch; ++c) {
        QuantPlane q =
            decode_quant_plane(dec_r, pw, ph, w, h, {qp_r, table_r, nullptr, bs.w_prior});
        right_planes.push_back(reconstruct_plane(q, qp_r));
    }
    PlanarImage recon_right = planes_to_image(right_planes);

    DisparityMap dhat;
    if (bs.use_disparity) {
        int gw = (w + 3) / 4, gh = (h + 3) / 4;
        ScaleTable table_d(1.0);
        RangeDecoder dec_d(bs.disp);
        DisparityMap grid =
            decode_disparity_grid(dec_d, gw, gh, table_d, 4 * bs.max_disparity);
        dhat = bilinear_upsample(grid, 4, w, h);
    }

    std::vector<FloatPlane> pred =
        predict_left(recon_right, bs.use_disparity ? &dhat : nullptr, bs.use_prn);
    LeftPriors priors = build_left_priors(recon_right, pred, bs.use_prior, bs.align_prior);

    ScaleTable table_l(qp_l);
    std::vector<PriorGains> gains(ch);
    size_t gain_hdr = 0;
    if (bs.use_prior) {
        gain_hdr = static_cast<size_t>(ch) * 12;
        require(bs.left.size() >= gain_hdr, "left substream shorter than prior gains");
        ByteReader gr{bs.left, 0};
        for (int c = 0; c < ch; ++c)
            for (float& g : gains[c].g) {
                g = gr.f32();
                require(std::isfinite(g) && g >= 0.0f, "bad prior gains");
            }
    }
    RangeDecoder dec_l(bs.left.data() + gain_hdr, bs.left.size() - gain_hdr);
    std::vector<FloatPlane> left_planes;
    for (int c = 0; c < ch; ++c) {
        QuantPlane q = decode_quant_plane(
            dec_l, pw, ph, w, h, {qp_l, table_l, priors.get(c), bs.w_prior, gains[c]});
        FloatPlane rec = reconstruct_plane(q, qp_l);
        for (size_t i = 0; i < rec.values.size(); ++i) rec.values[i] += pred[c].values[i];
        left_planes.push_back(std::move(rec));
    }
    return {planes_to_image(left_planes), std::move(recon_right)};
}

// ---------------------------------------------------------------------------
// RD search
// ---------------------------------------------------------------------------

namespace {

double image_mse(const PlanarImage& a, const PlanarImage& b) {
    double sum = 0.0;
    for (size_t i = 0; i < a.samples.size(); ++i) {
        double d = static_cast<double>(a.samples[i]) - b.samples[i];
        sum += d * d;
    }
    return sum / static_cast<double>(a.samples.size());
}

double psnr_capped(double mse) {
    if (mse < 1e-10) return 100.0;
    return std::min(100.0, 10.0 * std::log10(255.0 * 255.0 / mse));
}

}  // namespace

RDSearchResult rd_search(const PlanarImage& left, const PlanarImage& right, double lambda,
                         const std::vector<double>& qp_grid, const CodecConfig& base) {
    require(!qp_grid.empty(), "rd_search: empty qp grid");
    require(lambda >= 0.0, "rd_search: lambda must be >= 0");

    PairEncoder encoder(left, right, base);
    bool have_best = false;
    double best_j = 0.0, best_rate = 0.0;
    RDSearchResult best;
    for (double qr : qp_grid) {
        for (double ql : qp_grid) {
            CodecConfig cfg = base;
            cfg.qp_r = static_cast<float>(qr);
            cfg.qp_l = static_cast<float>(ql);
            EncodeResult res = encoder.encode(cfg.qp_r, cfg.qp_l);
            double rate = res.estimated_bpp(left.width, left.height);
            double dist = 0.5 * (image_mse(left, res.recon_left) +
                                 image_mse(right, res.recon_right));
            double j = rate + lambda * dist;
            if (!have_best || j < best_j || (j == best_j && rate < best_rate)) {
                have_best = true;
                best_j = j;
                best_rate = rate;
                double bpp = 8.0 * res.bitstream.total_bytes() /
                             (2.0 * left.width * left.height);
                double psnr = 0.5 * (psnr_capped(image_mse(left, res.recon_left)) +
                                     psnr_capped(image_mse(right, res.recon_right)));
                best.config = cfg;
                best.point = {bpp, psnr};
                best.result = std::move(res);
            }
        }
    }
    return best;
}

}  // namespace stereodc

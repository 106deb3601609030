#include "stereodc/entropy.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <numbers>
#include <numeric>

namespace stereodc {

// ---------------------------------------------------------------------------
// Range coder
// ---------------------------------------------------------------------------

namespace {
constexpr uint32_t kRenormBound = 1u << 24;
constexpr uint32_t kHalfFreq = kCdfTotal / 2;
}  // namespace

void RangeEncoder::propagate_carry() {
    assert(!out_.empty());
    for (size_t i = out_.size(); i-- > 0;) {
        if (++out_[i] != 0) return;  // ripple stops at the first non-0xFF byte
    }
    assert(false && "carry out of the stream head");
}

void RangeEncoder::encode(uint32_t cum, uint32_t freq) {
    assert(!finished_);
    assert(freq >= 1 && cum + freq <= kCdfTotal);
    uint32_t r = range_ >> kCdfBits;
    low_ += static_cast<uint64_t>(r) * cum;
    range_ = r * freq;
    if (low_ > 0xffffffffull) {
        propagate_carry();
        low_ &= 0xffffffffull;
    }
    while (range_ < kRenormBound) {
        out_.push_back(static_cast<uint8_t>(low_ >> 24));
        low_ = (low_ << 8) & 0xffffffffull;
        range_ <<= 8;
    }
}

void RangeEncoder::encode_raw_bit(int bit) {
    encode(bit ? kHalfFreq : 0, kHalfFreq);
}

std::vector<uint8_t> RangeEncoder::finish() {
    assert(!finished_);
    finished_ = true;
    for (int i = 0; i < 4; ++i) {
        out_.push_back(static_cast<uint8_t>(low_ >> 24));
        low_ = (low_ << 8) & 0xffffffffull;
    }
    return std::move(out_);
}

RangeDecoder::RangeDecoder(const uint8_t* data, size_t size) : data_(data), size_(size) {
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

uint8_t RangeDecoder::next_byte() {
    if (pos_ >= size_) fail("bitstream underrun");
    return data_[pos_++];
}

uint32_t RangeDecoder::decode_cum() {
    uint32_t r = range_ >> kCdfBits;
    uint32_t c = (code_ - low_) / r;  // wrapping subtraction mirrors the encoder
    return c >= kCdfTotal ? kCdfTotal - 1 : c;
}

void RangeDecoder::decode_update(uint32_t cum, uint32_t freq) {
    uint32_t r = range_ >> kCdfBits;
    low_ += r * cum;
    range_ = r * freq;
    while (range_ < kRenormBound) {
        code_ = (code_ << 8) | next_byte();
        low_ <<= 8;
        range_ <<= 8;
    }
}

int RangeDecoder::decode_raw_bit() {
    int bit = decode_cum() >= kHalfFreq;
    decode_update(bit ? kHalfFreq : 0, kHalfFreq);
    return bit;
}

// ---------------------------------------------------------------------------
// Discretized Gaussian model
// ---------------------------------------------------------------------------

namespace {

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

double gaussian_bin_mass(int k, double sigma, double qp) {
    return std_normal_cdf((k + 0.5) * qp / sigma) - std_normal_cdf((k - 0.5) * qp / sigma);
}

int GaussianCdfModel::find(uint32_t c) const {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), c);
    return static_cast<int>(it - cdf.begin()) - 1;
}

GaussianCdfModel build_gaussian_cdf(double sigma, double qp, int support) {
    require(qp > 0.0, "qp must be positive");
    require(support >= 1, "support must be >= 1");
    sigma = std::clamp(sigma, sigma_min_for(qp), sigma_max_for(qp));

    // Ideal half-line masses: k = 0 carries half its bin, then k = 1..S,
    // then the upper escape tail.
    const int n_half = support + 2;
    std::vector<double> ideal(n_half);
    ideal[0] = 0.5 * gaussian_bin_mass(0, sigma, qp);
    for (int k = 1; k <= support; ++k) ideal[k] = gaussian_bin_mass(k, sigma, qp);
    ideal[support + 1] = std_normal_cdf(-(support + 0.5) * qp / sigma);
    double sum = std::accumulate(ideal.begin(), ideal.end(), 0.0);

    // Apportion a half budget of 2^15 with one count reserved per entry;
    // largest-remainder on the rest, ties toward smaller index.
    const uint32_t half_budget = kCdfTotal / 2;
    const uint32_t spread = half_budget - static_cast<uint32_t>(n_half);
    std::vector<uint32_t> counts(n_half);
    std::vector<std::pair<double, int>> rema(n_half);
    uint32_t assigned = 0;
    for (int i = 0; i < n_half; ++i) {
        double target = ideal[i] / sum * spread;
        double fl = std::floor(target);
        counts[i] = 1 + static_cast<uint32_t>(fl);
        assigned += counts[i];
        rema[i] = {target - fl, i};
    }
    std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    uint32_t leftover = half_budget - assigned;
    for (uint32_t j = 0; j < leftover; ++j) counts[rema[j % n_half].second] += 1;

    // Keep the value chain non-increasing in |k|; trimmed counts move to
    // the center, which only reinforces the chain.
    uint32_t trimmed = 0;
    if (counts[1] > 2 * counts[0]) {
        trimmed += counts[1] - 2 * counts[0];
        counts[1] = 2 * counts[0];
    }
    for (int k = 2; k <= support; ++k) {
        if (counts[k] > counts[k - 1]) {
            trimmed += counts[k] - counts[k - 1];
            counts[k] = counts[k - 1];
        }
    }
    counts[0] += trimmed;

    GaussianCdfModel m;
    m.support = support;
    m.sigma = sigma;
    m.qp = qp;
    m.cdf.resize(2 * support + 4);
    m.cdf[0] = 0;
    int idx = 0;
    auto push = [&](uint32_t freq) { m.cdf[idx + 1] = m.cdf[idx] + freq; ++idx; };
    push(counts[support + 1]);                              // escape toward -inf
    for (int k = -support; k < 0; ++k) push(counts[-k]);    // k = -S..-1
    push(2 * counts[0]);                                    // k = 0
    for (int k = 1; k <= support; ++k) push(counts[k]);     // k = 1..S
    push(counts[support + 1]);                              // escape toward +inf
    assert(m.cdf.back() == kCdfTotal);
    return m;
}

ScaleTable::ScaleTable(double qp, int support, int levels) : qp_(qp) {
    require(levels >= 2, "need at least two scale levels");
    const double rmin = kSigmaMinFactor, rmax = kSigmaMaxFactor;
    log_min_ = std::log(rmin);
    log_step_ = (std::log(rmax) - log_min_) / (levels - 1);
    models_.reserve(levels);
    for (int i = 0; i < levels; ++i) {
        double ratio = std::exp(log_min_ + i * log_step_);
        models_.push_back(build_gaussian_cdf(ratio * qp, qp, support));
    }
}

int ScaleTable::level_of(double sigma) const {
    double ratio = std::clamp(sigma / qp_, kSigmaMinFactor, kSigmaMaxFactor);
    long i = std::lround((std::log(ratio) - log_min_) / log_step_);
    return static_cast<int>(std::clamp<long>(i, 0, static_cast<long>(models_.size()) - 1));
}

const GaussianCdfModel& ScaleTable::lookup(double sigma) const {
    return models_[level_of(sigma)];
}

// ---------------------------------------------------------------------------
// Context modeling
// ---------------------------------------------------------------------------

double predict_sigma(const CodingContext& ctx, bool use_prior, double w_prior, double qp) {
    double base = (ctx.causal_neighbor_mags[0] + ctx.causal_neighbor_mags[1] +
                   ctx.causal_neighbor_mags[2]) / 3.0;
    if (use_prior) base = (base + w_prior * ctx.prior_coeff_mag) / (1.0 + w_prior);
    return std::clamp(base, sigma_min_for(qp), sigma_max_for(qp));
}

// ---------------------------------------------------------------------------
// Symbol-sequence coding
// ---------------------------------------------------------------------------

namespace {

inline int bit_width_u64(uint64_t n) { return 64 - std::countl_zero(n); }

void encode_excess(RangeEncoder& enc, uint64_t excess) {
    uint64_t n = excess + 1;
    int nbits = bit_width_u64(n);
    for (int i = 0; i < nbits - 1; ++i) enc.encode_raw_bit(0);
    for (int i = nbits - 1; i >= 0; --i) enc.encode_raw_bit(static_cast<int>((n >> i) & 1));
}

uint64_t decode_excess(RangeDecoder& dec) {
    int zeros = 0;
    while (dec.decode_raw_bit() == 0) {
        ++zeros;
        require(zeros < 63, "malformed escape code");
    }
    uint64_t n = 1;
    for (int i = 0; i < zeros; ++i) n = (n << 1) | static_cast<uint64_t>(dec.decode_raw_bit());
    return n - 1;
}

inline double excess_bits(uint64_t excess) {
    return 2.0 * bit_width_u64(excess + 1) - 1.0;
}

}  // namespace

void encode_symbol(RangeEncoder& enc, int32_t value, const GaussianCdfModel& m) {
    const int S = m.support;
    if (value > S) {
        int idx = m.escape_pos_index();
        enc.encode(m.cum(idx), m.freq(idx));
        encode_excess(enc, static_cast<uint64_t>(static_cast<int64_t>(value) - S - 1));
    } else if (value < -S) {
        int idx = m.escape_neg_index();
        enc.encode(m.cum(idx), m.freq(idx));
        encode_excess(enc, static_cast<uint64_t>(-static_cast<int64_t>(value) - S - 1));
    } else {
        int idx = m.index_of(value);
        enc.encode(m.cum(idx), m.freq(idx));
    }
}

int32_t decode_symbol(RangeDecoder& dec, const GaussianCdfModel& m) {
    const int S = m.support;
    int idx = m.find(dec.decode_cum());
    dec.decode_update(m.cum(idx), m.freq(idx));
    if (idx == m.escape_pos_index()) {
        int64_t v = static_cast<int64_t>(S) + 1 + static_cast<int64_t>(decode_excess(dec));
        require(v <= INT32_MAX, "escape value out of range");
        return static_cast<int32_t>(v);
    }
    if (idx == m.escape_neg_index()) {
        int64_t v = -(static_cast<int64_t>(S) + 1 + static_cast<int64_t>(decode_excess(dec)));
        require(v >= INT32_MIN, "escape value out of range");
        return static_cast<int32_t>(v);
    }
    return static_cast<int32_t>(idx - S - 1);
}

double symbol_bits(int32_t value, const GaussianCdfModel& m) {
    const int S = m.support;
    const double log2_total = static_cast<double>(kCdfBits);
    if (value > S) {
        return log2_total - std::log2(static_cast<double>(m.freq(m.escape_pos_index()))) +
               excess_bits(static_cast<uint64_t>(static_cast<int64_t>(value) - S - 1));
    }
    if (value < -S) {
        return log2_total - std::log2(static_cast<double>(m.freq(m.escape_neg_index()))) +
               excess_bits(static_cast<uint64_t>(-static_cast<int64_t>(value) - S - 1));
    }
    return log2_total - std::log2(static_cast<double>(m.freq(m.index_of(value))));
}

std::vector<uint8_t> encode_symbols(const std::vector<int32_t>& symbols, const ModelFn& model) {
    RangeEncoder enc;
    for (size_t i = 0; i < symbols.size(); ++i)
        encode_symbol(enc, symbols[i], model(i, symbols.data()));
    return enc.finish();
}

std::vector<int32_t> decode_symbols(const std::vector<uint8_t>& bytes, size_t count,
                                    const ModelFn& model) {
    RangeDecoder dec(bytes);
    std::vector<int32_t> out;
    out.reserve(count);
    for (size_t i = 0; i < count; ++i)
        out.push_back(decode_symbol(dec, model(i, out.data())));
    return out;
}

double estimate_rate(const std::vector<int32_t>& symbols, const ModelFn& model) {
    double bits = 0.0;
    for (size_t i = 0; i < symbols.size(); ++i)
        bits += symbol_bits(symbols[i], model(i, symbols.data()));
    return bits;
}

}  // namespace stereodc

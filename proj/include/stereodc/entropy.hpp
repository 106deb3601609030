#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "stereodc/error.hpp"

namespace stereodc {

// ---------------------------------------------------------------------------
// Range coder
//
// 32-bit carry-propagating range coder over 16-bit integer frequency tables.
// Wire format (so alternate implementations can interoperate):
//   - encode(cum, freq): r = range >> 16; low += r * cum; range = r * freq.
//     A carry out of bit 31 of `low` increments the already-emitted bytes,
//     rippling backward through 0xFF.
//   - renormalization is big-endian: while range < 2^24, emit the top byte
//     of `low` (bits 31..24), then low <<= 8 (mod 2^32), range <<= 8.
//   - flush emits the remaining 4 state bytes of `low`, top byte first.
//   - the decoder seeds its 32-bit window with the first 4 stream bytes and
//     mirrors the arithmetic; reading past the end raises an underrun error.
// Every frequency must be >= 1 and total exactly 2^16.
// ---------------------------------------------------------------------------

constexpr int kCdfBits = 16;
constexpr uint32_t kCdfTotal = 1u << kCdfBits;

class RangeEncoder {
public:
    void encode(uint32_t cum, uint32_t freq);
    void encode_raw_bit(int bit);  // p = 1/2 passthrough
    std::vector<uint8_t> finish();

private:
    void propagate_carry();

    uint64_t low_ = 0;
    uint32_t range_ = 0xffffffffu;
    std::vector<uint8_t> out_;
    bool finished_ = false;
};

class RangeDecoder {
public:
    RangeDecoder(const uint8_t* data, size_t size);
    explicit RangeDecoder(const std::vector<uint8_t>& data)
        : RangeDecoder(data.data(), data.size()) {}

    // Cumulative-frequency slot of the next symbol, in [0, 2^16).
    uint32_t decode_cum();
    // Consume the symbol whose interval is [cum, cum+freq).
    void decode_update(uint32_t cum, uint32_t freq);
    int decode_raw_bit();

    size_t bytes_consumed() const { return pos_; }

private:
    uint8_t next_byte();

    const uint8_t* data_;
    size_t size_;
    size_t pos_ = 0;
    uint32_t low_ = 0;
    uint32_t range_ = 0xffffffffu;
    uint32_t code_ = 0;
};

// ---------------------------------------------------------------------------
// Discretized Gaussian model
// ---------------------------------------------------------------------------

constexpr int kDefaultSupport = 255;   // symbols in [-S, S] plus 2 escape tails
constexpr double kSigmaMinFactor = 0.11;  // sigma_min = 0.11 * qp
constexpr double kSigmaMaxFactor = 64.0;  // sigma_max = 64 * qp

inline double sigma_min_for(double qp) { return kSigmaMinFactor * qp; }
inline double sigma_max_for(double qp) { return kSigmaMaxFactor * qp; }

// Mass of the quantization bin [k-1/2, k+1/2] under a zero-mean Gaussian
// with the given sigma, in units of the step qp (the pre-flooring ideal).
double gaussian_bin_mass(int k, double sigma, double qp);

// Integer CDF over symbol indices 0..2S+2:
//   index 0        escape toward -inf
//   index 1..2S+1  values k = -S..S
//   index 2S+2     escape toward +inf
// Strictly increasing, total exactly 2^16, exactly symmetric in k.
struct GaussianCdfModel {
    int support = 0;
    double sigma = 0.0;
    double qp = 0.0;
    std::vector<uint32_t> cdf;  // size = num_symbols + 1; cdf[0] = 0

    int num_symbols() const { return 2 * support + 3; }
    int index_of(int32_t k) const { return static_cast<int>(k) + support + 1; }
    int escape_neg_index() const { return 0; }
    int escape_pos_index() const { return num_symbols() - 1; }

    uint32_t cum(int index) const { return cdf[index]; }
    uint32_t freq(int index) const { return cdf[index + 1] - cdf[index]; }

    // Symbol index owning cumulative slot `c` (binary search).
    int find(uint32_t c) const;
};

GaussianCdfModel build_gaussian_cdf(double sigma, double qp, int support);

// Cache of models at log-spaced sigma/qp ratios so per-symbol model lookup
// is O(1). Encoder and decoder quantize sigma identically.
class ScaleTable {
public:
    explicit ScaleTable(double qp, int support = kDefaultSupport, int levels = 64);

    const GaussianCdfModel& lookup(double sigma) const;
    int level_of(double sigma) const;
    const GaussianCdfModel& level(int i) const { return models_[i]; }
    int levels() const { return static_cast<int>(models_.size()); }
    double qp() const { return qp_; }

private:
    double qp_;
    double log_min_, log_step_;
    std::vector<GaussianCdfModel> models_;
};

// ---------------------------------------------------------------------------
// Context modeling
// ---------------------------------------------------------------------------

enum class BandClass : uint8_t { DC = 0, Low = 1, High = 2 };

inline BandClass classify_band(int zigzag_index) {
    if (zigzag_index == 0) return BandClass::DC;
    return zigzag_index <= 15 ? BandClass::Low : BandClass::High;
}

struct CodingContext {
    BandClass band_class = BandClass::DC;
    // Dequantized magnitudes of left / above / above-left same-band
    // neighbors; out-of-image neighbors contribute 0.
    std::array<double, 3> causal_neighbor_mags{0.0, 0.0, 0.0};
    double prior_coeff_mag = 0.0;
};

// Scale prediction from causal plus (optionally) cross-view evidence.
// Computable on the decoder from decoded data only.
double predict_sigma(const CodingContext& ctx, bool use_prior, double w_prior, double qp);

// ---------------------------------------------------------------------------
// Symbol-sequence coding
// ---------------------------------------------------------------------------

// Supplies the model for symbol i given the already-coded prefix
// (symbols 0..i-1). The decoder hands its own decoded prefix to the same
// function, so any state derived from it is automatically in sync.
using ModelFn = std::function<const GaussianCdfModel&(size_t, const int32_t* prefix)>;

// Values with |v| <= support are coded directly; larger values emit the
// escape tail followed by the excess |v| - (support+1) in order-0
// Exp-Golomb raw bits.
std::vector<uint8_t> encode_symbols(const std::vector<int32_t>& symbols, const ModelFn& model);
std::vector<int32_t> decode_symbols(const std::vector<uint8_t>& bytes, size_t count,
                                    const ModelFn& model);

// Cross entropy of the sequence under the models, in bits, including
// escape-path costs. Matches what the range coder realizes up to coder
// overhead.
double estimate_rate(const std::vector<int32_t>& symbols, const ModelFn& model);

// Single-symbol primitives used by the codec's interleaved streams.
void encode_symbol(RangeEncoder& enc, int32_t value, const GaussianCdfModel& m);
int32_t decode_symbol(RangeDecoder& dec, const GaussianCdfModel& m);
double symbol_bits(int32_t value, const GaussianCdfModel& m);

}  // namespace stereodc

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stereodc/bench.hpp"
#include "stereodc/codec.hpp"

using namespace stereodc;

namespace {

int env_jobs() {
    const char* v = std::getenv("STEREODC_JOBS");
    if (!v) return 1;
    int n = std::atoi(v);
    return n >= 1 ? n : 1;
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        size_t used = 0;
        double v = std::stod(tok, &used);
        require(used == tok.size(), "bad number in list: " + tok);
        out.push_back(v);
    }
    require(!out.empty(), "empty list");
    return out;
}

// Accepts rd_curve.csv or any CSV with bpp and psnr columns.
RDCurve load_curve(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), "cannot open curve file: " + path);
    std::string line;
    require(static_cast<bool>(std::getline(f, line)), "empty curve file: " + path);
    std::vector<std::string> cols;
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
    }
    int bpp_col = -1, psnr_col = -1;
    for (size_t i = 0; i < cols.size(); ++i) {
        if (cols[i] == "bpp") bpp_col = static_cast<int>(i);
        if (cols[i] == "psnr") psnr_col = static_cast<int>(i);
    }
    require(bpp_col >= 0 && psnr_col >= 0, path + ": need 'bpp' and 'psnr' columns");
    RDCurve curve;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> fields;
        while (std::getline(ss, tok, ',')) fields.push_back(tok);
        require(static_cast<int>(fields.size()) > std::max(bpp_col, psnr_col),
                path + ": short row");
        curve.points.push_back({std::stod(fields[bpp_col]), std::stod(fields[psnr_col])});
    }
    std::sort(curve.points.begin(), curve.points.end(),
              [](const RDPoint& a, const RDPoint& b) { return a.bpp < b.bpp; });
    // adjacent lambdas can land on the same operating point; keep one
    curve.points.erase(std::unique(curve.points.begin(), curve.points.end(),
                                   [](const RDPoint& a, const RDPoint& b) {
                                       return a.bpp == b.bpp;
                                   }),
                       curve.points.end());
    return curve;
}

struct CodecFlags {
    int max_disp = 64;
    int block_radius = 2;
    bool no_disparity = false, no_prior = false, no_align = false, no_prn = false;
    float w_prior = 0.5f;

    void attach(CLI::App* cmd) {
        cmd->add_option("--max-disp", max_disp, "disparity search range in pixels")
            ->check(CLI::Range(1, 16383));
        cmd->add_option("--block-radius", block_radius, "SAD window radius");
        cmd->add_flag("--no-disparity", no_disparity,
                      "code the views independently (ablation case 1)");
        cmd->add_flag("--no-prior", no_prior, "disable cross-view priors (case 2)");
        cmd->add_flag("--no-align", no_align, "use unwarped priors (case 3)");
        cmd->add_flag("--no-prn", no_prn, "skip prior refinement (case 4)");
        cmd->add_option("--w-prior", w_prior, "cross-view prior weight");
    }

    CodecConfig config() const {
        CodecConfig cfg = CodecConfig::full();
        cfg.match.max_disparity = max_disp;
        cfg.match.block_radius = block_radius;
        cfg.w_prior = w_prior;
        // disabling a stage disables everything that depends on it
        if (no_prn) cfg.use_prn = false;
        if (no_align) cfg.align_prior = cfg.use_prn = false;
        if (no_prior) cfg.use_prior = cfg.align_prior = cfg.use_prn = false;
        if (no_disparity)
            cfg.use_disparity = cfg.use_prior = cfg.align_prior = cfg.use_prn = false;
        return cfg;
    }
};

int run(int argc, char** argv) {
    CLI::App app{"stereodc: disparity-compensated stereo image codec"};
    app.require_subcommand(1);

    // encode
    auto* enc = app.add_subcommand("encode", "encode a stereo pair into a .dsc stream");
    std::string enc_left, enc_right, enc_out;
    enc->add_option("left", enc_left, "left image (pgm/ppm)")->required();
    enc->add_option("right", enc_right, "right image (pgm/ppm)")->required();
    enc->add_option("out", enc_out, "output bitstream")->required();
    double enc_qp_r = 16.0, enc_qp_l = 16.0, enc_lambda = -1.0;
    std::string enc_grid = "8,16,32,64,128", enc_dump_disp;
    enc->add_option("--qp-r", enc_qp_r, "right-view quantization step");
    enc->add_option("--qp-l", enc_qp_l, "left-residual quantization step");
    enc->add_option("--lambda", enc_lambda,
                    "rate-distortion tradeoff; runs a search over --qp-grid");
    enc->add_option("--qp-grid", enc_grid, "comma-separated steps for --lambda search");
    enc->add_option("--dump-disparity", enc_dump_disp, "write the DMAP debug dump here");
    CodecFlags enc_flags;
    enc_flags.attach(enc);

    // decode
    auto* dec = app.add_subcommand("decode", "decode a .dsc stream");
    std::string dec_in, dec_left, dec_right;
    dec->add_option("in", dec_in, "input bitstream")->required();
    dec->add_option("left", dec_left, "output left image")->required();
    dec->add_option("right", dec_right, "output right image")->required();

    // psnr / msssim
    auto* psnr_cmd = app.add_subcommand("psnr", "PSNR between two images");
    std::string m_a, m_b;
    psnr_cmd->add_option("a", m_a)->required();
    psnr_cmd->add_option("b", m_b)->required();
    auto* ssim_cmd = app.add_subcommand("msssim", "MS-SSIM between two images");
    std::string s_a, s_b;
    ssim_cmd->add_option("a", s_a)->required();
    ssim_cmd->add_option("b", s_b)->required();

    // bd
    auto* bd_cmd = app.add_subcommand("bd", "Bjontegaard deltas between two RD curves");
    std::string bd_anchor, bd_test;
    bd_cmd->add_option("anchor", bd_anchor, "anchor curve CSV")->required();
    bd_cmd->add_option("test", bd_test, "test curve CSV")->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "RD sweep over a directory of stereo pairs");
    std::string sw_dir, sw_out = "bench_out";
    std::string sw_lambdas = "0.001,0.002,0.005,0.01,0.02";
    std::string sw_grid = "8,16,32,64,128";
    bool sw_ablation = false, sw_dump = false;
    int sw_jobs = env_jobs();
    sweep->add_option("dir", sw_dir, "directory with *_left/*_right pgm/ppm pairs")
        ->required();
    sweep->add_option("--lambdas", sw_lambdas, "comma-separated lambda values");
    sweep->add_option("--qp-grid", sw_grid, "comma-separated quantization steps");
    sweep->add_option("--out", sw_out, "output directory for CSV reports");
    sweep->add_flag("--ablation", sw_ablation, "also sweep ablation cases 1-4");
    sweep->add_flag("--dump-streams", sw_dump, "write every bitstream under --out");
    sweep->add_option("--jobs", sw_jobs, "worker threads (default $STEREODC_JOBS or 1)");
    CodecFlags sw_flags;
    sw_flags.attach(sweep);

    app.failure_message([](const CLI::App*, const CLI::Error& e) {
        return std::string("error: ") + e.what() + "\n";
    });
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // 0 for --help, 1 for usage errors
    }

    if (*enc) {
        PlanarImage left = read_image(enc_left);
        PlanarImage right = read_image(enc_right);
        CodecConfig cfg = enc_flags.config();
        EncodeResult res;
        if (enc_lambda >= 0.0) {
            RDSearchResult rs = rd_search(left, right, enc_lambda, parse_list(enc_grid), cfg);
            cfg = rs.config;
            res = std::move(rs.result);
        } else {
            cfg.qp_r = static_cast<float>(enc_qp_r);
            cfg.qp_l = static_cast<float>(enc_qp_l);
            res = encode_pair_full(left, right, cfg);
        }
        write_file(enc_out, res.bitstream.serialize());
        if (!enc_dump_disp.empty())
            dump_disparity(estimate_disparity(left, right, cfg.match), enc_dump_disp);
        double px = static_cast<double>(left.width) * left.height;
        double bpp = 8.0 * res.bitstream.total_bytes() / (2.0 * px);
        std::printf("qp_r %s qp_l %s\n", format_number(cfg.qp_r).c_str(),
                    format_number(cfg.qp_l).c_str());
        std::printf("bpp %s psnr %s psnr_l %s psnr_r %s\n", format_number(bpp).c_str(),
                    format_number(0.5 * (psnr(left, res.recon_left) +
                                         psnr(right, res.recon_right))).c_str(),
                    format_number(psnr(left, res.recon_left)).c_str(),
                    format_number(psnr(right, res.recon_right)).c_str());
        return 0;
    }
    if (*dec) {
        Bitstream bs = Bitstream::parse(read_file(dec_in));
        DecodedPair pair = decode_pair(bs);
        write_image(pair.left, dec_left);
        write_image(pair.right, dec_right);
        std::printf("decoded %dx%d %s\n", bs.width, bs.height, bs.color ? "color" : "gray");
        return 0;
    }
    if (*psnr_cmd) {
        std::printf("%s\n", format_number(psnr(read_image(m_a), read_image(m_b))).c_str());
        return 0;
    }
    if (*ssim_cmd) {
        int scales = 0;
        double score = ms_ssim(read_image(s_a), read_image(s_b), &scales);
        std::printf("%s\n", format_number(score).c_str());
        if (scales < 5)
            std::fprintf(stderr, "note: %d scales used (small image)\n", scales);
        return 0;
    }
    if (*bd_cmd) {
        BDResult r = bd_metrics(load_curve(bd_anchor), load_curve(bd_test));
        std::printf("bd_rate %s bd_psnr %s\n", format_number(r.bd_rate).c_str(),
                    format_number(r.bd_psnr).c_str());
        return 0;
    }
    if (*sweep) {
        SweepOptions opts;
        opts.lambdas = parse_list(sw_lambdas);
        opts.qp_grid = parse_list(sw_grid);
        opts.base = sw_flags.config();
        opts.ablation = sw_ablation;
        opts.jobs = sw_jobs;
        opts.out_dir = sw_out;
        opts.dump_streams = sw_dump;
        auto pairs = find_stereo_pairs(sw_dir);
        require(!pairs.empty(), "no stereo pairs found in " + sw_dir);
        std::fprintf(stderr, "sweeping %zu pairs, %zu lambdas%s, %d jobs\n", pairs.size(),
                     opts.lambdas.size(), sw_ablation ? ", ablation" : "", opts.jobs);
        SweepResult r = rd_sweep(pairs, opts);
        if (r.pairs_skipped)
            std::fprintf(stderr, "skipped %d unreadable pairs\n", r.pairs_skipped);
        for (const SweepPoint& p : r.points)
            std::printf("lambda %s bpp %s psnr %s msssim %s\n",
                        format_number(p.lambda).c_str(), format_number(p.bpp).c_str(),
                        format_number(p.psnr).c_str(), format_number(p.msssim).c_str());
        std::fprintf(stderr, "reports written to %s\n", sw_out.c_str());
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stereodc/bench.hpp"
#include "stereodc/codec.hpp"

namespace py = pybind11;
using namespace stereodc;

namespace {

// Arrays are (h, w) uint8 for gray and (h, w, 3) uint8 for color.
PlanarImage image_from_array(const py::array& arr) {
    py::array_t<uint8_t, py::array::c_style | py::array::forcecast> a(arr);
    require(a.ndim() == 2 || (a.ndim() == 3 && a.shape(2) == 3),
            "expected a (h, w) or (h, w, 3) uint8 array");
    int h = static_cast<int>(a.shape(0));
    int w = static_cast<int>(a.shape(1));
    int ch = a.ndim() == 2 ? 1 : 3;
    PlanarImage img(w, h, ch);
    const uint8_t* p = a.data();
    size_t n = img.plane_size();
    if (ch == 1) {
        std::copy(p, p + n, img.samples.begin());
    } else {
        for (size_t i = 0; i < n; ++i)
            for (int c = 0; c < 3; ++c) img.samples[c * n + i] = p[3 * i + c];
    }
    return img;
}

py::array array_from_image(const PlanarImage& img) {
    size_t n = img.plane_size();
    if (img.channels == 1) {
        py::array_t<uint8_t> out({img.height, img.width});
        std::copy(img.samples.begin(), img.samples.end(), out.mutable_data());
        return out;
    }
    py::array_t<uint8_t> out({img.height, img.width, 3});
    uint8_t* p = out.mutable_data();
    for (size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) p[3 * i + c] = img.samples[c * n + i];
    return out;
}

CodecConfig config_from_kwargs(float qp_r, float qp_l, int max_disparity, int block_radius,
                               bool use_disparity, bool use_prior, bool align_prior,
                               bool use_prn, float w_prior) {
    CodecConfig cfg;
    cfg.qp_r = qp_r;
    cfg.qp_l = qp_l;
    cfg.match.max_disparity = max_disparity;
    cfg.match.block_radius = block_radius;
    cfg.use_disparity = use_disparity;
    cfg.use_prior = use_prior && use_disparity;
    cfg.align_prior = align_prior && cfg.use_prior;
    cfg.use_prn = use_prn && cfg.align_prior;
    cfg.w_prior = w_prior;
    return cfg;
}

RDCurve curve_from_list(const std::vector<std::pair<double, double>>& pts) {
    RDCurve c;
    for (auto [bpp, ps] : pts) c.points.push_back({bpp, ps});
    return c;
}

}  // namespace

PYBIND11_MODULE(_stereodc, m) {
    m.doc() = "Disparity-compensated stereo image codec";

    py::register_exception<Error>(m, "CodecError");

    m.def("read_image",
          [](const std::string& path) { return array_from_image(read_image(path)); },
          py::arg("path"), "Read a binary PGM/PPM file into a uint8 array.");

    m.def("write_image",
          [](const py::array& img, const std::string& path) {
              write_image(image_from_array(img), path);
          },
          py::arg("image"), py::arg("path"), "Write a uint8 array as binary PGM/PPM.");

    m.def(
        "encode_pair",
        [](const py::array& left, const py::array& right, float qp_r, float qp_l,
           int max_disparity, int block_radius, bool use_disparity, bool use_prior,
           bool align_prior, bool use_prn, float w_prior) {
            CodecConfig cfg =
                config_from_kwargs(qp_r, qp_l, max_disparity, block_radius, use_disparity,
                                   use_prior, align_prior, use_prn, w_prior);
            EncodeResult res =
                encode_pair_full(image_from_array(left), image_from_array(right), cfg);
            std::vector<uint8_t> bytes = res.bitstream.serialize();
            py::dict stats;
            double px = static_cast<double>(res.recon_left.width) * res.recon_left.height;
            stats["bpp"] = 8.0 * bytes.size() / (2.0 * px);
            stats["bpp_right"] = 8.0 * res.bitstream.right.size() / px;
            stats["bpp_left"] = 8.0 * res.bitstream.left.size() / px;
            stats["bpp_disparity"] = 8.0 * res.bitstream.disp.size() / px;
            stats["recon_left"] = array_from_image(res.recon_left);
            stats["recon_right"] = array_from_image(res.recon_right);
            return py::make_tuple(py::bytes(reinterpret_cast<const char*>(bytes.data()),
                                            bytes.size()),
                                  stats);
        },
        py::arg("left"), py::arg("right"), py::arg("qp_r") = 16.0f, py::arg("qp_l") = 16.0f,
        py::arg("max_disparity") = 64, py::arg("block_radius") = 2,
        py::arg("use_disparity") = true, py::arg("use_prior") = true,
        py::arg("align_prior") = true, py::arg("use_prn") = true, py::arg("w_prior") = 0.5f,
        "Encode a stereo pair; returns (bitstream bytes, stats dict).");

    m.def(
        "decode_pair",
        [](const py::bytes& data) {
            std::string s = data;
            std::vector<uint8_t> bytes(s.begin(), s.end());
            DecodedPair pair = decode_pair(Bitstream::parse(bytes));
            return py::make_tuple(array_from_image(pair.left), array_from_image(pair.right));
        },
        py::arg("bitstream"), "Decode a bitstream; returns (left, right) arrays.");

    m.def(
        "estimate_disparity",
        [](const py::array& left, const py::array& right, int max_disparity,
           int block_radius) {
            MatchParams p;
            p.max_disparity = max_disparity;
            p.block_radius = block_radius;
            DisparityMap d =
                estimate_disparity(image_from_array(left), image_from_array(right), p);
            py::array_t<int32_t> out({d.height, d.width});
            std::copy(d.values.begin(), d.values.end(), out.mutable_data());
            return out;
        },
        py::arg("left"), py::arg("right"), py::arg("max_disparity") = 64,
        py::arg("block_radius") = 2,
        "Quarter-pel disparity map aligned with the left view (int32, units of 1/4 px).");

    m.def(
        "psnr",
        [](const py::array& a, const py::array& b) {
            return psnr(image_from_array(a), image_from_array(b));
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "ms_ssim",
        [](const py::array& a, const py::array& b) {
            return ms_ssim(image_from_array(a), image_from_array(b));
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "bd_metrics",
        [](const std::vector<std::pair<double, double>>& anchor,
           const std::vector<std::pair<double, double>>& test) {
            BDResult r = bd_metrics(curve_from_list(anchor), curve_from_list(test));
            return py::make_tuple(r.bd_rate, r.bd_psnr);
        },
        py::arg("anchor"), py::arg("test"),
        "Bjontegaard deltas between two [(bpp, psnr), ...] curves; "
        "returns (bd_rate %, bd_psnr dB).");

    m.attr("__version__") = "0.1.0";
}

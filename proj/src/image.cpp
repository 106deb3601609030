#include "stereodc/image.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace stereodc {

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), "cannot open file: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    require(!f.bad(), "read failure: " + path);
    return bytes;
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    require(f.good(), "cannot open file for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    f.flush();
    require(f.good(), "write failure: " + path);
}

namespace {

[[noreturn]] void parse_fail(const std::string& origin, size_t offset, const std::string& what) {
    fail(origin + ": " + what + " at byte offset " + std::to_string(offset));
}

// Next whitespace-delimited token; '#' starts a comment to end of line.
std::string next_token(const std::vector<uint8_t>& b, size_t& pos,
                       const std::string& origin) {
    while (pos < b.size()) {
        uint8_t c = b[pos];
        if (c == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else if (std::isspace(c)) {
            ++pos;
        } else {
            break;
        }
    }
    if (pos >= b.size()) parse_fail(origin, pos, "unexpected end of header");
    size_t start = pos;
    while (pos < b.size() && !std::isspace(b[pos]) && b[pos] != '#') ++pos;
    return std::string(b.begin() + start, b.begin() + pos);
}

int parse_dim(const std::string& tok, const std::vector<uint8_t>& b, size_t pos,
              const std::string& origin, const char* name) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        parse_fail(origin, pos - tok.size(), std::string("malformed ") + name);
    long v = std::strtol(tok.c_str(), nullptr, 10);
    if (v <= 0 || v > 65535)
        parse_fail(origin, pos - tok.size(), std::string(name) + " out of range [1,65535]");
    return static_cast<int>(v);
}

}  // namespace

PlanarImage parse_pnm(const std::vector<uint8_t>& bytes, const std::string& origin) {
    size_t pos = 0;
    std::string magic = next_token(bytes, pos, origin);
    int channels;
    if (magic == "P5") {
        channels = 1;
    } else if (magic == "P6") {
        channels = 3;
    } else {
        parse_fail(origin, 0, "unsupported magic '" + magic + "' (want P5 or P6)");
    }
    int w = parse_dim(next_token(bytes, pos, origin), bytes, pos, origin, "width");
    int h = parse_dim(next_token(bytes, pos, origin), bytes, pos, origin, "height");
    std::string maxval = next_token(bytes, pos, origin);
    if (maxval != "255")
        parse_fail(origin, pos - maxval.size(), "unsupported maxval " + maxval + " (want 255)");
    // Exactly one whitespace byte separates the header from the payload.
    if (pos >= bytes.size() || !std::isspace(bytes[pos]))
        parse_fail(origin, pos, "missing whitespace after maxval");
    ++pos;

    size_t need = static_cast<size_t>(w) * h * channels;
    if (bytes.size() - pos < need)
        parse_fail(origin, bytes.size(),
                   "truncated payload (have " + std::to_string(bytes.size() - pos) +
                       " bytes, need " + std::to_string(need) + ")");

    PlanarImage img(w, h, channels);
    if (channels == 1) {
        std::copy(bytes.begin() + pos, bytes.begin() + pos + need, img.samples.begin());
    } else {
        // Interleaved RGB on disk, plane-major in memory.
        const uint8_t* p = bytes.data() + pos;
        size_t n = img.plane_size();
        for (size_t i = 0; i < n; ++i) {
            img.samples[i] = p[3 * i];
            img.samples[n + i] = p[3 * i + 1];
            img.samples[2 * n + i] = p[3 * i + 2];
        }
    }
    return img;
}

PlanarImage read_image(const std::string& path) {
    return parse_pnm(read_file(path), path);
}

std::vector<uint8_t> serialize_pnm(const PlanarImage& img) {
    char header[64];
    int n = std::snprintf(header, sizeof(header), "%s\n%d %d\n255\n",
                          img.channels == 1 ? "P5" : "P6", img.width, img.height);
    std::vector<uint8_t> out(header, header + n);
    size_t plane = img.plane_size();
    if (img.channels == 1) {
        out.insert(out.end(), img.samples.begin(), img.samples.end());
    } else {
        out.reserve(out.size() + 3 * plane);
        for (size_t i = 0; i < plane; ++i) {
            out.push_back(img.samples[i]);
            out.push_back(img.samples[plane + i]);
            out.push_back(img.samples[2 * plane + i]);
        }
    }
    return out;
}

void write_image(const PlanarImage& img, const std::string& path) {
    write_file(path, serialize_pnm(img));
}

FloatPlane to_luma(const PlanarImage& img) {
    FloatPlane out(img.width, img.height);
    size_t n = img.plane_size();
    if (img.channels == 1) {
        for (size_t i = 0; i < n; ++i) out.values[i] = img.samples[i];
    } else {
        for (size_t i = 0; i < n; ++i) {
            out.values[i] = 0.299 * img.samples[i] + 0.587 * img.samples[n + i] +
                            0.114 * img.samples[2 * n + i];
        }
    }
    return out;
}

FloatPlane channel_plane(const PlanarImage& img, int c) {
    require(c >= 0 && c < img.channels, "channel index out of range");
    FloatPlane out(img.width, img.height);
    const uint8_t* p = img.samples.data() + c * img.plane_size();
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] = p[i];
    return out;
}

PlanarImage planes_to_image(const std::vector<FloatPlane>& planes) {
    require(planes.size() == 1 || planes.size() == 3, "need 1 or 3 planes");
    int w = planes[0].width, h = planes[0].height;
    PlanarImage img(w, h, static_cast<int>(planes.size()));
    for (size_t c = 0; c < planes.size(); ++c) {
        require(planes[c].width == w && planes[c].height == h, "plane size mismatch");
        uint8_t* p = img.samples.data() + c * img.plane_size();
        for (size_t i = 0; i < img.plane_size(); ++i) {
            double v = std::round(planes[c].values[i]);
            p[i] = static_cast<uint8_t>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
        }
    }
    return img;
}

}  // namespace stereodc

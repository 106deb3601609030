#include "doctest.h"
#include "stereodc/image.hpp"
#include "testutil.hpp"

using namespace stereodc;

namespace {
std::vector<uint8_t> bytes_of(const char* s) {
    return std::vector<uint8_t>(s, s + std::char_traits<char>::length(s));
}
}  // namespace

TEST_CASE("parse minimal P5") {
    auto b = bytes_of("P5 2 1 255\n");
    b.push_back(0);
    b.push_back(255);
    PlanarImage img = parse_pnm(b, "test");
    CHECK(img.width == 2);
    CHECK(img.height == 1);
    CHECK(img.channels == 1);
    CHECK(img.at(0, 0, 0) == 0);
    CHECK(img.at(0, 1, 0) == 255);
}

TEST_CASE("parse minimal P6") {
    auto b = bytes_of("P6 2 1 255\n");
    uint8_t px[] = {255, 0, 0, 0, 0, 255};
    b.insert(b.end(), px, px + 6);
    PlanarImage img = parse_pnm(b, "test");
    CHECK(img.channels == 3);
    CHECK(img.at(0, 0, 0) == 255);
    CHECK(img.at(1, 0, 0) == 0);
    CHECK(img.at(2, 0, 0) == 0);
    CHECK(img.at(0, 1, 0) == 0);
    CHECK(img.at(2, 1, 0) == 255);
}

TEST_CASE("maxval other than 255 is rejected with an offset") {
    auto b = bytes_of("P5 2 1 65535\n\x00\x00\x00\x00");
    CHECK_THROWS_WITH_AS(parse_pnm(b, "test"),
                         doctest::Contains("unsupported maxval"), Error);
    try {
        parse_pnm(b, "test");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
    }
}

TEST_CASE("malformed header and truncated payload") {
    CHECK_THROWS_AS(parse_pnm(bytes_of("P4 2 1 255\n"), "t"), Error);
    CHECK_THROWS_WITH_AS(parse_pnm(bytes_of("P5 2 x 255\n"), "t"),
                         doctest::Contains("malformed height"), Error);
    auto b = bytes_of("P5 4 4 255\n");
    b.push_back(1);  // needs 16 bytes
    CHECK_THROWS_WITH_AS(parse_pnm(b, "t"), doctest::Contains("truncated"), Error);
    CHECK_THROWS_AS(parse_pnm(bytes_of("P5 0 1 255\n"), "t"), Error);
}

TEST_CASE("writer emits the exact bytes for 1x1 gray 128") {
    PlanarImage img(1, 1, 1, 128);
    auto bytes = serialize_pnm(img);
    auto expect = bytes_of("P5\n1 1\n255\n");
    expect.push_back(0x80);
    CHECK(bytes == expect);
}

TEST_CASE("read/write round trips bit-exactly") {
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        for (int ch : {1, 3}) {
            PlanarImage img = testutil::random_image(13, 7, ch, seed);
            PlanarImage back = parse_pnm(serialize_pnm(img), "mem");
            CHECK(back == img);
            // write o read is the identity on canonically written files
            CHECK(serialize_pnm(back) == serialize_pnm(img));
        }
    }
}

TEST_CASE("file io round trip") {
    PlanarImage img = testutil::random_image(5, 4, 3, 42);
    write_image(img, "test_tmp_image.ppm");
    CHECK(read_image("test_tmp_image.ppm") == img);
    std::remove("test_tmp_image.ppm");
    CHECK_THROWS_AS(read_image("does_not_exist.pgm"), Error);
}

TEST_CASE("to_luma") {
    PlanarImage gray(1, 1, 1, 42);
    CHECK(to_luma(gray).at(0, 0) == doctest::Approx(42.0));

    PlanarImage white(1, 1, 3, 255);
    CHECK(to_luma(white).at(0, 0) == doctest::Approx(255.0));

    PlanarImage red(1, 1, 3, 0);
    red.at(0, 0, 0) = 255;
    CHECK(to_luma(red).at(0, 0) == doctest::Approx(76.245).epsilon(1e-9));
}

TEST_CASE("to_luma stays within [0,255]") {
    for (uint64_t seed : {7ull, 8ull}) {
        PlanarImage img = testutil::random_image(17, 9, 3, seed);
        FloatPlane luma = to_luma(img);
        for (double v : luma.values) {
            CHECK(v >= 0.0);
            CHECK(v <= 255.0);
        }
    }
}

TEST_CASE("channel_plane and planes_to_image round trip") {
    PlanarImage img = testutil::random_image(9, 6, 3, 99);
    std::vector<FloatPlane> planes;
    for (int c = 0; c < 3; ++c) planes.push_back(channel_plane(img, c));
    CHECK(planes_to_image(planes) == img);
}

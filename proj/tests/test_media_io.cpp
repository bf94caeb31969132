#include <cstring>
#include <fstream>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <random>
#include <vector>

#include "doctest.h"
#include "flowpull/media_io.hpp"
#include "support.hpp"

using namespace flowpull;
using testing::TempDir;

namespace {

std::vector<std::uint8_t> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void put_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

// Dilation by brute force over every source pixel.
Mask dilate_oracle(const Mask& m, int r) {
  Mask out(m.width(), m.height(), 0);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      if (!m(x, y)) continue;
      for (int v = 0; v < m.height(); ++v)
        for (int u = 0; u < m.width(); ++u)
          if ((u - x) * (u - x) + (v - y) * (v - y) <= r * r) out(u, v) = 1;
    }
  return out;
}

}  // namespace

TEST_SUITE("media_io") {
  TEST_CASE("2x2 constant flow encodes to the expected little-endian bytes") {
    const FlowField f = FlowField::constant(2, 2, 1.0f, -0.5f);
    const auto bytes = encode_flow(f);
    // "PIEH", width 2, height 2, then (1.0, -0.5) four times.
    std::vector<std::uint8_t> expected{'P', 'I', 'E', 'H', 2, 0, 0, 0, 2, 0, 0, 0};
    for (int i = 0; i < 4; ++i) {
      for (std::uint8_t b : {0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xbf}) expected.push_back(b);
    }
    CHECK(bytes.size() == 44);
    CHECK(bytes == expected);
  }

  TEST_CASE("zero 4x3 flow file has 108 bytes") {
    TempDir dir("flo");
    write_flow(FlowField(4, 3), dir.path() / "z.flo");
    CHECK(std::filesystem::file_size(dir.path() / "z.flo") == 12 + 96);
  }

  TEST_CASE("invalid pixel is written as the sentinel and read back invalid") {
    FlowField f = FlowField::constant(3, 2, 0.25f, 0.5f);
    f.valid(1, 1) = 0;
    const auto bytes = encode_flow(f);
    const std::size_t at = 12 + 8 * (1 * 3 + 1);
    float u, v;
    std::memcpy(&u, &bytes[at], 4);
    std::memcpy(&v, &bytes[at + 4], 4);
    CHECK(u >= 1e9f);
    CHECK(v >= 1e9f);
    const FlowField back = decode_flow(bytes);
    CHECK(back.valid(1, 1) == 0);
    CHECK(count_set(back.valid) == 5);
    CHECK(back.dx(0, 0) == 0.25f);
  }

  TEST_CASE("non-finite values are marked invalid, not fatal") {
    FlowField f = FlowField::constant(2, 1, 1.0f, 1.0f);
    auto bytes = encode_flow(f);
    const float nan = std::nanf("");
    std::memcpy(&bytes[12], &nan, 4);
    const FlowField back = decode_flow(bytes);
    CHECK(back.valid(0, 0) == 0);
    CHECK(back.valid(1, 0) == 1);
  }

  TEST_CASE("bad magic and truncated payload are rejected") {
    TempDir dir("flo");
    auto bytes = encode_flow(FlowField(2, 2));
    auto bad = bytes;
    std::memset(bad.data(), 0, 4);  // magic 0.0
    put_bytes(dir.path() / "bad.flo", bad);
    CHECK_THROWS_WITH_AS(read_flow(dir.path() / "bad.flo"), doctest::Contains("bad magic"),
                         Error);
    bytes.pop_back();
    put_bytes(dir.path() / "short.flo", bytes);
    CHECK_THROWS_WITH_AS(read_flow(dir.path() / "short.flo"), doctest::Contains("short.flo"),
                         Error);
    CHECK_THROWS_AS(decode_flow(std::vector<std::uint8_t>{1, 2, 3}), Error);
    CHECK_THROWS_AS(read_flow(dir.path() / "absent.flo"), Error);
  }

  TEST_CASE("random finite flows round-trip bit-exactly") {
    TempDir dir("flo");
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> dim(1, 17);
    std::uniform_real_distribution<float> val(-300.0f, 300.0f);
    for (int k = 0; k < 50; ++k) {
      FlowField f(dim(rng), dim(rng));
      for (float& x : f.vectors.data()) x = val(rng);
      const auto path = dir.path() / "r.flo";
      write_flow(f, path);
      const FlowField back = read_flow(path);
      CHECK(back == f);
      CHECK(file_bytes(path) == encode_flow(f));
    }
  }

  TEST_CASE("8-bit codes scale by 255") {
    TempDir dir("png");
    cv::Mat raw(1, 3, CV_8UC3);
    raw.at<cv::Vec3b>(0, 0) = {255, 255, 255};
    raw.at<cv::Vec3b>(0, 1) = {0, 128, 0};
    raw.at<cv::Vec3b>(0, 2) = {3, 2, 1};  // BGR
    cv::imwrite((dir.path() / "a.png").string(), raw);
    const Image img = read_frame(dir.path() / "a.png");
    CHECK(img(0, 0, 0) == 1.0f);
    CHECK(img(1, 0, 1) == static_cast<float>(128.0 / 255.0));
    CHECK(img(2, 0, 0) == static_cast<float>(1.0 / 255.0));
    CHECK(img(2, 0, 2) == static_cast<float>(3.0 / 255.0));
  }

  TEST_CASE("16-bit codes scale by 65535") {
    TempDir dir("png");
    cv::Mat raw(1, 1, CV_16UC3);
    raw.at<cv::Vec3w>(0, 0) = {65535, 32768, 0};
    cv::imwrite((dir.path() / "b.png").string(), raw);
    const Image img = read_frame(dir.path() / "b.png");
    CHECK(img(0, 0, 0) == 0.0f);
    CHECK(img(0, 0, 1) == static_cast<float>(32768.0 / 65535.0));
    CHECK(img(0, 0, 2) == 1.0f);
  }

  TEST_CASE("single-channel frame is an unsupported layout") {
    TempDir dir("png");
    cv::imwrite((dir.path() / "g.png").string(), cv::Mat(2, 2, CV_8UC1, cv::Scalar(9)));
    CHECK_THROWS_WITH_AS(read_frame(dir.path() / "g.png"),
                         doctest::Contains("unsupported channel layout"), Error);
    cv::imwrite((dir.path() / "c.png").string(), cv::Mat(2, 2, CV_8UC3, cv::Scalar(9, 9, 9)));
    CHECK_THROWS_AS(read_mask(dir.path() / "c.png"), Error);
  }

  TEST_CASE("8-bit frames round-trip code-exactly") {
    TempDir dir("png");
    std::mt19937 rng(3);
    cv::Mat raw(13, 17, CV_8UC3);
    for (int y = 0; y < raw.rows; ++y)
      for (int x = 0; x < raw.cols; ++x)
        for (int c = 0; c < 3; ++c) raw.at<cv::Vec3b>(y, x)[c] = rng() & 0xff;
    cv::imwrite((dir.path() / "in.png").string(), raw);
    write_frame(read_frame(dir.path() / "in.png"), dir.path() / "out.png");
    const cv::Mat back = cv::imread((dir.path() / "out.png").string(), cv::IMREAD_UNCHANGED);
    CHECK(cv::countNonZero(back.reshape(1) != raw.reshape(1)) == 0);
  }

  TEST_CASE("write_frame rounds half up") {
    TempDir dir("png");
    Image img(2, 1, 0.0f);
    img(0, 0, 0) = static_cast<float>(100.5 / 255.0) + 1e-6f;
    img(1, 0, 0) = static_cast<float>(100.49 / 255.0);
    write_frame(img, dir.path() / "r.png");
    const cv::Mat back = cv::imread((dir.path() / "r.png").string(), cv::IMREAD_UNCHANGED);
    CHECK(back.at<cv::Vec3b>(0, 0)[2] == 101);
    CHECK(back.at<cv::Vec3b>(0, 1)[2] == 100);
  }

  TEST_CASE("mask threshold at 128") {
    TempDir dir("png");
    cv::Mat raw(1, 4, CV_8UC1);
    raw.at<std::uint8_t>(0, 0) = 0;
    raw.at<std::uint8_t>(0, 1) = 127;
    raw.at<std::uint8_t>(0, 2) = 128;
    raw.at<std::uint8_t>(0, 3) = 200;
    cv::imwrite((dir.path() / "m.png").string(), raw);
    const Mask m = read_mask(dir.path() / "m.png");
    CHECK(m(0, 0) == 0);
    CHECK(m(1, 0) == 0);
    CHECK(m(2, 0) == 1);
    CHECK(m(3, 0) == 1);
    cv::imwrite((dir.path() / "z.png").string(), cv::Mat(3, 3, CV_8UC1, cv::Scalar(0)));
    CHECK(count_set(read_mask(dir.path() / "z.png")) == 0);
  }

  TEST_CASE("mask write/read round trip") {
    TempDir dir("png");
    const Mask m = testing::disc_mask(9, 7, 4, 3, 2.5);
    write_mask(m, dir.path() / "m.png");
    CHECK(read_mask(dir.path() / "m.png") == m);
  }

  TEST_CASE("dilation matches the brute-force disk") {
    Mask one(9, 9, 0);
    one(4, 4) = 1;
    const Mask d = dilate_mask(one, 2);
    CHECK(d == dilate_oracle(one, 2));
    CHECK(count_set(d) == 13);
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 9; ++x)
        if (d(x, y)) CHECK((std::abs(x - 4) <= 2 && std::abs(y - 4) <= 2));

    Mask corner(6, 5, 0);
    corner(0, 0) = 1;
    CHECK(dilate_mask(corner, 2) == dilate_oracle(corner, 2));

    std::mt19937 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      Mask m(15, 11, 0);
      for (auto& v : m.data()) v = (rng() % 23 == 0) ? 1 : 0;
      const int r = 1 + static_cast<int>(rng() % 4);
      CHECK(dilate_mask(m, r) == dilate_oracle(m, r));
    }
    CHECK(dilate_mask(one, 0) == one);
  }
}

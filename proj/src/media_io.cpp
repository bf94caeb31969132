#include "flowpull/media_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace flowpull {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
  return v;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::vector<std::uint8_t> encode_flow(const FlowField& flow) {
  std::vector<std::uint8_t> out;
  out.reserve(12 + 8 * flow.vectors.pixel_count());
  put_u32(out, std::bit_cast<std::uint32_t>(kFlowMagic));
  put_u32(out, static_cast<std::uint32_t>(flow.width()));
  put_u32(out, static_cast<std::uint32_t>(flow.height()));
  for (std::size_t p = 0; p < flow.vectors.pixel_count(); ++p) {
    const bool valid = flow.valid.data()[p] != 0;
    for (int c = 0; c < 2; ++c) {
      const float v = valid ? flow.vectors.pixel(p)[c] : kUnknownFlow;
      put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
  }
  return out;
}

FlowField decode_flow(std::span<const std::uint8_t> bytes, const std::string& name) {
  if (bytes.size() < 12) throw Error("truncated flow header in " + name);
  if (get_u32(bytes, 0) != std::bit_cast<std::uint32_t>(kFlowMagic)) {
    throw Error("bad magic in flow file " + name);
  }
  const auto width = static_cast<std::int32_t>(get_u32(bytes, 4));
  const auto height = static_cast<std::int32_t>(get_u32(bytes, 8));
  if (width <= 0 || height <= 0) throw Error("invalid flow dimensions in " + name);
  const std::uint64_t expected = 12 + 8ull * static_cast<std::uint64_t>(width) * height;
  if (bytes.size() != expected) {
    throw Error("truncated flow payload in " + name + ": expected " + std::to_string(expected) +
                " bytes, got " + std::to_string(bytes.size()));
  }
  FlowField flow(width, height);
  std::size_t offset = 12;
  for (std::size_t p = 0; p < flow.vectors.pixel_count(); ++p) {
    const float u = std::bit_cast<float>(get_u32(bytes, offset));
    const float v = std::bit_cast<float>(get_u32(bytes, offset + 4));
    offset += 8;
    const bool known = std::isfinite(u) && std::isfinite(v) && std::abs(u) < kUnknownFlow &&
                       std::abs(v) < kUnknownFlow;
    if (known) {
      flow.vectors.pixel(p)[0] = u;
      flow.vectors.pixel(p)[1] = v;
    } else {
      flow.valid.data()[p] = 0;
    }
  }
  return flow;
}

FlowField read_flow(const std::filesystem::path& path) {
  return decode_flow(read_bytes(path), path.string());
}

void write_flow(const FlowField& flow, const std::filesystem::path& path) {
  const auto bytes = encode_flow(flow);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write flow file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing flow file " + path.string());
}

Image read_frame(const std::filesystem::path& path) {
  const cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (raw.empty()) throw Error("cannot read frame " + path.string());
  if (raw.channels() != 3 || (raw.depth() != CV_8U && raw.depth() != CV_16U)) {
    throw Error("unsupported channel layout in " + path.string() +
                " (expected 8- or 16-bit RGB)");
  }
  const double scale = raw.depth() == CV_8U ? 255.0 : 65535.0;
  Image image(raw.cols, raw.rows);
  for (int y = 0; y < raw.rows; ++y) {
    for (int x = 0; x < raw.cols; ++x) {
      // OpenCV stores BGR.
      for (int c = 0; c < 3; ++c) {
        const double code = raw.depth() == CV_8U
                                ? static_cast<double>(raw.at<cv::Vec3b>(y, x)[2 - c])
                                : static_cast<double>(raw.at<cv::Vec3w>(y, x)[2 - c]);
        image(x, y, c) = static_cast<float>(code / scale);
      }
    }
  }
  return image;
}

void write_frame(const Image& image, const std::filesystem::path& path) {
  cv::Mat raw(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(static_cast<double>(image(x, y, c)), 0.0, 1.0);
        raw.at<cv::Vec3b>(y, x)[2 - c] = static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
      }
    }
  }
  if (!cv::imwrite(path.string(), raw)) throw Error("cannot write frame " + path.string());
}

Mask read_mask(const std::filesystem::path& path, int dilate_radius) {
  const cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (raw.empty()) throw Error("cannot read mask " + path.string());
  if (raw.channels() != 1 || (raw.depth() != CV_8U && raw.depth() != CV_16U)) {
    throw Error("unsupported channel layout in " + path.string() +
                " (expected single-channel 8- or 16-bit)");
  }
  // 128 of 255, scaled to the 16-bit range by 257.
  const int threshold = raw.depth() == CV_8U ? 128 : 128 * 257;
  Mask mask(raw.cols, raw.rows, 0);
  for (int y = 0; y < raw.rows; ++y) {
    for (int x = 0; x < raw.cols; ++x) {
      const int code = raw.depth() == CV_8U ? raw.at<std::uint8_t>(y, x)
                                            : raw.at<std::uint16_t>(y, x);
      mask(x, y) = code >= threshold ? 1 : 0;
    }
  }
  return dilate_radius > 0 ? dilate_mask(mask, dilate_radius) : mask;
}

void write_mask(const Mask& mask, const std::filesystem::path& path) {
  cv::Mat raw(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) raw.at<std::uint8_t>(y, x) = mask(x, y) ? 255 : 0;
  }
  if (!cv::imwrite(path.string(), raw)) throw Error("cannot write mask " + path.string());
}

Mask dilate_mask(const Mask& mask, int radius) {
  if (radius < 0) throw Error("dilation radius must be non-negative");
  if (radius == 0) return mask;
  const int w = mask.width();
  const int h = mask.height();
  // prefix[y][x] = number of set pixels in row y before column x.
  std::vector<int> prefix(static_cast<std::size_t>(h) * (w + 1), 0);
  for (int y = 0; y < h; ++y) {
    int* row = &prefix[static_cast<std::size_t>(y) * (w + 1)];
    for (int x = 0; x < w; ++x) row[x + 1] = row[x] + (mask(x, y) ? 1 : 0);
  }
  std::vector<int> half_width(2 * radius + 1);
  for (int dy = -radius; dy <= radius; ++dy) {
    half_width[dy + radius] =
        static_cast<int>(std::floor(std::sqrt(static_cast<double>(radius * radius - dy * dy))));
  }
  Mask out(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int dy = -radius; dy <= radius; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        const int hw = half_width[dy + radius];
        const int lo = std::max(0, x - hw);
        const int hi = std::min(w - 1, x + hw);
        const int* row = &prefix[static_cast<std::size_t>(yy) * (w + 1)];
        if (row[hi + 1] - row[lo] > 0) {
          out(x, y) = 1;
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace flowpull

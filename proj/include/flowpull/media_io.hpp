#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "flowpull/types.hpp"

namespace flowpull {

// Middlebury .flo layout: float32 magic, int32 width, int32 height, then
// width*height interleaved (u, v) float32, all little-endian, row-major.
inline constexpr float kFlowMagic = 202021.25f;
// Components with magnitude at or above this value mark unknown flow.
inline constexpr float kUnknownFlow = 1e9f;

std::vector<std::uint8_t> encode_flow(const FlowField& flow);
// `name` is used in error messages only.
FlowField decode_flow(std::span<const std::uint8_t> bytes, const std::string& name = "<memory>");

FlowField read_flow(const std::filesystem::path& path);
void write_flow(const FlowField& flow, const std::filesystem::path& path);

// 8- or 16-bit three-channel rasters; codes are scaled to [0,1] by the max
// code. Writing produces 8-bit with round-half-up.
Image read_frame(const std::filesystem::path& path);
void write_frame(const Image& image, const std::filesystem::path& path);

// Single-channel raster; code >= 128/255 of full scale is a hole. The
// optional dilation grows the hole by a Euclidean disk of `dilate_radius`.
Mask read_mask(const std::filesystem::path& path, int dilate_radius = 0);
void write_mask(const Mask& mask, const std::filesystem::path& path);

Mask dilate_mask(const Mask& mask, int radius);

}  // namespace flowpull

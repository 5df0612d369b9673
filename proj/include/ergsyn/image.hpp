#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace ergsyn {

// Half-pixel-center bilinear resampling (output pixel i maps to input
// coordinate (i + 0.5) * in / out - 0.5, clamped at the borders).
Eigen::MatrixXd bilinear_resize(const Eigen::MatrixXd& in, int out_rows, int out_cols);

// Minimal NPY v1.0 writer/reader for float64 arrays in C order. Shape is
// given outermost first; a 3-channel scalogram uses {3, scales, time}.
void save_npy(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
              const std::vector<double>& data);
std::pair<std::vector<std::size_t>, std::vector<double>> load_npy(const std::filesystem::path& path);

// 8-bit RGB PNG (one zlib-compressed IDAT chunk).
void write_png_rgb8(const std::filesystem::path& path, int width, int height,
                    const std::vector<std::uint8_t>& rgb);

}  // namespace ergsyn

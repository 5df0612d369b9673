#include "ergsyn/image.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "ergsyn/errors.hpp"

namespace ergsyn {

Eigen::MatrixXd bilinear_resize(const Eigen::MatrixXd& in, int out_rows, int out_cols) {
    if (out_rows < 1 || out_cols < 1) throw ConfigError("resize target must be positive");
    const auto in_rows = in.rows();
    const auto in_cols = in.cols();
    Eigen::MatrixXd out(out_rows, out_cols);

    const double row_scale = static_cast<double>(in_rows) / out_rows;
    const double col_scale = static_cast<double>(in_cols) / out_cols;

    for (int r = 0; r < out_rows; ++r) {
        const double src_r = std::clamp((r + 0.5) * row_scale - 0.5, 0.0,
                                        static_cast<double>(in_rows - 1));
        const auto r0 = static_cast<Eigen::Index>(std::floor(src_r));
        const auto r1 = std::min<Eigen::Index>(r0 + 1, in_rows - 1);
        const double fr = src_r - static_cast<double>(r0);
        for (int c = 0; c < out_cols; ++c) {
            const double src_c = std::clamp((c + 0.5) * col_scale - 0.5, 0.0,
                                            static_cast<double>(in_cols - 1));
            const auto c0 = static_cast<Eigen::Index>(std::floor(src_c));
            const auto c1 = std::min<Eigen::Index>(c0 + 1, in_cols - 1);
            const double fc = src_c - static_cast<double>(c0);
            out(r, c) = (1.0 - fr) * ((1.0 - fc) * in(r0, c0) + fc * in(r0, c1)) +
                        fr * ((1.0 - fc) * in(r1, c0) + fc * in(r1, c1));
        }
    }
    return out;
}

void save_npy(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
              const std::vector<double>& data) {
    std::size_t expected = 1;
    for (std::size_t d : shape) expected *= d;
    if (expected != data.size()) throw ConfigError("npy shape does not match data size");

    std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        dict += std::to_string(shape[i]);
        if (shape.size() == 1 || i + 1 < shape.size()) dict += ",";
        if (i + 1 < shape.size()) dict += " ";
    }
    dict += "), }";
    const std::size_t unpadded = 10 + dict.size() + 1;
    const std::size_t padded = (unpadded + 63) / 64 * 64;
    dict.append(padded - unpadded, ' ');
    dict += '\n';

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write npy file: " + path.string());
    out.write("\x93NUMPY\x01\x00", 8);
    const auto hlen = static_cast<std::uint16_t>(dict.size());
    const char hlen_le[2] = {static_cast<char>(hlen & 0xff), static_cast<char>(hlen >> 8)};
    out.write(hlen_le, 2);
    out.write(dict.data(), static_cast<std::streamsize>(dict.size()));
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!out) throw DataError("write failed: " + path.string());
}

std::pair<std::vector<std::size_t>, std::vector<double>> load_npy(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open npy file: " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "\x93NUMPY\x01\x00", 8) != 0)
        throw DataError("not an npy v1.0 file: " + path.string());
    unsigned char hlen_le[2];
    in.read(reinterpret_cast<char*>(hlen_le), 2);
    const std::size_t hlen = hlen_le[0] | (static_cast<std::size_t>(hlen_le[1]) << 8);
    std::string header(hlen, '\0');
    in.read(header.data(), static_cast<std::streamsize>(hlen));

    if (header.find("'<f8'") == std::string::npos || header.find("False") == std::string::npos)
        throw DataError("unsupported npy dtype/order in " + path.string());
    const auto open = header.find('(');
    const auto close = header.find(')', open);
    if (open == std::string::npos || close == std::string::npos)
        throw DataError("bad npy header in " + path.string());

    std::vector<std::size_t> shape;
    std::size_t pos = open + 1;
    while (pos < close) {
        while (pos < close && (header[pos] == ' ' || header[pos] == ',')) ++pos;
        if (pos >= close) break;
        shape.push_back(std::strtoull(header.c_str() + pos, nullptr, 10));
        while (pos < close && header[pos] != ',') ++pos;
    }

    std::size_t count = 1;
    for (std::size_t d : shape) count *= d;
    std::vector<double> data(count);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw DataError("truncated npy file: " + path.string());
    return {shape, data};
}

namespace {

void put_be32(std::string& s, std::uint32_t v) {
    s.push_back(static_cast<char>((v >> 24) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>(v & 0xff));
}

void put_chunk(std::string& out, const char type[4], const std::string& data) {
    put_be32(out, static_cast<std::uint32_t>(data.size()));
    std::string body(type, 4);
    body += data;
    out += body;
    const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                           static_cast<uInt>(body.size()));
    put_be32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

void write_png_rgb8(const std::filesystem::path& path, int width, int height,
                    const std::vector<std::uint8_t>& rgb) {
    if (width < 1 || height < 1 ||
        rgb.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3)
        throw ConfigError("png buffer size does not match dimensions");

    std::string raw;
    raw.reserve(static_cast<std::size_t>(height) * (1 + static_cast<std::size_t>(width) * 3));
    for (int y = 0; y < height; ++y) {
        raw.push_back('\0');  // filter type 0
        raw.append(reinterpret_cast<const char*>(rgb.data()) +
                       static_cast<std::size_t>(y) * static_cast<std::size_t>(width) * 3,
                   static_cast<std::size_t>(width) * 3);
    }

    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::string compressed(bound, '\0');
    if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                  reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                  6) != Z_OK)
        throw DataError("zlib compression failed for " + path.string());
    compressed.resize(bound);

    std::string png("\x89PNG\r\n\x1a\n", 8);
    std::string ihdr;
    put_be32(ihdr, static_cast<std::uint32_t>(width));
    put_be32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(2);   // RGB
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    put_chunk(png, "IHDR", ihdr);
    put_chunk(png, "IDAT", compressed);
    put_chunk(png, "IEND", "");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write png file: " + path.string());
    out.write(png.data(), static_cast<std::streamsize>(png.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace ergsyn

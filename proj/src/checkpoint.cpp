#include "ergsyn/checkpoint.hpp"

#include <fstream>

#include "ergsyn/errors.hpp"

namespace ergsyn {

namespace {

constexpr char kMagic[8] = {'E', 'R', 'G', 'S', 'Y', 'N', 'C', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_string(std::ostream& out, const std::string& s) {
    write_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    const std::uint64_t n = read_u64(in);
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    return s;
}

}  // namespace

void CheckpointContainer::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path.string());
    out.write(kMagic, 8);
    write_string(out, payload_tag);
    write_string(out, config_json);

    write_u64(out, tensors.size());
    for (const auto& [name, m] : tensors) {
        write_string(out, name);
        write_u64(out, static_cast<std::uint64_t>(m.rows()));
        write_u64(out, static_cast<std::uint64_t>(m.cols()));
        out.write(reinterpret_cast<const char*>(m.data()),
                  static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
    }

    write_u64(out, strings.size());
    for (const auto& [name, s] : strings) {
        write_string(out, name);
        write_string(out, s);
    }

    write_u64(out, ints.size());
    for (const auto& [name, v] : ints) {
        write_string(out, name);
        write_u64(out, static_cast<std::uint64_t>(v));
    }
    if (!out) throw DataError("checkpoint write failed: " + path.string());
}

CheckpointContainer CheckpointContainer::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != std::string(kMagic, 8))
        throw DataError("not an ergsyn checkpoint: " + path.string());

    CheckpointContainer c;
    c.payload_tag = read_string(in);
    c.config_json = read_string(in);

    const std::uint64_t n_tensors = read_u64(in);
    for (std::uint64_t i = 0; i < n_tensors; ++i) {
        const std::string name = read_string(in);
        const auto rows = static_cast<Eigen::Index>(read_u64(in));
        const auto cols = static_cast<Eigen::Index>(read_u64(in));
        Eigen::MatrixXd m(rows, cols);
        in.read(reinterpret_cast<char*>(m.data()),
                static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
        c.tensors.emplace(name, std::move(m));
    }

    const std::uint64_t n_strings = read_u64(in);
    for (std::uint64_t i = 0; i < n_strings; ++i) {
        const std::string name = read_string(in);
        c.strings.emplace(name, read_string(in));
    }

    const std::uint64_t n_ints = read_u64(in);
    for (std::uint64_t i = 0; i < n_ints; ++i) {
        const std::string name = read_string(in);
        c.ints.emplace(name, static_cast<std::int64_t>(read_u64(in)));
    }
    if (!in) throw DataError("truncated checkpoint: " + path.string());
    return c;
}

}  // namespace ergsyn

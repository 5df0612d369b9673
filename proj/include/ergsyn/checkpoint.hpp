#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace ergsyn {

// On-disk container shared by all model checkpoints. Layout (little-endian):
//   magic "ERGSYNC1"
//   payload tag, config JSON, then counted maps of named f64 tensors,
//   strings and i64 scalars, every string and name length-prefixed (u64).
struct CheckpointContainer {
    std::string payload_tag;
    std::string config_json;
    std::map<std::string, Eigen::MatrixXd> tensors;
    std::map<std::string, std::string> strings;
    std::map<std::string, std::int64_t> ints;

    void save(const std::filesystem::path& path) const;
    static CheckpointContainer load(const std::filesystem::path& path);
};

}  // namespace ergsyn

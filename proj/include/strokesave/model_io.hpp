#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "strokesave/model.hpp"

namespace strokesave::nn {

// "SSMD" container:
//   magic "SSMD" | u32 version | u32 record count | records...
// record:
//   u32 name length | name bytes | u32 rank | u64 dims[rank] | f64 values[prod(dims)]
// All integers and reals are little-endian.

inline constexpr std::uint32_t kModelFormatVersion = 1;

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NamedTensor {
    std::string name;
    Tensor tensor;
    bool operator==(const NamedTensor&) const = default;
};

std::vector<std::uint8_t> encode_records(std::span<const NamedTensor> records);
std::vector<NamedTensor> decode_records(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> serialize(const Model& model);
Model deserialize_model(std::span<const std::uint8_t> bytes);

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace strokesave::nn

#pragma once

#include <filesystem>

#include "hoconv/core/io.hpp"
#include "hoconv/network/model.hpp"

namespace hoconv::cli {

// HOCK v1: "HOCK", u8 version=1, u32-LE length of a JSON header, the header
// ({"model": <description>, "arrays": [{"name", "length"}, ...]}), then
// every state array of the model as little-endian f64 in declaration order.
inline constexpr std::uint8_t kCheckpointVersion = 1;

Bytes encode_checkpoint(network::Model& model);
/// Rebuilds the model from the header and loads its arrays. Throws
/// FormatError on a bad magic/version, manifest mismatch or truncation.
network::Model decode_checkpoint(const Bytes& bytes);

void write_checkpoint(const std::filesystem::path& path, network::Model& model);
network::Model read_checkpoint(const std::filesystem::path& path);

}  // namespace hoconv::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hoconv {

using Bytes = std::vector<std::uint8_t>;

/// Writes to `<path>.tmp` and renames over `path`; throws IoError naming the path.
void write_file_atomic(const std::filesystem::path& path, const Bytes& bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);
Bytes read_file(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

/// Little-endian append/read helpers for binary formats.
class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void raw(const void* data, std::size_t n);
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

/// Throws FormatError when reading past the end.
class ByteReader {
public:
    explicit ByteReader(const Bytes& bytes) : data_(bytes) {}
    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    void raw(void* dst, std::size_t n);
    std::size_t remaining() const noexcept { return data_.size() - pos_; }

private:
    void need(std::size_t n) const;
    const Bytes& data_;
    std::size_t pos_ = 0;
};

}  // namespace hoconv

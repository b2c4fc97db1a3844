// Internal file-IO helpers: atomic writes (temp + rename) and explicit
// little-endian binary encoding used by the dataset and model formats.
#ifndef GFRA_SRC_IO_UTIL_HPP
#define GFRA_SRC_IO_UTIL_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include "gfra/errors.hpp"

namespace gfra::detail {

static_assert(std::endian::native == std::endian::little,
              "big-endian hosts need byte swaps in the binary IO layer");

/// Writes through a temporary sibling file and renames on success, so
/// readers never observe a partially written artifact.
inline void atomic_write(const std::filesystem::path& path,
                         const std::function<void(std::ofstream&)>& body) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw format_error("cannot open for writing: " + tmp.string());
        }
        body(out);
        out.flush();
        if (!out) {
            throw format_error("write failed: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

inline void put_bytes(std::ofstream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void put_u8(std::ofstream& out, std::uint8_t v) { put_bytes(out, &v, 1); }
inline void put_u32(std::ofstream& out, std::uint32_t v) { put_bytes(out, &v, 4); }
inline void put_u64(std::ofstream& out, std::uint64_t v) { put_bytes(out, &v, 8); }
inline void put_f32(std::ofstream& out, float v) { put_bytes(out, &v, 4); }
inline void put_f64(std::ofstream& out, double v) { put_bytes(out, &v, 8); }

class BinaryReader {
public:
    BinaryReader(const std::filesystem::path& path, std::string what)
        : in_(path, std::ios::binary), what_(std::move(what)) {
        if (!in_) {
            throw format_error(what_ + ": cannot open " + path.string());
        }
    }

    void read_bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n)) {
            throw format_error(what_ + ": truncated at byte offset " +
                               std::to_string(offset_ + static_cast<std::size_t>(in_.gcount())));
        }
        offset_ += n;
    }

    std::uint8_t u8() { std::uint8_t v; read_bytes(&v, 1); return v; }
    std::uint32_t u32() { std::uint32_t v; read_bytes(&v, 4); return v; }
    std::uint64_t u64() { std::uint64_t v; read_bytes(&v, 8); return v; }
    float f32() { float v; read_bytes(&v, 4); return v; }
    double f64() { double v; read_bytes(&v, 8); return v; }

    std::size_t offset() const { return offset_; }

    bool at_eof() {
        return in_.peek() == std::ifstream::traits_type::eof();
    }

private:
    std::ifstream in_;
    std::string what_;
    std::size_t offset_ = 0;
};

} // namespace gfra::detail

#endif

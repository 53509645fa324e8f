#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

#include <zlib.h>

#include "pxy/errors.hpp"
#include "pxy/linalg.hpp"

namespace pxy::detail {

inline std::uint32_t crc32_of(std::string_view bytes) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

/// Little-endian byte sink.
class ByteWriter {
public:
    void raw(std::string_view s) { buf_.append(s); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s);
    }
    void matrix_f32(const Matrix& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) f32(m(i, j));
    }
    void matrix_f64(const Matrix& m) {
        u32(static_cast<std::uint32_t>(m.rows()));
        u32(static_cast<std::uint32_t>(m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
    }
    /// Appends the CRC-32 of everything written so far.
    void seal() { u32(crc32_of(buf_)); }

    const std::string& bytes() const noexcept { return buf_; }

private:
    std::string buf_;
};

/// Bounds-checked little-endian reader; every failure is a FormatError.
class ByteReader {
public:
    ByteReader(std::string_view bytes, const char* what) : bytes_(bytes), what_(what) {}

    /// Checks the trailing CRC-32 and strips it from the readable range.
    void verify_seal() {
        if (bytes_.size() < 4) fail("truncated");
        const std::string_view body = bytes_.substr(0, bytes_.size() - 4);
        ByteReader tail(bytes_.substr(bytes_.size() - 4), what_);
        if (tail.u32() != crc32_of(body)) fail("checksum mismatch");
        bytes_ = body;
    }
    void expect(std::string_view magic) {
        if (bytes_.substr(pos_, magic.size()) != magic) fail("bad magic");
        pos_ += magic.size();
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
        return v;
    }
    double f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(bytes_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    std::string_view raw(std::size_t n) {
        need(n);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    Matrix matrix_f32(std::uint64_t rows, std::uint64_t cols) {
        need(rows * cols * 4);
        Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = f32();
        if (!m.allFinite()) fail("non-finite parameter");
        return m;
    }
    Matrix matrix_f64() {
        const std::uint64_t rows = u32(), cols = u32();
        need(rows * cols * 8);
        Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = f64();
        return m;
    }
    void finish() const {
        if (pos_ != bytes_.size()) fail("trailing bytes");
    }
    [[noreturn]] void fail(const std::string& why) const { throw FormatError(std::string(what_) + ": " + why); }

private:
    void need(std::uint64_t n) const {
        if (n > bytes_.size() - pos_) fail("truncated");
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
    const char* what_;
};

}  // namespace pxy::detail

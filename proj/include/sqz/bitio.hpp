#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <string>
#include <vector>

#include "sqz/error.hpp"

namespace sqz {

// Bit order is MSB-first within every codeword and fixed-width field, so
// lexicographic comparison of codewords equals numeric comparison.

/// Append-only bit buffer backed by a doubling byte vector.
class BitSink {
public:
    void push(bool bit) { push_bits(bit ? 1 : 0, 1); }

    /// Appends the low `width` bits of `value`, most-significant bit first.
    void push_bits(uint64_t value, unsigned width) {
        assert(width <= 64);
        assert(width == 64 || (value >> width) == 0);
        while (width > 0) {
            if (len_ % 8 == 0) buf_.push_back(0);
            const unsigned off = len_ % 8;
            const unsigned take = std::min(8u - off, width);
            const uint8_t chunk = static_cast<uint8_t>((value >> (width - take)) & ((1u << take) - 1));
            buf_.back() = static_cast<uint8_t>(buf_.back() | (chunk << (8 - off - take)));
            len_ += take;
            width -= take;
        }
    }

    void append(const BitSink& other) {
        for (size_t i = 0; i < other.len_; ++i) push(other.bit(i));
    }

    size_t bit_size() const { return len_; }

    bool bit(size_t i) const {
        assert(i < len_);
        return (buf_[i / 8] >> (7 - i % 8)) & 1;
    }

    /// Final byte zero-padded.
    const std::vector<uint8_t>& bytes() const { return buf_; }

    std::string to_string() const {
        std::string s;
        s.reserve(len_);
        for (size_t i = 0; i < len_; ++i) s.push_back(bit(i) ? '1' : '0');
        return s;
    }

    void clear() {
        buf_.clear();
        len_ = 0;
    }

private:
    std::vector<uint8_t> buf_;
    size_t len_ = 0;
};

/// Cursor over an immutable bit sequence. Peeks are zero-padded past the end
/// and never advance the cursor.
class BitSource {
public:
    BitSource(const uint8_t* data, size_t bit_len) : data_(data), len_(bit_len) {}
    explicit BitSource(const BitSink& sink) : BitSource(sink.bytes().data(), sink.bit_size()) {}
    explicit BitSource(const std::vector<uint8_t>& bytes) : BitSource(bytes.data(), bytes.size() * 8) {}

    bool read() {
        if (cursor_ >= len_) throw CorruptError("bit source exhausted");
        const bool b = bit_at(cursor_);
        ++cursor_;
        return b;
    }

    uint64_t read_bits(unsigned width) {
        assert(width <= 64);
        if (cursor_ + width > len_) throw CorruptError("bit source exhausted");
        uint64_t v = 0;
        for (unsigned i = 0; i < width; ++i) v = (v << 1) | (bit_at(cursor_ + i) ? 1 : 0);
        cursor_ += width;
        return v;
    }

    uint64_t peek_bits(unsigned width) const {
        assert(width <= 64);
        uint64_t v = 0;
        for (unsigned i = 0; i < width; ++i) v = (v << 1) | (peek_bit(i) ? 1 : 0);
        return v;
    }

    bool peek_bit(size_t offset) const {
        const size_t p = cursor_ + offset;
        return p < len_ && bit_at(p);
    }

    void skip(size_t k) {
        if (cursor_ + k > len_) throw CorruptError("bit source exhausted");
        cursor_ += k;
    }

    size_t cursor() const { return cursor_; }
    size_t bit_size() const { return len_; }
    size_t remaining() const { return len_ - cursor_; }

private:
    bool bit_at(size_t i) const { return (data_[i / 8] >> (7 - i % 8)) & 1; }

    const uint8_t* data_;
    size_t len_;
    size_t cursor_ = 0;
};

// Elias gamma code: floor(log2 x) zeroes followed by the binary representation
// of x, 2*floor(log2 x) + 1 bits in total. Defined only for x >= 1.

inline void gamma_encode(BitSink& sink, uint64_t x) {
    if (x == 0) throw std::invalid_argument("gamma code is undefined for 0");
    const unsigned b = std::bit_width(x);
    sink.push_bits(0, b - 1);
    sink.push_bits(x, b);
}

inline unsigned gamma_length(uint64_t x) {
    assert(x >= 1);
    return 2 * std::bit_width(x) - 1;
}

/// `max_zeros` caps the leading-zero run as a corruption guard.
inline uint64_t gamma_decode(BitSource& src, unsigned max_zeros = 64) {
    unsigned zeros = 0;
    while (!src.read()) {
        if (++zeros > max_zeros) throw CorruptError("gamma codeword exceeds zero-run guard");
    }
    if (zeros >= 64) throw CorruptError("gamma codeword exceeds zero-run guard");
    return (uint64_t{1} << zeros) | src.read_bits(zeros);
}

inline void write_fixed(BitSink& sink, uint64_t value, unsigned width) {
    if (width > 64) throw std::invalid_argument("fixed-width field wider than 64 bits");
    if (width < 64 && (value >> width) != 0)
        throw std::invalid_argument("value does not fit in fixed-width field");
    sink.push_bits(value, width);
}

inline uint64_t read_fixed(BitSource& src, unsigned width) { return src.read_bits(width); }

} // namespace sqz

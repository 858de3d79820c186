#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sqz/adaptive_coder.hpp"
#include "sqz/bounded_coder.hpp"
#include "sqz/bwt_pipeline.hpp"
#include "sqz/error.hpp"
#include "sqz/online_sorter.hpp"

namespace sqz {

// Container layout, all multi-byte integers little-endian:
//   magic "SQZ1" | version u8 | codec u8 | sigma u32 | n u64 |
//   param block (u32 length prefix, codec-defined) | payload, zero-padded to a
//   byte boundary.
// Each codec's param block ends with a CRC32 of version, codec, sigma, n and
// the params before it, so header and parameter corruption is rejected before
// any payload is touched.

enum class CodecId : uint8_t {
    adaptive = 1,
    bounded = 2,
    bwt = 3,
    gaplists = 4,
};

inline constexpr std::array<uint8_t, 4> kMagic{'S', 'Q', 'Z', '1'};
inline constexpr uint8_t kVersion = 1;

namespace detail {

inline uint32_t crc32(std::span<const uint8_t> data, uint32_t seed = 0) {
    uint32_t crc = ~seed;
    for (uint8_t byte : data) {
        crc ^= byte;
        for (int k = 0; k < 8; ++k) crc = (crc >> 1) ^ (0xEDB88320u & (~(crc & 1) + 1));
    }
    return ~crc;
}

class ByteWriter {
public:
    void u8(uint8_t v) { out_.push_back(v); }
    void u16(uint16_t v) {
        for (int i = 0; i < 2; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    const std::vector<uint8_t>& bytes() const { return out_; }

private:
    std::vector<uint8_t> out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

    uint8_t u8() { return take(1)[0]; }
    uint16_t u16() { return static_cast<uint16_t>(gather(2)); }
    uint32_t u32() { return static_cast<uint32_t>(gather(4)); }
    uint64_t u64() { return gather(8); }
    size_t remaining() const { return data_.size() - pos_; }

private:
    std::span<const uint8_t> take(size_t k) {
        if (pos_ + k > data_.size()) throw CorruptError("container truncated");
        auto s = data_.subspan(pos_, k);
        pos_ += k;
        return s;
    }
    uint64_t gather(size_t k) {
        auto s = take(k);
        uint64_t v = 0;
        for (size_t i = 0; i < k; ++i) v |= static_cast<uint64_t>(s[i]) << (8 * i);
        return v;
    }

    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

inline unsigned key_bits(uint32_t sigma) { return sigma > 1 ? ceil_log2_ratio(sigma, 1) : 1; }

} // namespace detail

struct Container {
    CodecId codec = CodecId::adaptive;
    uint32_t sigma = 0;
    uint64_t n = 0;
    std::vector<uint8_t> params;  // without the trailing crc
    std::vector<uint8_t> payload; // zero-padded to a byte boundary
};

inline std::vector<uint8_t> container_to_bytes(const Container& c) {
    detail::ByteWriter header;
    header.u8(kVersion);
    header.u8(static_cast<uint8_t>(c.codec));
    header.u32(c.sigma);
    header.u64(c.n);
    detail::ByteWriter params;
    for (uint8_t b : c.params) params.u8(b);
    uint32_t crc = detail::crc32(header.bytes());
    crc = detail::crc32(params.bytes(), crc);
    params.u32(crc);

    detail::ByteWriter out;
    for (uint8_t b : kMagic) out.u8(b);
    for (uint8_t b : header.bytes()) out.u8(b);
    out.u32(static_cast<uint32_t>(params.bytes().size()));
    for (uint8_t b : params.bytes()) out.u8(b);
    for (uint8_t b : c.payload) out.u8(b);
    return out.bytes();
}

inline Container container_from_bytes(std::span<const uint8_t> data) {
    detail::ByteReader r(data);
    for (uint8_t want : kMagic)
        if (r.u8() != want) throw CorruptError("bad container magic");
    Container c{};
    const uint8_t version = r.u8();
    if (version != kVersion) throw CorruptError("unsupported container version");
    const uint8_t codec = r.u8();
    if (codec < 1 || codec > 4) throw CorruptError("unknown codec id");
    c.codec = static_cast<CodecId>(codec);
    c.sigma = r.u32();
    c.n = r.u64();
    const uint32_t param_len = r.u32();
    if (param_len < 4 || param_len > 4096 || param_len > r.remaining())
        throw CorruptError("bad parameter block length");
    std::vector<uint8_t> params_with_crc(param_len);
    for (auto& b : params_with_crc) b = r.u8();

    detail::ByteWriter header;
    header.u8(version);
    header.u8(codec);
    header.u32(c.sigma);
    header.u64(c.n);
    uint32_t crc = detail::crc32(header.bytes());
    crc = detail::crc32(std::span(params_with_crc).first(param_len - 4), crc);
    uint32_t stored = 0;
    for (int i = 0; i < 4; ++i)
        stored |= static_cast<uint32_t>(params_with_crc[param_len - 4 + i]) << (8 * i);
    if (crc != stored) throw CorruptError("container header checksum mismatch");
    c.params.assign(params_with_crc.begin(), params_with_crc.end() - 4);

    c.payload.reserve(r.remaining());
    while (r.remaining() > 0) c.payload.push_back(r.u8());
    return c;
}

// ---------------------------------------------------------------------------
// File-level encode/decode per codec
// ---------------------------------------------------------------------------

struct BoundedFixedParams {
    uint32_t lambda_fp = 1 << 16; // lambda * 2^16
    uint32_t mu_fp = 1 << 16;     // mu * 2^16
    uint8_t k = 0;

    static BoundedFixedParams from(double lambda, unsigned k, double mu) {
        BoundedFixedParams f;
        f.lambda_fp = static_cast<uint32_t>(std::llround(lambda * 65536.0));
        f.mu_fp = static_cast<uint32_t>(std::llround(mu * 65536.0));
        f.k = static_cast<uint8_t>(k);
        return f;
    }

    double lambda() const { return static_cast<double>(lambda_fp) / 65536.0; }
    double mu() const { return static_cast<double>(mu_fp) / 65536.0; }

    BoundedParams make(uint32_t sigma) const {
        return BoundedParams::make(sigma, lambda(), k, mu());
    }
};

inline std::vector<uint8_t> encode_adaptive_container(std::span<const uint32_t> s, uint32_t sigma) {
    Container c{};
    c.codec = CodecId::adaptive;
    c.sigma = sigma;
    c.n = s.size();
    c.params = {1}; // known-n rebuild schedule
    c.payload = adaptive_encode(s, sigma, /*n_known=*/true).bytes();
    return container_to_bytes(c);
}

inline std::vector<uint8_t> encode_bounded_container(std::span<const uint32_t> s, uint32_t sigma,
                                                     const BoundedFixedParams& fixed) {
    const BoundedParams params = fixed.make(sigma);
    Container c{};
    c.codec = CodecId::bounded;
    c.sigma = sigma;
    c.n = s.size();
    detail::ByteWriter w;
    w.u32(fixed.lambda_fp);
    w.u32(fixed.mu_fp);
    w.u8(fixed.k);
    w.u64(params.stage.r_fp);
    w.u16(static_cast<uint16_t>(params.stage.w));
    w.u32(params.c);
    c.params = w.bytes();
    c.payload = bounded_encode(s, params).bytes();
    return container_to_bytes(c);
}

inline std::vector<uint8_t> encode_bwt_container(std::span<const uint32_t> s, uint32_t sigma) {
    Container c{};
    c.codec = CodecId::bwt;
    c.sigma = sigma;
    c.n = s.size();
    const PipelinePayload payload = pipeline_compress(s, sigma);
    detail::ByteWriter w;
    w.u64(payload.token_count);
    c.params = w.bytes();
    c.payload = payload.bits.bytes();
    return container_to_bytes(c);
}

inline std::vector<uint8_t> encode_gaplists_container(std::span<const uint32_t> s, uint32_t sigma) {
    GapListSorter<uint32_t> sorter(detail::key_bits(sigma));
    for (uint32_t a : s) {
        if (a >= sigma) throw std::invalid_argument("symbol outside the alphabet");
        sorter.push(a);
    }
    BitSink bits;
    sorter.visit([&](uint32_t key, const GapList& l) {
        write_fixed(bits, key, detail::key_bits(sigma));
        gamma_encode(bits, l.encoding().bit_size() + 1);
        bits.append(l.encoding());
    });
    Container c{};
    c.codec = CodecId::gaplists;
    c.sigma = sigma;
    c.n = s.size();
    detail::ByteWriter w;
    w.u32(static_cast<uint32_t>(sorter.distinct()));
    c.params = w.bytes();
    c.payload = bits.bytes();
    return container_to_bytes(c);
}

namespace detail {

inline std::vector<uint32_t> decode_gaplists(BitSource& src, uint32_t sigma, uint64_t n,
                                             uint32_t distinct) {
    std::vector<uint32_t> out(n, 0);
    std::vector<bool> filled(n, false);
    auto place = [&](uint64_t pos, uint32_t key) {
        if (pos == 0 || pos > n || filled[pos - 1])
            throw CorruptError("position lists are not a permutation");
        filled[pos - 1] = true;
        out[pos - 1] = key;
    };
    uint64_t prev_key = 0;
    for (uint32_t i = 0; i < distinct; ++i) {
        const uint32_t key = static_cast<uint32_t>(read_fixed(src, key_bits(sigma)));
        if (key >= sigma || (i > 0 && key <= prev_key))
            throw CorruptError("list keys out of order");
        prev_key = key;
        const uint64_t enc_bits = gamma_decode(src) - 1;
        if (enc_bits > src.remaining()) throw CorruptError("list encoding truncated");
        const size_t end = src.cursor() + enc_bits;
        uint64_t pos = 0;
        bool first = true;
        while (src.cursor() < end) {
            const uint64_t g = gamma_decode(src);
            if (!first && g == 1) {
                uint64_t run = gamma_decode(src);
                while (run-- > 0) place(++pos, key);
            } else {
                pos += g;
                place(pos, key);
            }
            first = false;
        }
        if (src.cursor() != end) throw CorruptError("list encoding overran its length");
    }
    for (uint64_t i = 0; i < n; ++i)
        if (!filled[i]) throw CorruptError("position lists do not cover the input");
    return out;
}

} // namespace detail

/// Decodes any container produced by the encoders above, byte-exact.
inline std::vector<uint32_t> decode_container(std::span<const uint8_t> file) {
    const Container c = container_from_bytes(file);
    if (c.sigma == 0 || c.sigma > (1u << 24)) throw CorruptError("implausible alphabet size");
    BitSource src(c.payload.data(), c.payload.size() * 8);
    std::vector<uint32_t> out;
    switch (c.codec) {
        case CodecId::adaptive: {
            detail::ByteReader r(c.params);
            const uint8_t mode = r.u8();
            if (mode > 1) throw CorruptError("unknown adaptive-coder mode");
            out = adaptive_decode(src, c.sigma, c.n, mode == 1);
            break;
        }
        case CodecId::bounded: {
            detail::ByteReader r(c.params);
            BoundedFixedParams fixed;
            fixed.lambda_fp = r.u32();
            fixed.mu_fp = r.u32();
            fixed.k = r.u8();
            const uint64_t r_fp = r.u64();
            const uint16_t w = r.u16();
            const uint32_t cc = r.u32();
            BoundedParams params;
            try {
                params = fixed.make(c.sigma);
            } catch (const std::invalid_argument& e) {
                throw CorruptError(e.what());
            }
            if (params.stage.r_fp != r_fp || params.stage.w != w || params.c != cc)
                throw CorruptError("parameter mismatch between encoder and decoder");
            out = bounded_decode(src, params, c.n);
            break;
        }
        case CodecId::bwt: {
            detail::ByteReader r(c.params);
            const uint64_t token_count = r.u64();
            if (token_count > c.n + 2) throw CorruptError("token count exceeds the transform");
            out = pipeline_decompress(src, c.sigma, c.n, token_count);
            break;
        }
        case CodecId::gaplists: {
            detail::ByteReader r(c.params);
            const uint32_t distinct = r.u32();
            if (distinct > c.sigma) throw CorruptError("more lists than alphabet symbols");
            out = detail::decode_gaplists(src, c.sigma, c.n, distinct);
            break;
        }
    }
    // the payload may only carry byte padding past the content, and it is zero
    if (src.remaining() >= 8) throw CorruptError("payload longer than its content");
    while (src.remaining() > 0)
        if (src.read()) throw CorruptError("nonzero padding after the payload");
    return out;
}

} // namespace sqz

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "sqz/adaptive_coder.hpp"
#include "sqz/bitio.hpp"
#include "sqz/error.hpp"

namespace sqz {

/// Suffix array by prefix doubling with counting-sort passes, O(n log n).
/// Input ranks must already be in [0, bound).
inline std::vector<uint32_t> suffix_array(std::span<const uint32_t> s, uint32_t bound) {
    const size_t n = s.size();
    if (n == 0) return {};
    std::vector<uint32_t> sa(n), rank(n), tmp(n), cnt;
    for (size_t i = 0; i < n; ++i) {
        sa[i] = static_cast<uint32_t>(i);
        rank[i] = s[i];
    }
    auto counting_sort = [&](auto key, uint32_t keys) {
        cnt.assign(keys + 1, 0);
        for (size_t i = 0; i < n; ++i) ++cnt[key(sa[i]) + 1];
        for (uint32_t k = 0; k < keys; ++k) cnt[k + 1] += cnt[k];
        for (size_t i = 0; i < n; ++i) tmp[cnt[key(sa[i])]++] = sa[i];
        sa.swap(tmp);
    };
    uint32_t classes = bound;
    for (size_t h = 1; h < std::max<size_t>(n, 2); h <<= 1) {
        // radix: low key then high key, stable
        counting_sort([&](uint32_t i) { return i + h < n ? rank[i + h] + 1 : 0; }, classes + 1);
        counting_sort([&](uint32_t i) { return rank[i]; }, classes);
        tmp[sa[0]] = 0;
        for (size_t i = 1; i < n; ++i) {
            const uint32_t a = sa[i - 1], b = sa[i];
            const bool same = rank[a] == rank[b] &&
                              (a + h < n ? static_cast<int64_t>(rank[a + h]) : -1) ==
                                  (b + h < n ? static_cast<int64_t>(rank[b + h]) : -1);
            tmp[b] = tmp[a] + (same ? 0 : 1);
        }
        rank.swap(tmp);
        classes = n == 0 ? 1 : rank[sa[n - 1]] + 1;
        if (classes == n) break;
    }
    return sa;
}

// The sentinel is out of band: transformed strings use symbol value sigma for
// the single end marker, which sorts below every real symbol.

/// BWT(s): append the sentinel, sort suffixes, emit each suffix's preceding
/// character.
inline std::vector<uint32_t> bwt(std::span<const uint32_t> s, uint32_t sigma) {
    for (uint32_t a : s)
        if (a >= sigma) throw std::invalid_argument("symbol outside the alphabet");
    const size_t n = s.size() + 1;
    std::vector<uint32_t> mapped(n);
    for (size_t i = 0; i + 1 < n; ++i) mapped[i] = s[i] + 1; // sentinel becomes 0
    mapped[n - 1] = 0;
    const auto sa = suffix_array(mapped, sigma + 1);
    std::vector<uint32_t> out(n);
    for (size_t i = 0; i < n; ++i)
        out[i] = sa[i] == 0 ? sigma : (mapped[sa[i] - 1] == 0 ? sigma : mapped[sa[i] - 1] - 1);
    return out;
}

/// Inverse BWT via the successor property: the i-th character of the transform
/// is followed in the original string by the lexicographically i-th character
/// (ties by order of appearance).
inline std::vector<uint32_t> ibwt(std::span<const uint32_t> t, uint32_t sigma) {
    const size_t n = t.size();
    if (n == 0) throw CorruptError("empty transform");
    size_t sentinel_pos = n;
    for (size_t i = 0; i < n; ++i) {
        if (t[i] == sigma) {
            if (sentinel_pos != n) throw CorruptError("transform has multiple end markers");
            sentinel_pos = i;
        } else if (t[i] > sigma) {
            throw CorruptError("transform symbol outside the alphabet");
        }
    }
    if (sentinel_pos == n) throw CorruptError("transform lacks an end marker");

    // order[j] = position in t of the lexicographically j-th character
    // (sentinel first), stable within equal characters.
    std::vector<uint32_t> cnt(sigma + 2, 0);
    auto key = [&](uint32_t a) { return a == sigma ? 0 : a + 1; };
    for (size_t i = 0; i < n; ++i) ++cnt[key(t[i]) + 1];
    for (uint32_t k = 0; k + 1 < cnt.size(); ++k) cnt[k + 1] += cnt[k];
    std::vector<uint32_t> order(n);
    for (size_t i = 0; i < n; ++i) order[cnt[key(t[i])]++] = static_cast<uint32_t>(i);

    std::vector<uint32_t> out;
    out.reserve(n - 1);
    uint32_t cur = order[sentinel_pos];
    for (size_t step = 0; step + 1 < n; ++step) {
        if (t[cur] == sigma) throw CorruptError("successor walk hit the end marker early");
        out.push_back(t[cur]);
        cur = order[cur];
    }
    if (t[cur] != sigma) throw CorruptError("successor walk failed to close its cycle");
    return out;
}

/// Move-to-front: each symbol's output is its position in the recency list,
/// which then moves to the front. The list starts in alphabet order.
inline std::vector<uint32_t> mtf_encode(std::span<const uint32_t> s, uint32_t sigma) {
    std::vector<uint32_t> list(sigma);
    std::iota(list.begin(), list.end(), 0);
    std::vector<uint32_t> out;
    out.reserve(s.size());
    for (uint32_t a : s) {
        if (a >= sigma) throw std::invalid_argument("symbol outside the alphabet");
        const auto it = std::find(list.begin(), list.end(), a);
        const auto idx = static_cast<uint32_t>(it - list.begin());
        out.push_back(idx);
        list.erase(it);
        list.insert(list.begin(), a);
    }
    return out;
}

inline std::vector<uint32_t> mtf_decode(std::span<const uint32_t> indices, uint32_t sigma) {
    std::vector<uint32_t> list(sigma);
    std::iota(list.begin(), list.end(), 0);
    std::vector<uint32_t> out;
    out.reserve(indices.size());
    for (uint32_t idx : indices) {
        if (idx >= sigma) throw CorruptError("recency index outside the alphabet");
        const uint32_t a = list[idx];
        out.push_back(a);
        list.erase(list.begin() + idx);
        list.insert(list.begin(), a);
    }
    return out;
}

/// Zero-run-length tokens: a maximal run of index 0 becomes a run token with
/// its length; nonzero indices pass through. Token 0 is the run marker, so
/// literal tokens keep their index value (an index of 0 never passes through).
struct Rle0Token {
    bool run;
    uint64_t value; // run length >= 1, or the literal index >= 1

    bool operator==(const Rle0Token&) const = default;
};

inline std::vector<Rle0Token> rle0_encode(std::span<const uint32_t> indices) {
    std::vector<Rle0Token> out;
    uint64_t run = 0;
    for (uint32_t idx : indices) {
        if (idx == 0) {
            ++run;
            continue;
        }
        if (run > 0) {
            out.push_back({true, run});
            run = 0;
        }
        out.push_back({false, idx});
    }
    if (run > 0) out.push_back({true, run});
    return out;
}

inline std::vector<uint32_t> rle0_decode(std::span<const Rle0Token> tokens) {
    std::vector<uint32_t> out;
    for (const auto& tok : tokens) {
        if (tok.run) {
            if (tok.value == 0) throw CorruptError("empty zero run");
            out.insert(out.end(), tok.value, 0);
        } else {
            if (tok.value == 0) throw CorruptError("literal token for index zero");
            out.push_back(static_cast<uint32_t>(tok.value));
        }
    }
    return out;
}

// Full pipeline: BWT, move-to-front over the sigma+1 symbols including the
// sentinel, zero-run-length tokens, then the adaptive coder over the token
// alphabet (run marker plus literal indices 1..sigma) with each run token's
// length gamma-coded inline after its codeword.

struct PipelinePayload {
    BitSink bits;
    uint64_t token_count = 0;
};

inline PipelinePayload pipeline_compress(std::span<const uint32_t> s, uint32_t sigma) {
    const auto transform = bwt(s, sigma);
    const auto indices = mtf_encode(transform, sigma + 1);
    const auto tokens = rle0_encode(indices);
    PipelinePayload payload;
    payload.token_count = tokens.size();
    AdaptiveEncoder entropy(sigma + 1, tokens.size());
    for (const auto& tok : tokens) {
        entropy.push(tok.run ? 0 : static_cast<uint32_t>(tok.value));
        if (tok.run) gamma_encode(entropy.raw_sink(), tok.value);
    }
    payload.bits = entropy.take_bits();
    return payload;
}

inline std::vector<uint32_t> pipeline_decompress(BitSource& src, uint32_t sigma, uint64_t n,
                                                 uint64_t token_count) {
    AdaptiveDecoder entropy(sigma + 1, token_count, src);
    std::vector<Rle0Token> tokens;
    tokens.reserve(token_count);
    uint64_t expanded = 0;
    for (uint64_t i = 0; i < token_count; ++i) {
        const uint32_t sym = entropy.next();
        if (sym == 0) {
            const uint64_t run = gamma_decode(src);
            tokens.push_back({true, run});
            expanded += run;
        } else {
            tokens.push_back({false, sym});
            ++expanded;
        }
        if (expanded > n + 1) throw CorruptError("token stream expands past the transform");
    }
    if (expanded != n + 1) throw CorruptError("token stream does not cover the transform");
    const auto indices = rle0_decode(tokens);
    const auto transform = mtf_decode(indices, sigma + 1);
    return ibwt(transform, sigma);
}

} // namespace sqz

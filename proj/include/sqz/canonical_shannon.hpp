#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "sqz/bitio.hpp"
#include "sqz/error.hpp"

namespace sqz {

/// ceil(log2(num/den)) for integers num >= den >= 1, computed exactly.
inline unsigned ceil_log2_ratio(uint64_t num, uint64_t den) {
    assert(den >= 1 && num >= den);
    unsigned l = 0;
    while ((static_cast<unsigned __int128>(den) << l) < num) ++l;
    return l;
}

/// Shannon codeword lengths ceil(log2(1/p_i)) for a probability vector sorted
/// in nonincreasing order. All probabilities must be positive and sum to 1.
inline std::vector<unsigned> shannon_lengths(std::span<const double> probs) {
    if (probs.empty()) throw std::invalid_argument("empty distribution");
    double sum = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) throw std::invalid_argument("Shannon code requires positive probabilities");
        if (i > 0 && probs[i] > probs[i - 1] + 1e-12)
            throw std::invalid_argument("probabilities must be sorted nonincreasing");
        sum += probs[i];
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("probabilities must sum to 1");
    std::vector<unsigned> lengths(probs.size());
    for (size_t i = 0; i < probs.size(); ++i) {
        const double l = std::ceil(std::log2(1.0 / probs[i]) - 1e-12);
        lengths[i] = l <= 0.0 ? 0 : static_cast<unsigned>(l);
    }
    return lengths;
}

// Canonical code: the first codeword is all zeroes and each subsequent one is
// the previous incremented then left-shifted. Within one length, codeword value
// difference equals rank difference, which is what the encode/decode queries
// exploit: A1/A2 map symbols to ranks and back, D1/D2 hold one entry per
// distinct length and answer predecessor queries by rank and by codeword.
class CanonicalCode {
public:
    struct Codeword {
        uint64_t bits;
        unsigned len;
    };

    struct Group {
        uint32_t first_rank;  // D1 key
        uint64_t first_code;  // D2 key, left-aligned via len
        unsigned len;
        uint32_t count;
    };

    CanonicalCode() = default;

    /// `lengths[rank]`, nondecreasing, Kraft sum <= 1, no zero lengths.
    /// `symbol_of_rank` defaults to the identity.
    static CanonicalCode build(std::span<const unsigned> lengths,
                               std::span<const uint32_t> symbol_of_rank = {}) {
        if (lengths.empty()) throw std::invalid_argument("cannot build an empty code");
        CanonicalCode c;
        const uint32_t sigma = static_cast<uint32_t>(lengths.size());
        c.max_len_ = lengths.back();
        if (c.max_len_ > 62) throw std::invalid_argument("codeword length above 62 bits");

        // Kraft check, scaled by 2^max_len to stay in integers.
        uint64_t kraft = 0;
        for (size_t i = 0; i < lengths.size(); ++i) {
            if (lengths[i] == 0) throw std::invalid_argument("zero-length codeword");
            if (i > 0 && lengths[i] < lengths[i - 1])
                throw std::invalid_argument("lengths must be nondecreasing in rank order");
            kraft += uint64_t{1} << (c.max_len_ - lengths[i]);
        }
        if (kraft > (uint64_t{1} << c.max_len_))
            throw std::invalid_argument("lengths violate the Kraft inequality");

        c.sym_of_.resize(sigma);
        if (symbol_of_rank.empty()) {
            std::iota(c.sym_of_.begin(), c.sym_of_.end(), 0);
        } else {
            if (symbol_of_rank.size() != sigma)
                throw std::invalid_argument("rank permutation size mismatch");
            c.sym_of_.assign(symbol_of_rank.begin(), symbol_of_rank.end());
        }
        c.rank_of_.assign(sigma, 0);
        for (uint32_t r = 0; r < sigma; ++r) c.rank_of_[c.sym_of_[r]] = r;

        uint64_t code = 0;
        for (uint32_t r = 0; r < sigma; ++r) {
            if (r > 0) code = (code + 1) << (lengths[r] - lengths[r - 1]);
            if (c.groups_.empty() || c.groups_.back().len != lengths[r])
                c.groups_.push_back({r, code, lengths[r], 0});
            ++c.groups_.back().count;
        }
        return c;
    }

    uint32_t size() const { return static_cast<uint32_t>(sym_of_.size()); }
    unsigned max_len() const { return max_len_; }
    size_t group_count() const { return groups_.size(); }

    uint32_t rank_of(uint32_t symbol) const { return rank_of_.at(symbol); }
    uint32_t symbol_at(uint32_t rank) const { return sym_of_.at(rank); }

    unsigned length_of(uint32_t symbol) const { return group_of_rank(rank_of_.at(symbol)).len; }

    /// rank = A1[a]; (r0, c0) = D1.pred(rank); codeword = c0 + (rank - r0).
    Codeword encode(uint32_t symbol) const {
        if (symbol >= rank_of_.size()) throw std::invalid_argument("symbol outside the alphabet");
        const uint32_t rank = rank_of_[symbol];
        const Group& g = group_of_rank(rank);
        return {g.first_code + (rank - g.first_rank), g.len};
    }

    /// `window` holds the next max_len bits left-aligned (zero-padded at stream
    /// end). (c0, r0) = D2.pred(window); rank = r0 + (window prefix - c0).
    std::pair<uint32_t, unsigned> decode(uint64_t window) const {
        const Group& g = group_of_window(window);
        const uint64_t prefix = window >> (max_len_ - g.len);
        const uint64_t offset = prefix - g.first_code;
        if (offset >= g.count) throw CorruptError("no codeword matches the bit window");
        return {sym_of_[g.first_rank + static_cast<uint32_t>(offset)], g.len};
    }

    const std::vector<Group>& groups() const { return groups_; }

    /// sigma, then per-symbol lengths, all gamma-coded; enough to rebuild the
    /// code with ranks assigned by (length, symbol index).
    void serialize(BitSink& sink) const {
        gamma_encode(sink, size());
        for (uint32_t a = 0; a < size(); ++a) gamma_encode(sink, length_of(a));
    }

    static CanonicalCode deserialize(BitSource& src) {
        const uint64_t sigma = gamma_decode(src);
        if (sigma == 0 || sigma > (uint64_t{1} << 31)) throw CorruptError("bad code table size");
        std::vector<std::pair<unsigned, uint32_t>> by_len(sigma);
        for (uint32_t a = 0; a < sigma; ++a) {
            const uint64_t l = gamma_decode(src);
            if (l == 0 || l > 62) throw CorruptError("bad codeword length");
            by_len[a] = {static_cast<unsigned>(l), a};
        }
        std::sort(by_len.begin(), by_len.end());
        std::vector<unsigned> lengths(sigma);
        std::vector<uint32_t> order(sigma);
        for (size_t r = 0; r < by_len.size(); ++r) {
            lengths[r] = by_len[r].first;
            order[r] = by_len[r].second;
        }
        try {
            return build(lengths, order);
        } catch (const std::invalid_argument& e) {
            throw CorruptError(e.what());
        }
    }

private:
    const Group& group_of_rank(uint32_t rank) const {
        auto it = std::upper_bound(groups_.begin(), groups_.end(), rank,
                                   [](uint32_t r, const Group& g) { return r < g.first_rank; });
        return *(it - 1);
    }

    const Group& group_of_window(uint64_t window) const {
        auto it = std::upper_bound(
            groups_.begin(), groups_.end(), window, [this](uint64_t w, const Group& g) {
                return w < (g.first_code << (max_len_ - g.len));
            });
        return *(it - 1);
    }

    std::vector<uint32_t> rank_of_; // A1
    std::vector<uint32_t> sym_of_;  // A2
    std::vector<Group> groups_;     // D1/D2, one entry per distinct length
    unsigned max_len_ = 0;
};

} // namespace sqz

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "sqz/bitio.hpp"
#include "sqz/canonical_shannon.hpp"
#include "sqz/error.hpp"

namespace sqz {

// Gallager's structure for maintaining symbols sorted by count under
// increments: counts along the rank order are nonincreasing, equal counts form
// contiguous blocks, and an increment swaps the symbol with its block's leader
// before bumping, restoring order in constant time.
class FrequencyOrder {
public:
    explicit FrequencyOrder(uint32_t sigma)
        : count_(sigma, 1), rank_of_(sigma), sym_of_(sigma), total_(sigma) {
        for (uint32_t a = 0; a < sigma; ++a) rank_of_[a] = sym_of_[a] = a;
        if (sigma > 0) block_head_[1] = 0;
    }

    void bump(uint32_t a) {
        const uint64_t c = count_[a];
        const uint32_t r = rank_of_[a];
        const uint32_t h = block_head_.at(c);
        std::swap(sym_of_[r], sym_of_[h]);
        rank_of_[sym_of_[r]] = r;
        rank_of_[sym_of_[h]] = h;
        if (h + 1 < sym_of_.size() && count_[sym_of_[h + 1]] == c)
            block_head_[c] = h + 1;
        else
            block_head_.erase(c);
        count_[a] = c + 1;
        block_head_.try_emplace(c + 1, h);
        ++total_;
    }

    uint32_t sigma() const { return static_cast<uint32_t>(count_.size()); }
    uint64_t total() const { return total_; } // processed + sigma
    uint64_t count(uint32_t a) const { return count_[a]; }
    uint32_t rank_of(uint32_t a) const { return rank_of_[a]; }
    uint32_t symbol_at(uint32_t r) const { return sym_of_[r]; }
    const std::vector<uint32_t>& order() const { return sym_of_; }

    /// Rank order for a code snapshot: count-sorted order with ties within each
    /// count block broken by symbol index.
    std::vector<uint32_t> snapshot_order() const {
        std::vector<uint32_t> out(sym_of_);
        size_t lo = 0;
        while (lo < out.size()) {
            size_t hi = lo + 1;
            while (hi < out.size() && count_[out[hi]] == count_[out[lo]]) ++hi;
            std::sort(out.begin() + lo, out.begin() + hi);
            lo = hi;
        }
        return out;
    }

private:
    std::vector<uint64_t> count_;
    std::vector<uint32_t> rank_of_; // A1
    std::vector<uint32_t> sym_of_;  // A2
    std::unordered_map<uint64_t, uint32_t> block_head_;
    uint64_t total_;
};

// Adaptive canonical Shannon coder. Every symbol starts with count 1; the code
// in use is a canonical Shannon code for counts/(i + sigma) as they stood at
// the most recent rebuild, at most one rebuild period ago. Encoder and decoder
// run the same schedule, so their states stay bit-identical without side
// information.
namespace detail {

class AdaptiveState {
public:
    AdaptiveState(uint32_t sigma, std::optional<uint64_t> n)
        : sigma_(sigma), n_(n), order_(sigma) {
        if (sigma == 0) throw std::invalid_argument("alphabet must be nonempty");
        period_ = n_ ? period_for(*n_) : period_for(sigma_);
        next_rebuild_ = period_;
        rebuild();
        snapshot_at_ = 0;
    }

    const CanonicalCode& code() const { return active_; }
    uint64_t processed() const { return processed_; }
    uint64_t rebuild_period() const { return period_; }
    uint64_t snapshot_at() const { return snapshot_at_; }
    const FrequencyOrder& order() const { return order_; }

    void advance(uint32_t symbol) {
        order_.bump(symbol);
        ++processed_;
        if (processed_ == next_rebuild_) {
            rebuild();
            snapshot_at_ = processed_;
            if (!n_) period_ = period_for(processed_ + sigma_);
            next_rebuild_ = processed_ + period_;
        }
    }

    uint64_t state_hash() const {
        uint64_t h = 1469598103934665603ull; // FNV-1a
        auto mix = [&h](uint64_t v) {
            for (int i = 0; i < 8; ++i) {
                h ^= (v >> (8 * i)) & 0xff;
                h *= 1099511628211ull;
            }
        };
        mix(processed_);
        mix(next_rebuild_);
        for (uint32_t a = 0; a < sigma_; ++a) mix(order_.count(a));
        for (uint32_t r = 0; r < sigma_; ++r) {
            mix(active_.symbol_at(r));
            mix(active_.length_of(active_.symbol_at(r)));
        }
        return h;
    }

    /// Count and table bookkeeping, in bits, for the audit harness.
    uint64_t state_size_bits() const {
        const uint64_t count_bits = ceil_log2_ratio(order_.total() + 1, 1);
        const uint64_t sym_bits = std::bit_width(uint64_t{sigma_});
        return sigma_ * (count_bits + 4 * sym_bits) + active_.group_count() * (64 + 2 * sym_bits);
    }

private:
    static uint64_t period_for(uint64_t scale) {
        const double lg = std::log2(static_cast<double>(std::max<uint64_t>(scale, 2)));
        return std::max<uint64_t>(1, static_cast<uint64_t>(lg * lg));
    }

    void rebuild() {
        const std::vector<uint32_t> order = order_.snapshot_order();
        const uint64_t total = order_.total();
        std::vector<unsigned> lengths(sigma_);
        for (uint32_t r = 0; r < sigma_; ++r)
            lengths[r] = std::max(1u, ceil_log2_ratio(total, order_.count(order[r])));
        active_ = CanonicalCode::build(lengths, order);
    }

    uint32_t sigma_;
    std::optional<uint64_t> n_;
    FrequencyOrder order_;
    CanonicalCode active_;
    uint64_t processed_ = 0;
    uint64_t period_ = 0;
    uint64_t next_rebuild_ = 0;
    uint64_t snapshot_at_ = 0;
};

} // namespace detail

class AdaptiveEncoder {
public:
    /// Pass n when the input length is known up front (fixed rebuild period
    /// floor(log2^2(n + sigma))); otherwise the period grows with the prefix.
    AdaptiveEncoder(uint32_t sigma, std::optional<uint64_t> n = std::nullopt)
        : sigma_(sigma), state_(sigma, n) {}

    void push(uint32_t symbol) {
        if (symbol >= sigma_) throw std::invalid_argument("symbol outside the alphabet");
        const auto cw = state_.code().encode(symbol);
        out_.push_bits(cw.bits, cw.len);
        last_len_ = cw.len;
        state_.advance(symbol);
    }

    void finish() {}

    const BitSink& bits() const { return out_; }
    BitSink take_bits() { return std::move(out_); }

    /// For callers that interleave raw fields between codewords; the decoder
    /// must consume them from the shared source at the same points.
    BitSink& raw_sink() { return out_; }
    unsigned last_codeword_length() const { return last_len_; }
    uint64_t state_hash() const { return state_.state_hash(); }
    uint64_t state_size_bits() const { return state_.state_size_bits(); }
    const detail::AdaptiveState& state() const { return state_; }

private:
    uint32_t sigma_;
    detail::AdaptiveState state_;
    BitSink out_;
    unsigned last_len_ = 0;
};

class AdaptiveDecoder {
public:
    AdaptiveDecoder(uint32_t sigma, std::optional<uint64_t> n, BitSource& src)
        : state_(sigma, n), src_(src) {}

    uint32_t next() {
        const uint64_t window = src_.peek_bits(state_.code().max_len());
        const auto [symbol, len] = state_.code().decode(window);
        if (len > src_.remaining()) throw CorruptError("codeword truncated at stream end");
        src_.skip(len);
        state_.advance(symbol);
        return symbol;
    }

    uint64_t state_hash() const { return state_.state_hash(); }

private:
    detail::AdaptiveState state_;
    BitSource& src_;
};

inline BitSink adaptive_encode(std::span<const uint32_t> s, uint32_t sigma, bool n_known = true) {
    AdaptiveEncoder enc(sigma, n_known ? std::optional<uint64_t>(s.size()) : std::nullopt);
    for (uint32_t a : s) enc.push(a);
    return enc.take_bits();
}

inline std::vector<uint32_t> adaptive_decode(BitSource& src, uint32_t sigma, uint64_t n,
                                             bool n_known = true) {
    AdaptiveDecoder dec(sigma, n_known ? std::optional<uint64_t>(n) : std::nullopt, src);
    std::vector<uint32_t> out;
    out.reserve(n);
    for (uint64_t i = 0; i < n; ++i) out.push_back(dec.next());
    return out;
}

} // namespace sqz

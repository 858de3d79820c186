#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace sqz {

/// Per-symbol occurrence counts over a fixed alphabet [0, sigma).
class FrequencyTable {
public:
    explicit FrequencyTable(uint32_t sigma) : counts_(sigma, 0) {}

    static FrequencyTable from(std::span<const uint32_t> s, uint32_t sigma) {
        FrequencyTable t(sigma);
        for (uint32_t a : s) t.add(a);
        return t;
    }

    void add(uint32_t sym, uint64_t k = 1) {
        if (sym >= counts_.size()) throw std::invalid_argument("symbol out of alphabet range");
        counts_[sym] += k;
        total_ += k;
    }

    uint32_t sigma() const { return static_cast<uint32_t>(counts_.size()); }
    uint64_t total() const { return total_; }
    uint64_t count(uint32_t sym) const { return counts_[sym]; }
    const std::vector<uint64_t>& counts() const { return counts_; }

    /// Number of symbols with nonzero count.
    uint32_t used() const {
        uint32_t u = 0;
        for (uint64_t c : counts_)
            if (c > 0) ++u;
        return u;
    }

private:
    std::vector<uint64_t> counts_;
    uint64_t total_ = 0;
};

/// H_0 in bits per symbol, with the 0 log 0 = 0 convention.
inline double h0(const FrequencyTable& t) {
    if (t.total() == 0) throw std::invalid_argument("entropy of empty input");
    const double n = static_cast<double>(t.total());
    double h = 0.0;
    for (uint64_t c : t.counts()) {
        if (c == 0) continue;
        h += (static_cast<double>(c) / n) * std::log2(n / static_cast<double>(c));
    }
    return h;
}

inline double h0(std::span<const uint32_t> s, uint32_t sigma) {
    return h0(FrequencyTable::from(s, sigma));
}

/// Conditional counts per order-k context. A context is the exact k-tuple
/// preceding a position; the first k positions of a string belong to no context.
class ContextTable {
public:
    ContextTable(unsigned k, uint32_t sigma) : k_(k), sigma_(sigma) {}

    static ContextTable from(std::span<const uint32_t> s, unsigned k, uint32_t sigma) {
        ContextTable t(k, sigma);
        for (size_t i = k; i < s.size(); ++i) t.add(s.subspan(i - k, k), s[i]);
        return t;
    }

    void add(std::span<const uint32_t> ctx, uint32_t next) {
        auto [it, fresh] = map_.try_emplace(pack(ctx), sigma_);
        it->second.add(next);
    }

    unsigned order() const { return k_; }
    size_t context_count() const { return map_.size(); }

    template <typename F>
    void visit(F&& f) const {
        for (const auto& [key, table] : map_) f(table);
    }

private:
    std::string pack(std::span<const uint32_t> ctx) const {
        std::string key(ctx.size() * sizeof(uint32_t), '\0');
        if (!ctx.empty()) std::memcpy(key.data(), ctx.data(), key.size());
        return key;
    }

    unsigned k_;
    uint32_t sigma_;
    std::unordered_map<std::string, FrequencyTable> map_;
};

/// H_k(s) = (1/n) * sum over k-tuples w of |w_s| * H_0(w_s); agrees with h0 at k = 0.
inline double hk(std::span<const uint32_t> s, unsigned k, uint32_t sigma) {
    if (k >= s.size()) throw std::invalid_argument("entropy order must be smaller than the string");
    if (k == 0) return h0(s, sigma);
    const ContextTable ctx = ContextTable::from(s, k, sigma);
    double acc = 0.0;
    ctx.visit([&](const FrequencyTable& t) { acc += static_cast<double>(t.total()) * h0(t); });
    return acc / static_cast<double>(s.size());
}

/// Checks H_k(s1)|s1| + H_k(s2)|s2| <= H_k(s1 s2)|s1 s2| within 1e-9.
inline bool subadditivity_check(std::span<const uint32_t> s1, std::span<const uint32_t> s2,
                                unsigned k, uint32_t sigma) {
    std::vector<uint32_t> cat(s1.begin(), s1.end());
    cat.insert(cat.end(), s2.begin(), s2.end());
    const double lhs = hk(s1, k, sigma) * static_cast<double>(s1.size()) +
                       hk(s2, k, sigma) * static_cast<double>(s2.size());
    const double rhs = hk(cat, k, sigma) * static_cast<double>(cat.size());
    return lhs <= rhs + 1e-9;
}

/// Lexicographically-least binary De Bruijn cycle of order k, as 0/1 symbols of
/// length 2^k. Built by concatenating the Lyndon words over {0,1} whose length
/// divides k.
inline std::vector<uint32_t> gen_debruijn(unsigned k) {
    if (k < 1 || k > 24) throw std::invalid_argument("De Bruijn order must be in [1, 24]");
    std::vector<uint32_t> seq;
    seq.reserve(size_t{1} << k);
    std::vector<uint32_t> a(2 * size_t{k} + 1, 0);
    // Iterative form of the classic recursion db(t, p).
    struct Frame {
        unsigned t, p;
        int stage; // 0: enter, 1: after db(t+1, p), 2: after db(t+1, t)
    };
    std::vector<Frame> stack;
    stack.push_back({1, 1, 0});
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.t > k) {
            if (k % f.p == 0)
                for (unsigned i = 1; i <= f.p; ++i) seq.push_back(a[i]);
            stack.pop_back();
            continue;
        }
        if (f.stage == 0) {
            f.stage = 1;
            a[f.t] = a[f.t - f.p];
            stack.push_back({f.t + 1, f.p, 0});
        } else if (f.stage == 1 && a[f.t - f.p] + 1 < 2) {
            f.stage = 2;
            a[f.t] = a[f.t - f.p] + 1;
            stack.push_back({f.t + 1, f.t, 0});
        } else {
            stack.pop_back();
        }
    }
    return seq;
}

/// t^floor(n/|t|) followed by the proper prefix of t filling to length n.
inline std::vector<uint32_t> gen_periodic(std::span<const uint32_t> t, size_t n) {
    if (t.empty()) throw std::invalid_argument("period must be nonempty");
    if (n < t.size()) throw std::invalid_argument("target length shorter than period");
    std::vector<uint32_t> out;
    out.reserve(n);
    while (out.size() < n) out.push_back(t[out.size() % t.size()]);
    return out;
}

} // namespace sqz

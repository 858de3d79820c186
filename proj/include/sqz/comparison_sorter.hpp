#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace sqz {

namespace detail {

/// Root index for weight bisection over prefix sums: the split whose larger
/// side is smallest, ties to the left.
inline size_t bisect_split(const std::vector<double>& prefix, size_t lo, size_t hi) {
    size_t a = lo, b = hi - 1;
    while (a < b) {
        const size_t mid = (a + b) / 2;
        if (prefix[mid] - prefix[lo] >= prefix[hi] - prefix[mid + 1])
            b = mid;
        else
            a = mid + 1;
    }
    if (a > lo) {
        const auto larger = [&](size_t j) {
            return std::max(prefix[j] - prefix[lo], prefix[hi] - prefix[j + 1]);
        };
        if (larger(a - 1) <= larger(a)) return a - 1;
    }
    return a;
}

} // namespace detail

/// Weight-bisection search tree over sorted keys; key depths come out at most
/// log2(1/p) + 2.
template <typename Key>
class BisectionTree {
public:
    struct Node {
        Key key;
        std::unique_ptr<Node> l, r;
    };

    static BisectionTree build(const std::vector<Key>& keys, const std::vector<double>& probs) {
        if (keys.size() != probs.size() || keys.empty())
            throw std::invalid_argument("keys and probabilities must match and be nonempty");
        for (double p : probs)
            if (p <= 0.0)
                throw std::invalid_argument("weight bisection requires positive probabilities");
        std::vector<double> prefix(probs.size() + 1, 0.0);
        for (size_t i = 0; i < probs.size(); ++i) prefix[i + 1] = prefix[i] + probs[i];
        BisectionTree t;
        t.root_ = build_range(keys, prefix, 0, keys.size());
        return t;
    }

    const Node* root() const { return root_.get(); }

    /// Depth of every key, in key order.
    std::vector<unsigned> depths() const {
        std::vector<unsigned> out;
        walk(root_.get(), 0, out);
        return out;
    }

    unsigned height() const {
        unsigned h = 0;
        for (unsigned d : depths()) h = std::max(h, d);
        return h;
    }

private:
    static std::unique_ptr<Node> build_range(const std::vector<Key>& keys,
                                             const std::vector<double>& prefix, size_t lo,
                                             size_t hi) {
        if (lo >= hi) return nullptr;
        const size_t best = detail::bisect_split(prefix, lo, hi);
        auto node = std::make_unique<Node>(Node{keys[best], nullptr, nullptr});
        node->l = build_range(keys, prefix, lo, best);
        node->r = build_range(keys, prefix, best + 1, hi);
        return node;
    }

    static void walk(const Node* n, unsigned d, std::vector<unsigned>& out) {
        if (n == nullptr) return;
        walk(n->l.get(), d + 1, out);
        out.push_back(d);
        walk(n->r.get(), d + 1, out);
    }

    std::unique_ptr<Node> root_;
};

// Online stable multiset sorter. Distinct elements seen by the last rebuild
// live in a bisection tree built from their snapshot frequencies occ(a)/i;
// elements first seen since then live in AVL trees hanging off the extended
// leaves. The tree is rebuilt whenever the number of elements processed since
// the last rebuild reaches the number of distinct elements known then. One
// ternary comparison is counted per node visited, so finding a key at depth d
// costs d + 1: the last comparison confirms the search stops there.
template <typename Key, typename Compare = std::less<Key>>
class ComparisonSorter {
public:
    explicit ComparisonSorter(Compare cmp = Compare()) : less_(std::move(cmp)) {}

    void push(const Key& x) {
        const uint64_t pos = ++n_;
        if (root_ == nullptr) {
            avl_insert(pre_, x, pos);
        } else {
            Inner* cur = root_.get();
            for (;;) {
                const int c = compare(x, cur->key);
                if (c == 0) {
                    cur->occ.push_back(pos);
                    break;
                }
                if (c < 0) {
                    if (cur->l) {
                        cur = cur->l.get();
                    } else {
                        avl_insert(cur->avl_l, x, pos);
                        break;
                    }
                } else {
                    if (cur->r) {
                        cur = cur->r.get();
                    } else {
                        avl_insert(cur->avl_r, x, pos);
                        break;
                    }
                }
            }
        }
        ++since_rebuild_;
        if (since_rebuild_ >= std::max<uint64_t>(distinct_at_rebuild_, 1)) rebuild();
    }

    void finish() {}

    uint64_t comparisons() const { return comparisons_; }
    uint64_t size() const { return n_; }
    size_t distinct() const { return distinct_; }
    uint64_t rebuilds() const { return rebuilds_; }
    size_t max_avl_size_seen() const { return max_avl_size_; }

    /// Stable-sort permutation: in-order traversal, occurrence lists in arrival
    /// order.
    std::vector<uint64_t> permutation() const {
        std::vector<uint64_t> out;
        out.reserve(n_);
        visit_inorder([&out](const Key&, const std::vector<uint64_t>& occ) {
            out.insert(out.end(), occ.begin(), occ.end());
        });
        return out;
    }

    template <typename F>
    void visit_inorder(F&& f) const {
        if (root_ == nullptr)
            visit_avl(pre_.root.get(), f);
        else
            visit_inner(root_.get(), f);
    }

    /// Depths of the bisection nodes' keys, for the depth-bound audit.
    std::vector<std::pair<Key, unsigned>> inner_depths() const {
        std::vector<std::pair<Key, unsigned>> out;
        inner_depth_walk(root_.get(), 0, out);
        return out;
    }

    uint64_t state_size_bits() const {
        const uint64_t pos_bits = std::bit_width(n_ + 1);
        return (n_ + 3 * distinct_) * pos_bits;
    }

private:
    struct AvlNode {
        Key key;
        std::vector<uint64_t> occ;
        std::unique_ptr<AvlNode> l, r;
        int height = 1;
    };
    struct Avl {
        std::unique_ptr<AvlNode> root;
        size_t size = 0;
    };
    struct Inner {
        Key key;
        std::vector<uint64_t> occ;
        std::unique_ptr<Inner> l, r;
        Avl avl_l, avl_r;
    };

    int compare(const Key& a, const Key& b) {
        ++comparisons_;
        if (less_(a, b)) return -1;
        if (less_(b, a)) return 1;
        return 0;
    }

    static int height(const AvlNode* n) { return n ? n->height : 0; }
    static void fix(AvlNode* n) {
        n->height = 1 + std::max(height(n->l.get()), height(n->r.get()));
    }

    static void rotate_left(std::unique_ptr<AvlNode>& n) {
        auto r = std::move(n->r);
        n->r = std::move(r->l);
        fix(n.get());
        r->l = std::move(n);
        n = std::move(r);
        fix(n.get());
    }

    static void rotate_right(std::unique_ptr<AvlNode>& n) {
        auto l = std::move(n->l);
        n->l = std::move(l->r);
        fix(n.get());
        l->r = std::move(n);
        n = std::move(l);
        fix(n.get());
    }

    static void rebalance(std::unique_ptr<AvlNode>& n) {
        fix(n.get());
        const int bal = height(n->l.get()) - height(n->r.get());
        if (bal > 1) {
            if (height(n->l->l.get()) < height(n->l->r.get())) rotate_left(n->l);
            rotate_right(n);
        } else if (bal < -1) {
            if (height(n->r->r.get()) < height(n->r->l.get())) rotate_right(n->r);
            rotate_left(n);
        }
    }

    bool avl_insert_node(std::unique_ptr<AvlNode>& slot, const Key& x, uint64_t pos) {
        if (slot == nullptr) {
            slot = std::make_unique<AvlNode>(AvlNode{x, {pos}, nullptr, nullptr, 1});
            return true;
        }
        const int c = compare(x, slot->key);
        bool grew = false;
        if (c == 0)
            slot->occ.push_back(pos);
        else if (c < 0)
            grew = avl_insert_node(slot->l, x, pos);
        else
            grew = avl_insert_node(slot->r, x, pos);
        if (grew) rebalance(slot);
        return grew;
    }

    void avl_insert(Avl& avl, const Key& x, uint64_t pos) {
        if (avl_insert_node(avl.root, x, pos)) {
            ++avl.size;
            ++distinct_;
            max_avl_size_ = std::max(max_avl_size_, avl.size);
        }
    }

    template <typename F>
    void visit_avl(const AvlNode* n, F& f) const {
        if (n == nullptr) return;
        visit_avl(n->l.get(), f);
        f(n->key, n->occ);
        visit_avl(n->r.get(), f);
    }

    template <typename F>
    void visit_inner(const Inner* n, F& f) const {
        if (n == nullptr) return;
        if (n->l)
            visit_inner(n->l.get(), f);
        else
            visit_avl(n->avl_l.root.get(), f);
        f(n->key, n->occ);
        if (n->r)
            visit_inner(n->r.get(), f);
        else
            visit_avl(n->avl_r.root.get(), f);
    }

    static void inner_depth_walk(const Inner* n, unsigned d,
                                 std::vector<std::pair<Key, unsigned>>& out) {
        if (n == nullptr) return;
        inner_depth_walk(n->l.get(), d + 1, out);
        out.emplace_back(n->key, d);
        inner_depth_walk(n->r.get(), d + 1, out);
    }

    void collect_moving(AvlNode* n, std::vector<Key>& keys,
                        std::vector<std::vector<uint64_t>>& occs) {
        if (n == nullptr) return;
        collect_moving(n->l.get(), keys, occs);
        keys.push_back(n->key);
        occs.push_back(std::move(n->occ));
        collect_moving(n->r.get(), keys, occs);
    }

    void collect_moving(Inner* n, std::vector<Key>& keys,
                        std::vector<std::vector<uint64_t>>& occs) {
        if (n == nullptr) return;
        if (n->l)
            collect_moving(n->l.get(), keys, occs);
        else
            collect_moving(n->avl_l.root.get(), keys, occs);
        keys.push_back(n->key);
        occs.push_back(std::move(n->occ));
        if (n->r)
            collect_moving(n->r.get(), keys, occs);
        else
            collect_moving(n->avl_r.root.get(), keys, occs);
    }

    // Rebuilding moves each occurrence list once, so all rebuilds together
    // cost time linear in the number of elements processed.
    void rebuild() {
        std::vector<Key> keys;
        std::vector<std::vector<uint64_t>> occs;
        if (root_ == nullptr)
            collect_moving(pre_.root.get(), keys, occs);
        else
            collect_moving(root_.get(), keys, occs);
        if (keys.empty()) return;
        std::vector<double> prefix(keys.size() + 1, 0.0);
        for (size_t i = 0; i < keys.size(); ++i)
            prefix[i + 1] = prefix[i] + static_cast<double>(occs[i].size()) / static_cast<double>(n_);
        root_ = build_inner(keys, occs, prefix, 0, keys.size());
        pre_ = Avl{};
        distinct_at_rebuild_ = keys.size();
        since_rebuild_ = 0;
        ++rebuilds_;
    }

    std::unique_ptr<Inner> build_inner(const std::vector<Key>& keys,
                                       std::vector<std::vector<uint64_t>>& occs,
                                       const std::vector<double>& prefix, size_t lo, size_t hi) {
        if (lo >= hi) return nullptr;
        const size_t best = detail::bisect_split(prefix, lo, hi);
        auto node = std::make_unique<Inner>();
        node->key = keys[best];
        node->occ = std::move(occs[best]);
        node->l = build_inner(keys, occs, prefix, lo, best);
        node->r = build_inner(keys, occs, prefix, best + 1, hi);
        return node;
    }

    Compare less_;
    std::unique_ptr<Inner> root_;
    Avl pre_; // holds everything until the first rebuild
    uint64_t n_ = 0;
    uint64_t comparisons_ = 0;
    uint64_t since_rebuild_ = 0;
    size_t distinct_ = 0;
    size_t distinct_at_rebuild_ = 0;
    uint64_t rebuilds_ = 0;
    size_t max_avl_size_ = 0;
};

} // namespace sqz

#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "sqz/bitio.hpp"

namespace sqz {

// One-pass encoding of one distinct element's occurrence positions: the first
// position, then gaps, all gamma-coded. Each run of gap-1s is stored as a
// single 1 followed by the gamma-coded run length; the trailing run stays
// pending until the list is closed.
class GapList {
public:
    void record(uint64_t j) {
        if (j <= last_) throw std::invalid_argument("positions must be strictly increasing");
        if (count_ == 0) {
            gamma_encode(enc_, j);
        } else if (j - last_ == 1) {
            if (run_ > 0) {
                ++run_;
            } else {
                gamma_encode(enc_, 1);
                run_ = 1;
            }
        } else {
            flush_run();
            gamma_encode(enc_, j - last_);
        }
        last_ = j;
        ++count_;
    }

    /// Flushes the pending run; call once, when the pass is over.
    void close() { flush_run(); }

    /// Decodes a closed list back to absolute positions (positive partial sums).
    std::vector<uint64_t> positions() const {
        std::vector<uint64_t> out;
        out.reserve(count_);
        BitSource src(enc_);
        uint64_t pos = 0;
        while (src.remaining() > 0) {
            const uint64_t g = gamma_decode(src);
            if (!out.empty() && g == 1) {
                uint64_t run = gamma_decode(src);
                while (run-- > 0) out.push_back(++pos);
            } else {
                pos += g;
                out.push_back(pos);
            }
        }
        return out;
    }

    /// Encoding size including the gamma codeword a pending run would take.
    uint64_t bits() const { return enc_.bit_size() + (run_ > 0 ? gamma_length(run_) : 0); }

    uint64_t count() const { return count_; }
    uint64_t last() const { return last_; }
    const BitSink& encoding() const { return enc_; }

private:
    void flush_run() {
        if (run_ > 0) {
            gamma_encode(enc_, run_);
            run_ = 0;
        }
    }

    BitSink enc_;
    uint64_t last_ = 0;
    uint64_t count_ = 0;
    uint64_t run_ = 0;
};

// Splay tree of distinct elements, one gap list per node. Processing element
// s_j extends its list by the paper's four cases and splays the touched node
// to the root; the stable-sort permutation falls out of an in-order traversal.
template <typename Key, typename Compare = std::less<Key>>
class GapListSorter {
public:
    explicit GapListSorter(unsigned key_bits = 32, Compare cmp = Compare())
        : key_bits_(key_bits), less_(std::move(cmp)) {}

    GapListSorter(const GapListSorter&) = delete;
    GapListSorter& operator=(const GapListSorter&) = delete;
    ~GapListSorter() { clear(); }

    void push(const Key& k) {
        const uint64_t j = ++n_;
        root_ = splay(root_, k);
        if (root_ == nullptr || less_(k, root_->key) || less_(root_->key, k)) {
            Node* nn = new Node{k, {}, nullptr, nullptr};
            if (root_ != nullptr) {
                if (less_(k, root_->key)) {
                    nn->l = root_->l;
                    nn->r = root_;
                    root_->l = nullptr;
                } else {
                    nn->r = root_->r;
                    nn->l = root_;
                    root_->r = nullptr;
                }
            }
            root_ = nn;
            ++distinct_;
        }
        root_->list.record(j);
    }

    void finish() {}

    uint64_t size() const { return n_; }
    size_t distinct() const { return distinct_; }

    /// In-order visit of (key, list). Lists are closed first.
    template <typename F>
    void visit(F&& f) const {
        const_cast<GapListSorter*>(this)->close_all();
        std::vector<const Node*> stack;
        const Node* cur = root_;
        while (cur != nullptr || !stack.empty()) {
            while (cur != nullptr) {
                stack.push_back(cur);
                cur = cur->l;
            }
            cur = stack.back();
            stack.pop_back();
            f(cur->key, cur->list);
            cur = cur->r;
        }
    }

    /// The stable-sort permutation pi = l_1 ... l_sigma, 1-based positions.
    std::vector<uint64_t> permutation() const {
        std::vector<uint64_t> pi;
        pi.reserve(n_);
        visit([&pi](const Key&, const GapList& l) {
            for (uint64_t p : l.positions()) pi.push_back(p);
        });
        return pi;
    }

    /// Replays the original sequence with a priority queue keyed on each
    /// element's next occurrence position.
    std::vector<Key> recover() const {
        struct Entry {
            uint64_t pos;
            size_t idx;
        };
        auto cmp = [](const Entry& a, const Entry& b) { return a.pos > b.pos; };
        std::vector<std::pair<Key, std::vector<uint64_t>>> lists;
        visit([&lists](const Key& k, const GapList& l) { lists.emplace_back(k, l.positions()); });
        std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> q(cmp);
        std::vector<size_t> cursor(lists.size(), 0);
        for (size_t i = 0; i < lists.size(); ++i)
            if (!lists[i].second.empty()) q.push({lists[i].second[0], i});
        std::vector<Key> out;
        out.reserve(n_);
        while (!q.empty()) {
            const auto [pos, idx] = q.top();
            q.pop();
            out.push_back(lists[idx].first);
            if (++cursor[idx] < lists[idx].second.size())
                q.push({lists[idx].second[cursor[idx]], idx});
        }
        return out;
    }

    /// Total bits across all gap-list encodings, pending runs included.
    uint64_t encoding_bits() const {
        uint64_t total = 0;
        for_each_node(root_, [&total](const Node* n) { total += n->list.bits(); });
        return total;
    }

    /// Encodings plus per-node bookkeeping: last position and pending run at
    /// position width, key and two child links at key width.
    uint64_t state_size_bits() const {
        const uint64_t pos_bits = std::bit_width(n_ + 1);
        return encoding_bits() + distinct_ * (2 * pos_bits + 3 * key_bits_);
    }

    /// BST order check, for the structural tests.
    bool bst_valid() const {
        bool ok = true;
        bool first = true;
        Key prev{};
        for_each_node_inorder(root_, [&](const Node* n) {
            if (!first && !less_(prev, n->key)) ok = false;
            prev = n->key;
            first = false;
        });
        return ok;
    }

private:
    struct Node {
        Key key;
        GapList list;
        Node* l = nullptr;
        Node* r = nullptr;
    };

    // Top-down splay: brings the last-touched node (the key, or its in-order
    // neighbour on a miss) to the root.
    Node* splay(Node* t, const Key& key) const {
        if (t == nullptr) return nullptr;
        Node* left_root = nullptr;
        Node* right_root = nullptr;
        Node** left_hook = &left_root;
        Node** right_hook = &right_root;
        for (;;) {
            if (less_(key, t->key)) {
                if (t->l == nullptr) break;
                if (less_(key, t->l->key)) {
                    Node* y = t->l;
                    t->l = y->r;
                    y->r = t;
                    t = y;
                    if (t->l == nullptr) break;
                }
                *right_hook = t;
                right_hook = &t->l;
                t = t->l;
            } else if (less_(t->key, key)) {
                if (t->r == nullptr) break;
                if (less_(t->r->key, key)) {
                    Node* y = t->r;
                    t->r = y->l;
                    y->l = t;
                    t = y;
                    if (t->r == nullptr) break;
                }
                *left_hook = t;
                left_hook = &t->r;
                t = t->r;
            } else {
                break;
            }
        }
        *left_hook = t->l;
        *right_hook = t->r;
        t->l = left_root;
        t->r = right_root;
        return t;
    }

    template <typename F>
    void for_each_node(const Node* t, F&& f) const {
        std::vector<const Node*> stack;
        if (t != nullptr) stack.push_back(t);
        while (!stack.empty()) {
            const Node* n = stack.back();
            stack.pop_back();
            if (n->l != nullptr) stack.push_back(n->l);
            if (n->r != nullptr) stack.push_back(n->r);
            f(n); // children already queued, so f may delete n
        }
    }

    template <typename F>
    void for_each_node_inorder(const Node* t, F&& f) const {
        std::vector<const Node*> stack;
        const Node* cur = t;
        while (cur != nullptr || !stack.empty()) {
            while (cur != nullptr) {
                stack.push_back(cur);
                cur = cur->l;
            }
            cur = stack.back();
            stack.pop_back();
            f(cur);
            cur = cur->r;
        }
    }

    void close_all() {
        for_each_node(root_, [](const Node* n) { const_cast<Node*>(n)->list.close(); });
    }

    void clear() {
        for_each_node(root_, [](const Node* n) { delete const_cast<Node*>(n); });
        root_ = nullptr;
    }

    unsigned key_bits_;
    Compare less_;
    Node* root_ = nullptr;
    uint64_t n_ = 0;
    size_t distinct_ = 0;
};

} // namespace sqz

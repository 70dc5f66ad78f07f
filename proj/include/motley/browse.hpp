#pragma once

/**
 * @file browse.hpp
 *
 * Incremental nearest-neighbor browsing over an RTree.
 *
 * Elements (nodes and tuples) sit in a priority queue keyed by their
 * distance from the query. An optional prune predicate is consulted when a
 * child is about to be inserted and again when an element reaches the front.
 * Pruned elements are parked rather than dropped: a caller whose state
 * regresses (so that earlier prune decisions may no longer hold) calls
 * revive() with a watermark, and parked elements return to the queue. Tuples
 * at or below the watermark were already passed over in browse order and are
 * discarded on revival.
 */

#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "geometry.hpp"
#include "rtree.hpp"
#include "types.hpp"

namespace motley {

/**
 * Queue key. At equal distance nodes come before tuples so that every tuple
 * at a given distance is enqueued before any of them is returned; tuples
 * then leave in ascending id order.
 */
struct BrowseKey {
    enum Kind : std::uint8_t { node = 0, tuple = 1 };

    double distance = 0.0;
    Kind kind = tuple;
    std::uint64_t id = 0;

    friend auto operator<=>(const BrowseKey&, const BrowseKey&) = default;

    static BrowseKey lowest() {
        return {-std::numeric_limits<double>::infinity(), node, 0};
    }

    /// Covers every tuple with distance <= d.
    static BrowseKey through(double d) {
        return {d, tuple, std::numeric_limits<std::uint64_t>::max()};
    }
};

struct Candidate {
    TupleId id = 0;
    double distance = 0.0;

    BrowseKey key() const { return {distance, BrowseKey::tuple, id}; }
};

class Browser {
public:
    using PrunePredicate = std::function<bool(MbrView)>;

    Browser(const RTree& tree, const Query& q)
        : tree_(&tree), projection_(q, tree.dims()), read_(tree.size(), false) {
        seed();
    }

    void set_prune(PrunePredicate prune) { prune_ = std::move(prune); }

    /**
     * Nearest tuple not yet returned and not pruned, left at the front of
     * the queue; nullopt once the queue is exhausted.
     */
    std::optional<Candidate> peek() {
        while (!queue_.empty()) {
            const Element top = queue_.top();
            if (prune_ && prune_(box_of(top))) {
                queue_.pop();
                parked_.push_back(top);
                continue;
            }
            if (top.key.kind == BrowseKey::tuple) {
                return Candidate{top.key.id, top.key.distance};
            }
            queue_.pop();
            expand(top);
        }
        return std::nullopt;
    }

    void pop() {
        if (!queue_.empty()) {
            queue_.pop();
        }
    }

    std::optional<Candidate> next() {
        auto c = peek();
        if (c) {
            pop();
        }
        return c;
    }

    /// Returns parked elements to the queue; tuples with key <= `upto` are dropped.
    void revive(BrowseKey upto) {
        auto parked = std::move(parked_);
        parked_.clear();
        for (auto& e : parked) {
            e.skip_upto = std::max(e.skip_upto, upto);
            enqueue(e);
        }
    }

    /// Restarts browsing from the root without pruning. Read counters persist.
    void rewind() {
        prune_ = nullptr;
        parked_.clear();
        queue_ = {};
        seed();
    }

    const ExecutionStats& stats() const { return stats_; }
    std::size_t parked() const { return parked_.size(); }

private:
    struct Element {
        BrowseKey key;
        std::size_t ref = 0;  // node id, or leaf entry index for tuples
        BrowseKey skip_upto = BrowseKey::lowest();

        bool operator>(const Element& o) const { return key > o.key; }
    };

    void seed() {
        if (auto root = tree_->root()) {
            enqueue({{projection_.mindist(tree_->box(*root)), BrowseKey::node, *root}, *root,
                     BrowseKey::lowest()});
        }
    }

    MbrView box_of(const Element& e) const {
        return e.key.kind == BrowseKey::node
                   ? tree_->box(static_cast<RTree::NodeId>(e.ref))
                   : tree_->entry_box(e.ref);
    }

    void expand(const Element& e) {
        ++stats_.nodes_expanded;
        const auto node = static_cast<RTree::NodeId>(e.ref);
        if (tree_->is_leaf(node)) {
            const auto [first, count] = tree_->entries(node);
            for (std::size_t i = first; i < first + count; ++i) {
                const double d = projection_.distance(tree_->entry_point(i));
                admit({{d, BrowseKey::tuple, tree_->entry_id(i)}, i, e.skip_upto});
            }
            return;
        }
        for (RTree::NodeId child : tree_->children(node)) {
            admit({{projection_.mindist(tree_->box(child)), BrowseKey::node, child}, child,
                   e.skip_upto});
        }
    }

    void admit(const Element& e) {
        if (prune_ && prune_(box_of(e))) {
            parked_.push_back(e);
            return;
        }
        enqueue(e);
    }

    void enqueue(const Element& e) {
        if (e.key.kind == BrowseKey::tuple) {
            if (e.key <= e.skip_upto) {
                return;
            }
            if (!read_[e.ref]) {
                read_[e.ref] = true;
                ++stats_.tuples_read;
            }
        } else if (projection_.maxdist(box_of(e)) < e.skip_upto.distance) {
            return;
        }
        queue_.push(e);
        stats_.pqueue_peak = std::max(stats_.pqueue_peak, queue_.size());
    }

    const RTree* tree_;
    SpatialProjection projection_;
    PrunePredicate prune_;
    std::priority_queue<Element, std::vector<Element>, std::greater<>> queue_;
    std::vector<Element> parked_;
    std::vector<bool> read_;
    ExecutionStats stats_;
};

} // namespace motley

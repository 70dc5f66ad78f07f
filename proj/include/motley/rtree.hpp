#pragma once

/**
 * @file rtree.hpp
 *
 * Static R-tree over the numeric attributes of a dataset, bulk loaded with
 * sort-tile-recursive packing. Leaves keep a copy of each tuple's indexed
 * coordinates next to its id.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "geometry.hpp"
#include "types.hpp"

namespace motley {

struct RTreeConfig {
    std::size_t branching = 64;
    double fill = 0.7;

    /// Entries per node produced by the bulk loader.
    std::size_t node_capacity() const {
        const auto c = static_cast<std::size_t>(std::floor(static_cast<double>(branching) * fill));
        return std::clamp<std::size_t>(c, 2, branching);
    }

    void validate() const {
        if (branching < 2) {
            throw ParameterError("branching factor must be at least 2");
        }
        if (!(fill > 0.0 && fill <= 1.0)) {
            throw ParameterError("fill fraction must lie in (0,1]");
        }
    }
};

class RTree {
public:
    using NodeId = std::uint32_t;

    static constexpr char magic[8] = {'M', 'O', 'T', 'L', 'E', 'Y', 'R', 'T'};
    static constexpr std::uint32_t format_version = 1;

    RTree() = default;

    /**
     * Packs every tuple of `ds` into a tree over the attributes `dims`.
     * An empty dataset gives an empty tree that browses as exhausted.
     */
    static RTree build(const Dataset& ds, std::vector<std::size_t> dims, RTreeConfig cfg = {}) {
        cfg.validate();
        if (dims.empty()) {
            throw ValidationError("an index needs at least one dimension");
        }
        for (std::size_t a : dims) {
            if (a >= ds.dimensions()) {
                throw ValidationError("index dimension out of range");
            }
            if (!ds.is_numeric(a)) {
                throw ValidationError("cannot index categorical attribute '" + ds.schema[a].name +
                                      "'");
            }
        }
        RTree t;
        t.dims_ = std::move(dims);
        t.cfg_ = cfg;
        const std::size_t D = t.dims_.size();
        const std::size_t n = ds.size();
        if (n == 0) {
            return t;
        }

        std::vector<double> coords(n * D);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t d = 0; d < D; ++d) {
                coords[r * D + d] = ds.tuples[r].values[t.dims_[d]];
            }
        }
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        auto center = [&](std::size_t item, std::size_t d) { return coords[item * D + d]; };
        const auto groups = t.pack(order, center);

        t.entry_ids_.reserve(n);
        t.entry_points_.reserve(n * D);
        std::vector<NodeId> level;
        for (const auto& [first, count] : groups) {
            const std::size_t entry_first = t.entry_ids_.size();
            for (std::size_t i = first; i < first + count; ++i) {
                const std::size_t r = order[i];
                t.entry_ids_.push_back(ds.tuples[r].id);
                t.entry_points_.insert(t.entry_points_.end(), coords.begin() + r * D,
                                       coords.begin() + (r + 1) * D);
            }
            level.push_back(t.add_leaf(entry_first, count));
        }

        while (level.size() > 1) {
            std::vector<double> centers(level.size() * D);
            for (std::size_t i = 0; i < level.size(); ++i) {
                const auto b = t.box(level[i]);
                for (std::size_t d = 0; d < D; ++d) {
                    centers[i * D + d] = 0.5 * (b.low[d] + b.high[d]);
                }
            }
            std::vector<std::size_t> idx(level.size());
            std::iota(idx.begin(), idx.end(), 0);
            auto node_center = [&](std::size_t item, std::size_t d) { return centers[item * D + d]; };
            const auto parent_groups = t.pack(idx, node_center);
            std::vector<NodeId> parents;
            for (const auto& [first, count] : parent_groups) {
                std::vector<NodeId> kids;
                for (std::size_t i = first; i < first + count; ++i) {
                    kids.push_back(level[idx[i]]);
                }
                parents.push_back(t.add_internal(kids));
            }
            level = std::move(parents);
        }
        t.root_ = level.front();
        return t;
    }

    std::span<const std::size_t> dims() const { return dims_; }
    const RTreeConfig& config() const { return cfg_; }
    std::size_t size() const { return entry_ids_.size(); }
    bool empty() const { return !root_.has_value(); }
    std::optional<NodeId> root() const { return root_; }
    std::size_t node_count() const { return nodes_.size(); }

    bool is_leaf(NodeId n) const { return nodes_[n].leaf; }

    MbrView box(NodeId n) const {
        const std::size_t D = dims_.size();
        const double* base = boxes_.data() + static_cast<std::size_t>(n) * 2 * D;
        return {std::span<const double>(base, D), std::span<const double>(base + D, D)};
    }

    std::span<const NodeId> children(NodeId n) const {
        const auto& node = nodes_[n];
        return {children_.data() + node.first, node.count};
    }

    /// Entry index range [first, first + count) of a leaf.
    std::pair<std::size_t, std::size_t> entries(NodeId n) const {
        return {nodes_[n].first, nodes_[n].count};
    }

    TupleId entry_id(std::size_t e) const { return entry_ids_[e]; }

    std::span<const double> entry_point(std::size_t e) const {
        return {entry_points_.data() + e * dims_.size(), dims_.size()};
    }

    /// Degenerate rectangle of a leaf entry.
    MbrView entry_box(std::size_t e) const { return {entry_point(e), entry_point(e)}; }

    std::size_t height() const {
        if (!root_) {
            return 0;
        }
        std::size_t h = 1;
        NodeId n = *root_;
        while (!is_leaf(n)) {
            n = children(n).front();
            ++h;
        }
        return h;
    }

    /// Invokes `fn(entry_index)` for every leaf entry in depth-first order.
    template <typename Fn>
    void for_each_entry(Fn&& fn) const {
        if (!root_) {
            return;
        }
        std::vector<NodeId> stack{*root_};
        while (!stack.empty()) {
            const NodeId n = stack.back();
            stack.pop_back();
            if (is_leaf(n)) {
                const auto [first, count] = entries(n);
                for (std::size_t e = first; e < first + count; ++e) {
                    fn(e);
                }
            } else {
                const auto kids = children(n);
                for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
                    stack.push_back(*it);
                }
            }
        }
    }

    /**
     * Checks fanout, containment and that every entry is reached exactly once.
     * Throws ValidationError on the first violation.
     */
    void validate() const {
        if (!root_) {
            if (!entry_ids_.empty()) {
                throw ValidationError("rtree without root holds entries");
            }
            return;
        }
        std::vector<bool> seen(entry_ids_.size(), false);
        std::size_t leaf_depth = 0;
        validate_node(*root_, 1, leaf_depth, seen);
        if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
            throw ValidationError("rtree has unreachable entries");
        }
    }

    /// Throws ValidationError when leaf coordinates disagree with `ds`.
    void check_against(const Dataset& ds) const {
        if (size() != ds.size()) {
            throw ValidationError("index and dataset sizes differ");
        }
        std::vector<bool> seen(ds.size(), false);
        for (std::size_t e = 0; e < size(); ++e) {
            const TupleId id = entry_ids_[e];
            if (id >= ds.size() || seen[id]) {
                throw ValidationError("index entry id out of range or duplicated");
            }
            seen[id] = true;
            const auto p = entry_point(e);
            for (std::size_t d = 0; d < dims_.size(); ++d) {
                if (dims_[d] >= ds.dimensions() || p[d] != ds.tuple(id).values[dims_[d]]) {
                    throw ValidationError("index coordinates disagree with dataset");
                }
            }
        }
    }

    /// Binary format: header, then node records in depth-first pre-order.
    void save(std::ostream& out) const {
        out.write(magic, sizeof(magic));
        write_pod(out, format_version);
        write_pod(out, static_cast<std::uint32_t>(dims_.size()));
        for (std::size_t d : dims_) {
            write_pod(out, static_cast<std::uint64_t>(d));
        }
        write_pod(out, static_cast<std::uint32_t>(cfg_.branching));
        write_pod(out, cfg_.fill);
        write_pod(out, static_cast<std::uint64_t>(entry_ids_.size()));
        write_pod(out, static_cast<std::uint8_t>(root_.has_value()));
        if (root_) {
            save_node(out, *root_);
        }
        if (!out) {
            throw Error("failed writing index");
        }
    }

    static RTree load(std::istream& in) {
        char m[sizeof(magic)];
        in.read(m, sizeof(m));
        if (!in || std::memcmp(m, magic, sizeof(magic)) != 0) {
            throw FormatError("not a motley index file");
        }
        if (read_pod<std::uint32_t>(in) != format_version) {
            throw FormatError("unsupported index format version");
        }
        RTree t;
        const auto D = read_pod<std::uint32_t>(in);
        if (D == 0 || D > 4096) {
            throw FormatError("bad index dimension count");
        }
        for (std::uint32_t d = 0; d < D; ++d) {
            t.dims_.push_back(static_cast<std::size_t>(read_pod<std::uint64_t>(in)));
        }
        t.cfg_.branching = read_pod<std::uint32_t>(in);
        t.cfg_.fill = read_pod<double>(in);
        try {
            t.cfg_.validate();
        } catch (const ParameterError& e) {
            throw FormatError(std::string("bad index config: ") + e.what());
        }
        const auto entries = read_pod<std::uint64_t>(in);
        if (read_pod<std::uint8_t>(in) != 0) {
            t.entry_ids_.reserve(entries);
            t.root_ = t.load_node(in, 0);
        }
        if (t.entry_ids_.size() != entries) {
            throw FormatError("index entry count mismatch");
        }
        t.validate();
        return t;
    }

private:
    struct Node {
        bool leaf = true;
        std::uint32_t first = 0;
        std::uint32_t count = 0;
    };

    using Groups = std::vector<std::pair<std::size_t, std::size_t>>;

    template <typename Center>
    Groups pack(std::vector<std::size_t>& order, Center&& center) const {
        Groups groups;
        pack_range(order, 0, order.size(), 0, center, groups);
        return groups;
    }

    // Sort-tile-recursive: slice along one dimension into slabs, recurse into
    // the next dimension, and chunk the last dimension into full nodes.
    template <typename Center>
    void pack_range(std::vector<std::size_t>& order, std::size_t begin, std::size_t end,
                    std::size_t dim, Center& center, Groups& groups) const {
        const std::size_t cap = cfg_.node_capacity();
        const std::size_t D = dims_.size();
        const std::size_t n = end - begin;
        if (n <= cap) {
            groups.emplace_back(begin, n);
            return;
        }
        std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(begin),
                         order.begin() + static_cast<std::ptrdiff_t>(end),
                         [&](std::size_t a, std::size_t b) { return center(a, dim) < center(b, dim); });
        if (dim + 1 == D) {
            for (std::size_t i = begin; i < end; i += cap) {
                groups.emplace_back(i, std::min(cap, end - i));
            }
            return;
        }
        const double pages = std::ceil(static_cast<double>(n) / static_cast<double>(cap));
        const auto slabs = static_cast<std::size_t>(
            std::ceil(std::pow(pages, 1.0 / static_cast<double>(D - dim))));
        const std::size_t slab_size =
            cap * static_cast<std::size_t>(std::ceil(pages / static_cast<double>(slabs)));
        for (std::size_t i = begin; i < end; i += slab_size) {
            pack_range(order, i, std::min(end, i + slab_size), dim + 1, center, groups);
        }
    }

    NodeId add_leaf(std::size_t entry_first, std::size_t count) {
        const auto id = static_cast<NodeId>(nodes_.size());
        nodes_.push_back({true, static_cast<std::uint32_t>(entry_first),
                          static_cast<std::uint32_t>(count)});
        const std::size_t D = dims_.size();
        std::vector<double> low(D, std::numeric_limits<double>::infinity());
        std::vector<double> high(D, -std::numeric_limits<double>::infinity());
        for (std::size_t e = entry_first; e < entry_first + count; ++e) {
            const auto p = entry_point(e);
            for (std::size_t d = 0; d < D; ++d) {
                low[d] = std::min(low[d], p[d]);
                high[d] = std::max(high[d], p[d]);
            }
        }
        boxes_.insert(boxes_.end(), low.begin(), low.end());
        boxes_.insert(boxes_.end(), high.begin(), high.end());
        return id;
    }

    NodeId add_internal(std::span<const NodeId> kids) {
        const auto id = static_cast<NodeId>(nodes_.size());
        nodes_.push_back({false, static_cast<std::uint32_t>(children_.size()),
                          static_cast<std::uint32_t>(kids.size())});
        children_.insert(children_.end(), kids.begin(), kids.end());
        const std::size_t D = dims_.size();
        std::vector<double> low(D, std::numeric_limits<double>::infinity());
        std::vector<double> high(D, -std::numeric_limits<double>::infinity());
        for (NodeId k : kids) {
            const auto b = box(k);
            for (std::size_t d = 0; d < D; ++d) {
                low[d] = std::min(low[d], b.low[d]);
                high[d] = std::max(high[d], b.high[d]);
            }
        }
        boxes_.insert(boxes_.end(), low.begin(), low.end());
        boxes_.insert(boxes_.end(), high.begin(), high.end());
        return id;
    }

    static bool inside(MbrView inner, MbrView outer) {
        for (std::size_t d = 0; d < inner.dimensions(); ++d) {
            if (inner.low[d] < outer.low[d] || inner.high[d] > outer.high[d] ||
                inner.low[d] > inner.high[d]) {
                return false;
            }
        }
        return true;
    }

    void validate_node(NodeId n, std::size_t depth, std::size_t& leaf_depth,
                       std::vector<bool>& seen) const {
        const auto& node = nodes_[n];
        if (node.count == 0 || node.count > cfg_.branching) {
            throw ValidationError("rtree node fanout out of range");
        }
        const auto b = box(n);
        if (node.leaf) {
            if (leaf_depth == 0) {
                leaf_depth = depth;
            } else if (leaf_depth != depth) {
                throw ValidationError("rtree leaves at different depths");
            }
            for (std::size_t e = node.first; e < node.first + node.count; ++e) {
                if (e >= entry_ids_.size() || seen[e]) {
                    throw ValidationError("rtree leaf entry out of range or shared");
                }
                seen[e] = true;
                if (!inside(entry_box(e), b)) {
                    throw ValidationError("rtree entry outside its leaf rectangle");
                }
            }
            return;
        }
        for (NodeId k : children(n)) {
            if (k >= nodes_.size() || k == n) {
                throw ValidationError("rtree child reference out of range");
            }
            if (!inside(box(k), b)) {
                throw ValidationError("rtree child rectangle escapes its parent");
            }
            validate_node(k, depth + 1, leaf_depth, seen);
        }
    }

    template <typename T>
    static void write_pod(std::ostream& out, T v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }

    template <typename T>
    static T read_pod(std::istream& in) {
        T v{};
        in.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (!in) {
            throw FormatError("truncated index file");
        }
        return v;
    }

    void save_node(std::ostream& out, NodeId n) const {
        const auto& node = nodes_[n];
        write_pod(out, static_cast<std::uint8_t>(node.leaf));
        write_pod(out, node.count);
        const auto b = box(n);
        for (double v : b.low) write_pod(out, v);
        for (double v : b.high) write_pod(out, v);
        if (node.leaf) {
            for (std::size_t e = node.first; e < node.first + node.count; ++e) {
                write_pod(out, static_cast<std::uint64_t>(entry_ids_[e]));
                for (double v : entry_point(e)) write_pod(out, v);
            }
            return;
        }
        for (NodeId k : children(n)) {
            save_node(out, k);
        }
    }

    NodeId load_node(std::istream& in, std::size_t depth) {
        if (depth > 64) {
            throw FormatError("index nesting too deep");
        }
        const bool leaf = read_pod<std::uint8_t>(in) != 0;
        const auto count = read_pod<std::uint32_t>(in);
        if (count == 0 || count > cfg_.branching) {
            throw FormatError("index node fanout out of range");
        }
        const std::size_t D = dims_.size();
        std::vector<double> b(2 * D);
        for (double& v : b) v = read_pod<double>(in);
        const auto id = static_cast<NodeId>(nodes_.size());
        nodes_.push_back({leaf, 0, count});
        boxes_.insert(boxes_.end(), b.begin(), b.end());
        if (leaf) {
            nodes_[id].first = static_cast<std::uint32_t>(entry_ids_.size());
            for (std::uint32_t i = 0; i < count; ++i) {
                entry_ids_.push_back(read_pod<std::uint64_t>(in));
                for (std::size_t d = 0; d < D; ++d) {
                    entry_points_.push_back(read_pod<double>(in));
                }
            }
            return id;
        }
        std::vector<NodeId> kids;
        for (std::uint32_t i = 0; i < count; ++i) {
            kids.push_back(load_node(in, depth + 1));
        }
        nodes_[id].first = static_cast<std::uint32_t>(children_.size());
        children_.insert(children_.end(), kids.begin(), kids.end());
        return id;
    }

    std::vector<std::size_t> dims_;
    RTreeConfig cfg_;
    std::vector<Node> nodes_;
    std::vector<double> boxes_;
    std::vector<NodeId> children_;
    std::vector<TupleId> entry_ids_;
    std::vector<double> entry_points_;
    std::optional<NodeId> root_;
};

} // namespace motley

#pragma once

/**
 * @file solver.hpp
 *
 * Greedy K-nearest diverse neighbor solvers driven by a distance-ordered
 * tuple source.
 *
 * Direct greedy admits a browsed tuple when it is diverse from every answer
 * admitted so far. Buffered greedy additionally keeps, per leader, a bounded
 * buffer of dedicated followers (tuples non-diverse from that leader only)
 * and replaces a leader by a mutually diverse group of its followers once
 * browsing has moved a safe radius past them.
 *
 * Replacement checks are driven by follower eligibility events: a follower at
 * distance d becomes eligible once browsing passes d + R. Events are handled
 * in time order, interleaved with browsed tuples, so the outcome does not
 * depend on which non-admitted tuples were actually read. That is what lets
 * the pruning predicate skip tuples without changing the answer.
 */

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "browse.hpp"
#include "diversity.hpp"
#include "geometry.hpp"
#include "rtree.hpp"
#include "scoring.hpp"
#include "types.hpp"

namespace motley {

enum class Algorithm { direct_greedy, buffered_greedy };

struct Follower {
    TupleId id = 0;
    double distance = 0.0;

    BrowseKey key() const { return {distance, BrowseKey::tuple, id}; }
};

struct Leader {
    TupleId id = 0;
    double distance = 0.0;
    std::vector<Follower> buffer;

    BrowseKey key() const { return {distance, BrowseKey::tuple, id}; }
};

struct SolverState {
    /// Ascending (distance, id); leaders.front() is the nearest tuple.
    std::vector<Leader> leaders;
    double d_new = 0.0;
    /// nullopt when no finite safe radius exists for the query.
    std::optional<double> safe_radius;
    std::size_t buffer_capacity = 0;

    bool saturated(const Leader& l) const { return l.buffer.size() >= buffer_capacity; }
};

struct SolverOptions {
    bool prune = true;
    /// Follower buffer size per leader; defaults to k.
    std::optional<std::size_t> buffer_capacity;
    /// Called after every browsed tuple has been handled.
    std::function<void(const SolverState&)> on_step;
    /// Called with the promoted followers and the browse time of a replacement.
    std::function<void(std::span<const Follower>, double)> on_replace;
};

/**
 * Spatial radius beyond which no tuple can be non-diverse from a given one.
 *
 * Non-diverse pairs have every diversity difference below MinDiv / W_1. When
 * every point attribute is also a diversity attribute that bounds each
 * spatial component, giving MinDiv / W_1 scaled by sqrt(M) (Euclidean) or M
 * (Manhattan). Otherwise the spatial distance is unconstrained.
 */
inline std::optional<double> safe_radius(const Query& q, const WeightVector& w) {
    if (q.min_div <= 0.0) {
        return 0.0;
    }
    for (const auto& pa : q.point) {
        if (std::find(q.diversity.begin(), q.diversity.end(), pa.attr) == q.diversity.end()) {
            return std::nullopt;
        }
    }
    const double per_dim = q.min_div / w.first();
    const auto m = static_cast<double>(q.point.size());
    return q.metric == Metric::Euclidean ? per_dim * std::sqrt(m) : per_dim * m;
}

/**
 * Largest pairwise-diverse subset of `candidates` with at most `cap` members.
 * Ties prefer the smaller total distance, then the lexicographically smaller
 * sorted id list. Exact branch and bound; candidates are at most a buffer.
 */
inline std::vector<Follower> max_mutually_diverse_subset(std::span<const Follower> candidates,
                                                         const Dataset& ds,
                                                         const DiversityMeasure& measure,
                                                         std::size_t cap) {
    const std::size_t n = candidates.size();
    if (n == 0 || cap == 0) {
        return {};
    }
    std::vector<char> conflict(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool bad = !measure.is_div(ds.tuple(candidates[i].id), ds.tuple(candidates[j].id));
            conflict[i * n + j] = conflict[j * n + i] = bad;
        }
    }

    std::vector<std::size_t> best;
    double best_sum = 0.0;
    std::vector<TupleId> best_ids;
    std::vector<std::size_t> chosen;

    auto sorted_ids = [&](const std::vector<std::size_t>& set) {
        std::vector<TupleId> ids;
        for (std::size_t i : set) ids.push_back(candidates[i].id);
        std::sort(ids.begin(), ids.end());
        return ids;
    };
    auto consider = [&] {
        double sum = 0.0;
        for (std::size_t i : chosen) sum += candidates[i].distance;
        if (chosen.size() < best.size()) {
            return;
        }
        if (chosen.size() == best.size()) {
            if (sum > best_sum) return;
            if (sum == best_sum) {
                auto ids = sorted_ids(chosen);
                if (ids >= best_ids) return;
                best_ids = std::move(ids);
                best = chosen;
                return;
            }
        }
        best = chosen;
        best_sum = sum;
        best_ids = sorted_ids(chosen);
    };

    std::function<void(std::size_t)> search = [&](std::size_t i) {
        if (chosen.size() + (n - i) < best.size()) {
            return;
        }
        if (i == n || chosen.size() == cap) {
            consider();
            return;
        }
        bool fits = true;
        for (std::size_t c : chosen) {
            if (conflict[c * n + i]) {
                fits = false;
                break;
            }
        }
        if (fits) {
            chosen.push_back(i);
            search(i + 1);
            chosen.pop_back();
        }
        search(i + 1);
    };
    search(0);

    std::vector<Follower> out;
    for (std::size_t i : best) out.push_back(candidates[i]);
    return out;
}

/**
 * True when no tuple inside `box` can become a leader or a dedicated
 * follower: the box's most diverse corner is non-diverse from a saturated
 * leader, or from two or more leaders.
 */
inline bool mbr_is_prunable(MbrView box, std::span<const std::size_t> box_dims,
                            const SolverState& state, const Dataset& ds,
                            const DiversityMeasure& measure) {
    int non_diverse = 0;
    for (const auto& l : state.leaders) {
        const double best = measure.max_divdist(ds.tuple(l.id), box, box_dims);
        if (best < measure.min_div()) {
            if (state.saturated(l)) {
                return true;
            }
            if (++non_diverse > 1) {
                return true;
            }
        }
    }
    return false;
}

/// Tuples of a dataset in (distance, id) order from an in-memory sort.
class ScanSource {
public:
    ScanSource(const Dataset& ds, const Query& q) {
        order_.reserve(ds.size());
        for (const auto& t : ds.tuples) {
            order_.push_back({t.id, spatialdist(t, q)});
        }
        std::sort(order_.begin(), order_.end(),
                  [](const Candidate& a, const Candidate& b) { return a.key() < b.key(); });
        stats_.tuples_read = ds.size();
    }

    std::optional<Candidate> peek() const {
        if (pos_ < order_.size()) {
            return order_[pos_];
        }
        return std::nullopt;
    }
    void pop() { ++pos_; }
    std::optional<Candidate> next() {
        auto c = peek();
        if (c) pop();
        return c;
    }
    void set_prune(Browser::PrunePredicate) {}
    void revive(BrowseKey) {}
    void rewind() { pos_ = 0; }
    std::span<const std::size_t> dims() const { return {}; }
    const ExecutionStats& stats() const { return stats_; }
    std::span<const Candidate> order() const { return order_; }

private:
    std::vector<Candidate> order_;
    std::size_t pos_ = 0;
    ExecutionStats stats_;
};

/// Browser bound to the tree it walks, so the solver can see index dimensions.
class IndexSource : public Browser {
public:
    IndexSource(const RTree& tree, const Query& q) : Browser(tree, q), dims_(tree.dims()) {}
    std::span<const std::size_t> dims() const { return dims_; }

private:
    std::span<const std::size_t> dims_;
};

template <typename Source>
class GreedySolver {
public:
    GreedySolver(Source& source, const Dataset& ds, const Query& q, Algorithm algo,
                 SolverOptions opts)
        : source_(source), ds_(ds), q_(q), algo_(algo), opts_(std::move(opts)), measure_(ds, q) {
        state_.buffer_capacity =
            algo_ == Algorithm::buffered_greedy ? opts_.buffer_capacity.value_or(q.k) : 0;
        state_.safe_radius =
            q.diversity.empty() ? std::optional<double>(0.0) : safe_radius(q, measure_.weights());
    }

    ResultSet run() {
        const auto started = std::chrono::steady_clock::now();
        if (opts_.prune && q_.min_div > 0.0) {
            source_.set_prune([this](MbrView box) {
                return mbr_is_prunable(box, source_.dims(), state_, ds_, measure_);
            });
        }
        const bool buffered = algo_ == Algorithm::buffered_greedy;
        double fired = -std::numeric_limits<double>::infinity();

        while (state_.leaders.size() < q_.k) {
            const auto cand = source_.peek();
            if (buffered && state_.safe_radius) {
                const double horizon =
                    cand ? cand->distance : std::numeric_limits<double>::infinity();
                const auto event = next_event(fired);
                if (event && *event < horizon) {
                    fired = *event;
                    if (replacement_pass(*event)) {
                        if (state_.leaders.size() >= q_.k) {
                            break;
                        }
                        source_.revive(BrowseKey::through(*event));
                    }
                    continue;
                }
            }
            if (!cand) {
                if (buffered) {
                    replacement_pass(std::numeric_limits<double>::infinity());
                }
                break;
            }
            source_.pop();
            state_.d_new = cand->distance;
            if (buffered) {
                admit_buffered(*cand);
            } else {
                admit_direct(*cand);
            }
            if (opts_.on_step) {
                opts_.on_step(state_);
            }
        }

        ResultSet rs;
        for (const auto& l : state_.leaders) {
            rs.answers.push_back({l.id, l.distance, true});
        }
        if (rs.answers.size() < q_.k) {
            fill_partial(rs);
        }
        rs.score = score(rs, q_);
        rs.stats = source_.stats();
        rs.stats.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now() - started);
        return rs;
    }

    const SolverState& state() const { return state_; }

private:
    const Tuple& tuple(TupleId id) const { return ds_.tuple(id); }

    std::optional<double> next_event(double after) const {
        std::optional<double> best;
        const double r = *state_.safe_radius;
        for (std::size_t i = 1; i < state_.leaders.size(); ++i) {
            for (const auto& f : state_.leaders[i].buffer) {
                const double t = f.distance + r;
                if (t > after && (!best || t < *best)) {
                    best = t;
                }
            }
        }
        return best;
    }

    bool eligible(const Follower& f, double time) const {
        if (std::isinf(time)) {
            return true;
        }
        return f.distance + *state_.safe_radius <= time;
    }

    // Replaces leaders (never the nearest one) by mutually diverse groups of
    // their eligible followers until no further replacement applies.
    bool replacement_pass(double time) {
        bool any = false;
        bool changed = true;
        while (changed && state_.leaders.size() < q_.k) {
            changed = false;
            for (std::size_t i = 1; i < state_.leaders.size(); ++i) {
                std::vector<Follower> pool;
                for (const auto& f : state_.leaders[i].buffer) {
                    if (eligible(f, time)) {
                        pool.push_back(f);
                    }
                }
                if (pool.size() < 2) {
                    continue;
                }
                const std::size_t cap = q_.k - state_.leaders.size() + 1;
                auto group = max_mutually_diverse_subset(pool, ds_, measure_, cap);
                if (group.size() > 1) {
                    replace(i, group);
                    if (opts_.on_replace) {
                        opts_.on_replace(group, time);
                    }
                    any = changed = true;
                    break;
                }
            }
        }
        return any;
    }

    void replace(std::size_t index, const std::vector<Follower>& group) {
        Leader old = std::move(state_.leaders[index]);
        state_.leaders.erase(state_.leaders.begin() + static_cast<std::ptrdiff_t>(index));

        auto promoted = [&](const Follower& f) {
            return std::any_of(group.begin(), group.end(),
                               [&](const Follower& g) { return g.id == f.id; });
        };
        for (auto& l : state_.leaders) {
            std::erase_if(l.buffer, [&](const Follower& f) {
                return std::any_of(group.begin(), group.end(), [&](const Follower& g) {
                    return !measure_.is_div(tuple(f.id), tuple(g.id));
                });
            });
        }
        for (const auto& g : group) {
            state_.leaders.push_back({g.id, g.distance, {}});
        }
        std::sort(state_.leaders.begin(), state_.leaders.end(),
                  [](const Leader& a, const Leader& b) { return a.key() < b.key(); });

        std::vector<Follower> orphans;
        for (const auto& f : old.buffer) {
            if (!promoted(f)) {
                orphans.push_back(f);
            }
        }
        std::sort(orphans.begin(), orphans.end(),
                  [](const Follower& a, const Follower& b) { return a.key() < b.key(); });
        for (const auto& f : orphans) {
            if (auto owner = sole_non_diverse_leader(tuple(f.id))) {
                auto& buf = state_.leaders[*owner].buffer;
                if (buf.size() < state_.buffer_capacity) {
                    buf.push_back(f);
                }
            }
        }
    }

    /// Index of the only leader `t` is non-diverse from, if there is exactly one.
    std::optional<std::size_t> sole_non_diverse_leader(const Tuple& t) const {
        std::optional<std::size_t> found;
        for (std::size_t i = 0; i < state_.leaders.size(); ++i) {
            if (!measure_.is_div(tuple(state_.leaders[i].id), t)) {
                if (found) {
                    return std::nullopt;
                }
                found = i;
            }
        }
        return found;
    }

    bool diverse_from_all(const Tuple& t) const {
        for (const auto& l : state_.leaders) {
            if (!measure_.is_div(tuple(l.id), t)) {
                return false;
            }
        }
        return true;
    }

    void admit_direct(const Candidate& c) {
        if (diverse_from_all(tuple(c.id))) {
            state_.leaders.push_back({c.id, c.distance, {}});
        }
    }

    void admit_buffered(const Candidate& c) {
        const Tuple& t = tuple(c.id);
        if (diverse_from_all(t)) {
            bool regressed = false;
            for (auto& l : state_.leaders) {
                const bool was_full = state_.saturated(l);
                std::erase_if(l.buffer,
                              [&](const Follower& f) { return !measure_.is_div(tuple(f.id), t); });
                regressed = regressed || (was_full && !state_.saturated(l));
            }
            state_.leaders.push_back({c.id, c.distance, {}});
            if (regressed) {
                source_.revive(c.key());
            }
            return;
        }
        if (auto owner = sole_non_diverse_leader(t)) {
            auto& buf = state_.leaders[*owner].buffer;
            if (buf.size() < state_.buffer_capacity) {
                buf.push_back({c.id, c.distance});
            }
        }
    }

    // Fewer than k leaders at exhaustion: pad with the nearest unused tuples.
    void fill_partial(ResultSet& rs) {
        source_.rewind();
        while (rs.answers.size() < q_.k) {
            const auto c = source_.next();
            if (!c) {
                break;
            }
            const bool used = std::any_of(rs.answers.begin(), rs.answers.end(),
                                          [&](const Answer& a) { return a.id == c->id; });
            if (!used) {
                rs.answers.push_back({c->id, c->distance, false});
            }
        }
    }

    Source& source_;
    const Dataset& ds_;
    const Query& q_;
    Algorithm algo_;
    SolverOptions opts_;
    DiversityMeasure measure_;
    SolverState state_;
};

template <typename Source>
ResultSet solve(Source& source, const Dataset& ds, const Query& q, Algorithm algo,
                SolverOptions opts = {}) {
    validate(q, ds);
    GreedySolver<Source> solver(source, ds, q, algo, std::move(opts));
    return solver.run();
}

inline ResultSet direct_greedy(const RTree& tree, const Dataset& ds, const Query& q,
                               SolverOptions opts = {}) {
    validate(q, ds);
    IndexSource source(tree, q);
    return solve(source, ds, q, Algorithm::direct_greedy, std::move(opts));
}

inline ResultSet buffered_greedy(const RTree& tree, const Dataset& ds, const Query& q,
                                 SolverOptions opts = {}) {
    validate(q, ds);
    IndexSource source(tree, q);
    return solve(source, ds, q, Algorithm::buffered_greedy, std::move(opts));
}

} // namespace motley

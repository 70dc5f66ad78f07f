#pragma once

/**
 * @file oracle.hpp
 *
 * Ground-truth baselines: linear-scan KNN, buffered greedy over a fully
 * sorted scan, and exhaustive optimal KNDN for small instances.
 */

#include <algorithm>
#include <string>
#include <vector>

#include "diversity.hpp"
#include "scoring.hpp"
#include "solver.hpp"
#include "types.hpp"

namespace motley {

/// The K nearest tuples by (distance, id) from a full scan.
inline ResultSet knn_linear(const Dataset& ds, const Query& q) {
    validate(q, ds);
    ScanSource scan(ds, q);
    ResultSet rs;
    for (const auto& c : scan.order()) {
        if (rs.answers.size() == q.k) {
            break;
        }
        rs.answers.push_back({c.id, c.distance, true});
    }
    if (!rs.answers.empty()) {
        rs.score = score(rs, q);
    }
    rs.stats.tuples_read = ds.size();
    return rs;
}

/// Buffered greedy fed from an in-memory sort of the whole dataset.
inline ResultSet sequential_scan_kndn(const Dataset& ds, const Query& q) {
    validate(q, ds);
    ScanSource scan(ds, q);
    return solve(scan, ds, q, Algorithm::buffered_greedy, {.prune = false});
}

struct OracleLimits {
    std::size_t max_n = 400;
    std::size_t max_k = 5;
};

class OracleLimitError : public Error {
public:
    using Error::Error;
};

/**
 * Best-scoring fully diverse K-set that contains the nearest tuple, by
 * exhaustive enumeration over the C(N-1, K-1) completions.
 *
 * When no fully diverse K-set exists, the largest fully diverse set (best
 * score among those) is padded with the nearest unused tuples, flagged
 * non-diverse. Equal scores resolve to the lexicographically smaller sorted
 * id list.
 */
inline ResultSet optimal_kndn(const Dataset& ds, const Query& q, OracleLimits limits = {}) {
    validate(q, ds);
    if (ds.size() > limits.max_n || q.k > limits.max_k) {
        throw OracleLimitError("exhaustive KNDN refused: N=" + std::to_string(ds.size()) +
                               ", K=" + std::to_string(q.k) + " exceeds limits N<=" +
                               std::to_string(limits.max_n) + ", K<=" +
                               std::to_string(limits.max_k) +
                               " (enumeration grows as C(N-1, K-1))");
    }
    ResultSet rs;
    rs.stats.tuples_read = ds.size();
    if (ds.size() == 0) {
        return rs;
    }
    ScanSource scan(ds, q);
    const auto order = scan.order();
    const std::size_t n = order.size();
    const DiversityMeasure measure(ds, q);

    std::vector<char> diverse(n * n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool ok = measure.is_div(ds.tuple(order[i].id), ds.tuple(order[j].id));
            diverse[i * n + j] = diverse[j * n + i] = ok;
        }
    }

    struct Best {
        std::vector<std::size_t> members;
        double score = -1.0;
        std::vector<TupleId> ids;
    };
    const std::size_t k = std::min(q.k, n);
    std::vector<Best> best(k + 1);
    std::vector<std::size_t> chosen{0};
    std::vector<double> dist;

    auto offer = [&] {
        dist.clear();
        for (std::size_t i : chosen) dist.push_back(order[i].distance);
        const double s = score(dist, q.aggregate);
        auto& b = best[chosen.size()];
        if (s < b.score) {
            return;
        }
        std::vector<TupleId> ids;
        for (std::size_t i : chosen) ids.push_back(order[i].id);
        std::sort(ids.begin(), ids.end());
        if (s == b.score && ids >= b.ids) {
            return;
        }
        b = {chosen, s, std::move(ids)};
    };

    std::function<void(std::size_t)> extend = [&](std::size_t from) {
        offer();
        if (chosen.size() == k) {
            return;
        }
        for (std::size_t i = from; i < n; ++i) {
            bool ok = true;
            for (std::size_t c : chosen) {
                if (!diverse[c * n + i]) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                chosen.push_back(i);
                extend(i + 1);
                chosen.pop_back();
            }
        }
    };
    extend(1);

    std::size_t size = k;
    while (size > 1 && best[size].score < 0.0) {
        --size;
    }
    for (std::size_t i : best[size].members) {
        rs.answers.push_back({order[i].id, order[i].distance, true});
    }
    std::sort(rs.answers.begin(), rs.answers.end(), [](const Answer& a, const Answer& b) {
        return Candidate{a.id, a.distance}.key() < Candidate{b.id, b.distance}.key();
    });
    for (std::size_t i = 0; i < n && rs.answers.size() < q.k; ++i) {
        const bool used = std::any_of(rs.answers.begin(), rs.answers.end(),
                                      [&](const Answer& a) { return a.id == order[i].id; });
        if (!used) {
            rs.answers.push_back({order[i].id, order[i].distance, false});
        }
    }
    rs.score = score(rs, q);
    return rs;
}

} // namespace motley

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "motley/motley.hpp"

namespace testing_support {

using namespace motley;

/// Numeric dataset over [0,1] from literal rows.
inline Dataset numeric_dataset(const std::vector<std::vector<double>>& rows) {
    Dataset ds;
    const std::size_t d = rows.empty() ? 0 : rows.front().size();
    for (std::size_t a = 0; a < d; ++a) {
        ds.schema.push_back({"x" + std::to_string(a), AttributeKind::Numeric, 0.0, 1.0});
    }
    ds.cat_stats.resize(d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ds.tuples.push_back({i, rows[i]});
    }
    return ds;
}

/// Uniform or clustered random numeric data; clustering makes non-diverse pairs common.
inline Dataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed, bool clustered = false) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> centers(4, std::vector<double>(d));
    for (auto& c : centers) for (auto& v : c) v = u(rng);
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    for (auto& r : rows) {
        const auto& c = centers[rng() % centers.size()];
        for (std::size_t a = 0; a < d; ++a) {
            r[a] = clustered ? std::clamp(c[a] + (u(rng) - 0.5) * 0.3, 0.0, 1.0) : u(rng);
        }
    }
    // A few exact duplicates exercise tie handling.
    for (std::size_t i = 1; i < n; i += 17) rows[i] = rows[i - 1];
    return numeric_dataset(rows);
}

inline Query full_query(const Dataset& ds, std::vector<double> point, std::size_t k, double mindiv,
                        double decay = 0.1) {
    Query q;
    for (std::size_t a = 0; a < point.size(); ++a) {
        q.point.push_back({a, point[a]});
        q.diversity.push_back(a);
    }
    q.k = k;
    q.min_div = mindiv;
    q.decay = decay;
    (void)ds;
    return q;
}

inline std::vector<double> random_point(std::size_t d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(d);
    for (auto& v : p) v = u(rng);
    return p;
}

// ---- independent reference implementations (numeric attributes only) ----

inline double ref_divdist(const std::vector<double>& a, const std::vector<double>& b,
                          const std::vector<std::size_t>& attrs, double decay) {
    std::vector<double> deltas;
    for (std::size_t at : attrs) deltas.push_back(std::fabs(a[at] - b[at]));
    std::sort(deltas.rbegin(), deltas.rend());
    const double L = static_cast<double>(deltas.size());
    double s = 0.0;
    for (std::size_t j = 0; j < deltas.size(); ++j) {
        s += deltas[j] * std::pow(decay, static_cast<double>(j)) * (1.0 - decay) /
             (1.0 - std::pow(decay, L));
    }
    return s;
}

inline double ref_distance(const std::vector<double>& p, const Query& q) {
    double s = 0.0;
    for (const auto& pa : q.point) {
        const double g = std::fabs(p[pa.attr] - pa.target);
        s += q.metric == Metric::Euclidean ? g * g : g;
    }
    return q.metric == Metric::Euclidean ? std::sqrt(s) : s;
}

inline double ref_score(std::vector<double> d, Aggregate agg) {
    for (auto& x : d) x = std::max(x, 1e-9);
    double m = 0.0;
    const double n = static_cast<double>(d.size());
    if (agg == Aggregate::Arithmetic) {
        for (double x : d) m += x / n;
    } else if (agg == Aggregate::Geometric) {
        for (double x : d) m += std::log(x) / n;
        m = std::exp(m);
    } else {
        for (double x : d) m += 1.0 / x;
        m = n / m;
    }
    return 1.0 / m;
}

struct RefOptimal {
    std::vector<TupleId> ids;  // sorted
    double score = -1.0;
};

/**
 * Bitmask enumeration over every subset of exactly k tuples containing the
 * (distance, id)-nearest tuple, keeping the best fully diverse one. n <= 20.
 */
inline RefOptimal ref_optimal(const Dataset& ds, const Query& q) {
    const std::size_t n = ds.size();
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = ref_distance(ds.tuples[i].values, q);
    std::size_t nearest = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (dist[i] < dist[nearest]) nearest = i;
    }
    RefOptimal best;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (!(mask >> nearest & 1u) || static_cast<std::size_t>(__builtin_popcount(mask)) != q.k) continue;
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i) if (mask >> i & 1u) members.push_back(i);
        bool ok = true;
        for (std::size_t i = 0; ok && i < members.size(); ++i) {
            for (std::size_t j = i + 1; ok && j < members.size(); ++j) {
                ok = ref_divdist(ds.tuples[members[i]].values, ds.tuples[members[j]].values,
                                 q.diversity, q.decay) >= q.min_div;
            }
        }
        if (!ok) continue;
        std::vector<double> d;
        std::vector<TupleId> ids;
        for (std::size_t i : members) {
            d.push_back(dist[i]);
            ids.push_back(i);
        }
        const double s = ref_score(d, q.aggregate);
        if (s > best.score || (s == best.score && ids < best.ids)) best = {ids, s};
    }
    return best;
}

inline std::vector<TupleId> sorted_ids(const ResultSet& rs) {
    auto ids = rs.ids();
    std::sort(ids.begin(), ids.end());
    return ids;
}

} // namespace testing_support

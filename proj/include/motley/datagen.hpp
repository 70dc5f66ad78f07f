#pragma once

/**
 * @file datagen.hpp
 *
 * Synthetic Zipf datasets and uniform query workloads. Both are pure
 * functions of their seed.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "types.hpp"

namespace motley {

namespace detail {

/// Uniform double in [0,1) from the top 53 bits of a 64-bit draw.
inline double unit_uniform(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

} // namespace detail

/// Inverse-CDF sampler over ranks 1..v with mass proportional to 1 / r^theta.
class ZipfSampler {
public:
    ZipfSampler(std::size_t values, double theta) : cdf_(values) {
        if (values < 1) {
            throw ParameterError("zipf needs at least one value");
        }
        double acc = 0.0;
        for (std::size_t r = 0; r < values; ++r) {
            acc += 1.0 / std::pow(static_cast<double>(r + 1), theta);
            cdf_[r] = acc;
        }
        for (double& c : cdf_) {
            c /= acc;
        }
        cdf_.back() = 1.0;
    }

    /// Zero-based rank.
    std::size_t operator()(std::mt19937_64& engine) const {
        const double u = detail::unit_uniform(engine);
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    }

    /// Probability of a zero-based rank.
    double mass(std::size_t rank) const {
        return rank == 0 ? cdf_[0] : cdf_[rank] - cdf_[rank - 1];
    }

private:
    std::vector<double> cdf_;
};

/**
 * n tuples over d numeric attributes named a0..a{d-1}. Each attribute is an
 * independent Zipf(theta) draw over v equally spaced values of [0,1], the
 * most frequent value at 0.
 */
inline Dataset gen_zipf(std::size_t n, std::size_t d, double theta, std::size_t v,
                        std::uint64_t seed) {
    if (n < 1 || d < 1) {
        throw ParameterError("gen_zipf needs n >= 1 and d >= 1");
    }
    if (v < 2) {
        throw ParameterError("gen_zipf needs at least two distinct values");
    }
    if (!(theta >= 0.0)) {
        throw ParameterError("zipf skew must be non-negative");
    }
    Dataset ds;
    for (std::size_t a = 0; a < d; ++a) {
        ds.schema.push_back({"a" + std::to_string(a), AttributeKind::Numeric, 0.0, 1.0});
    }
    ds.cat_stats.resize(d);
    const ZipfSampler zipf(v, theta);
    std::mt19937_64 engine(seed);
    const double step = 1.0 / static_cast<double>(v - 1);
    ds.tuples.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        ds.tuples[r].id = r;
        ds.tuples[r].values.resize(d);
        for (std::size_t a = 0; a < d; ++a) {
            const std::size_t rank = zipf(engine);
            ds.tuples[r].values[a] = rank + 1 == v ? 1.0 : static_cast<double>(rank) * step;
        }
    }
    return ds;
}

/**
 * `count` queries whose point targets are i.i.d. uniform over [0,1] on
 * `point_attrs`. Everything else (k, MinDiv, decay, diversity attributes,
 * metric, aggregate) is copied from `prototype`.
 */
inline std::vector<Query> gen_workload(std::size_t count, std::span<const std::size_t> point_attrs,
                                       std::uint64_t seed, const Query& prototype) {
    if (count < 1) {
        throw ParameterError("workload needs at least one query");
    }
    std::mt19937_64 engine(seed);
    std::vector<Query> out(count, prototype);
    for (auto& q : out) {
        q.point.clear();
        for (std::size_t a : point_attrs) {
            q.point.push_back({a, detail::unit_uniform(engine)});
        }
    }
    return out;
}

} // namespace motley

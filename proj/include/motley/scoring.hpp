#pragma once

#include <cmath>
#include <span>

#include "geometry.hpp"
#include "types.hpp"

namespace motley {

/// Distances are floored here before aggregation so that an answer sitting
/// exactly on the query point keeps geometric and harmonic means finite.
inline constexpr double distance_floor = 1e-9;

inline double aggregate(Aggregate kind, std::span<const double> distances) {
    if (distances.empty()) {
        throw ValidationError("cannot aggregate an empty distance list");
    }
    const double n = static_cast<double>(distances.size());
    double acc = 0.0;
    switch (kind) {
    case Aggregate::Arithmetic:
        for (double d : distances) acc += std::max(d, distance_floor);
        return acc / n;
    case Aggregate::Geometric:
        for (double d : distances) acc += std::log(std::max(d, distance_floor));
        return std::exp(acc / n);
    case Aggregate::Harmonic:
        for (double d : distances) acc += 1.0 / std::max(d, distance_floor);
        return n / acc;
    }
    return 0.0;
}

/// Reciprocal of the aggregate answer distance.
inline double score(std::span<const double> distances, Aggregate kind) {
    return 1.0 / aggregate(kind, distances);
}

inline double score(const ResultSet& rs, const Query& q) {
    if (rs.answers.empty()) {
        throw ValidationError("score is undefined for an empty result set");
    }
    const auto d = rs.distances();
    return score(d, q.aggregate);
}

} // namespace motley

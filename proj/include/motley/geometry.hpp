#pragma once

/**
 * @file geometry.hpp
 *
 * Bounding rectangles and spatial distances over the point attributes of a
 * query. Distances between a query and a rectangle or a tuple share one
 * accumulation routine so that a tuple lying on a rectangle face never sorts
 * ahead of that rectangle.
 */

#include <cmath>
#include <span>
#include <vector>

#include "types.hpp"

namespace motley {

/// Non-owning view of a rectangle over an ordered list of dimensions.
struct MbrView {
    std::span<const double> low;
    std::span<const double> high;

    std::size_t dimensions() const { return low.size(); }
};

struct Mbr {
    std::vector<double> low;
    std::vector<double> high;

    MbrView view() const { return {low, high}; }

    bool contains(MbrView other) const {
        for (std::size_t d = 0; d < low.size(); ++d) {
            if (other.low[d] < low[d] || other.high[d] > high[d]) {
                return false;
            }
        }
        return true;
    }
};

inline double combine(Metric metric, double accumulated) {
    return metric == Metric::Euclidean ? std::sqrt(accumulated) : accumulated;
}

inline double component(Metric metric, double gap) {
    return metric == Metric::Euclidean ? gap * gap : std::abs(gap);
}

/// Spatial distance of a tuple from the query point, over the point attributes.
inline double spatialdist(const Tuple& p, const Query& q) {
    double acc = 0.0;
    for (const auto& pa : q.point) {
        acc += component(q.metric, p.values[pa.attr] - pa.target);
    }
    return combine(q.metric, acc);
}

/**
 * The query's point attributes located inside an index's dimension list.
 * Index dimensions the query does not mention contribute nothing, which is
 * the logical projection of the index onto the query's subspace.
 */
class SpatialProjection {
public:
    SpatialProjection(const Query& q, std::span<const std::size_t> index_dims) : metric_(q.metric) {
        for (const auto& pa : q.point) {
            std::size_t pos = index_dims.size();
            for (std::size_t i = 0; i < index_dims.size(); ++i) {
                if (index_dims[i] == pa.attr) {
                    pos = i;
                    break;
                }
            }
            if (pos == index_dims.size()) {
                throw ValidationError("point attribute " + std::to_string(pa.attr) +
                                      " is not covered by the index");
            }
            positions_.push_back(pos);
            targets_.push_back(pa.target);
        }
    }

    Metric metric() const { return metric_; }

    /// Minimum distance from the query to any point of the rectangle.
    double mindist(MbrView box) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < positions_.size(); ++i) {
            const double t = targets_[i];
            const double lo = box.low[positions_[i]];
            const double hi = box.high[positions_[i]];
            if (t < lo) {
                acc += component(metric_, lo - t);
            } else if (t > hi) {
                acc += component(metric_, t - hi);
            } else {
                acc += 0.0;
            }
        }
        return combine(metric_, acc);
    }

    /// Maximum distance from the query to any point of the rectangle.
    double maxdist(MbrView box) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < positions_.size(); ++i) {
            const double t = targets_[i];
            const double gap = std::max(std::abs(t - box.low[positions_[i]]),
                                        std::abs(box.high[positions_[i]] - t));
            acc += component(metric_, gap);
        }
        return combine(metric_, acc);
    }

    /// Distance to a point stored in index coordinates.
    double distance(std::span<const double> point) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < positions_.size(); ++i) {
            acc += component(metric_, point[positions_[i]] - targets_[i]);
        }
        return combine(metric_, acc);
    }

private:
    Metric metric_;
    std::vector<std::size_t> positions_;
    std::vector<double> targets_;
};

/// Minimum distance between a query and a rectangle over `index_dims`.
inline double mindist(MbrView box, const Query& q, std::span<const std::size_t> index_dims) {
    return SpatialProjection(q, index_dims).mindist(box);
}

} // namespace motley

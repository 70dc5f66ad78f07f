#pragma once

/**
 * @file diversity.hpp
 *
 * Diversity between tuples: per-attribute differences (numeric and
 * categorical), the geometrically decaying weight vector, and the
 * ordered-weighted diversity distance built from them.
 */

#include <algorithm>
#include <array>
#include <functional>
#include <span>
#include <vector>

#include "geometry.hpp"
#include "types.hpp"

namespace motley {

struct WeightVector {
    std::vector<double> weights;
    double decay = 0.1;

    std::size_t size() const { return weights.size(); }
    double first() const { return weights.front(); }
};

/// W_j = a^(j-1) (1-a) / (1-a^L), j = 1..L.
inline WeightVector make_weights(std::size_t count, double decay) {
    if (count < 1) {
        throw ParameterError("weight vector needs at least one entry");
    }
    if (!(decay > 0.0 && decay < 1.0)) {
        throw ParameterError("decay must lie in (0,1)");
    }
    WeightVector w;
    w.decay = decay;
    w.weights.resize(count);
    const double norm = (1.0 - decay) / (1.0 - std::pow(decay, static_cast<double>(count)));
    double p = 1.0;
    for (std::size_t j = 0; j < count; ++j) {
        w.weights[j] = p * norm;
        p *= decay;
    }
    return w;
}

/// Per-symbol similarity of one categorical attribute.
struct CategoricalSimilarity {
    std::vector<double> sim;

    double of(std::size_t symbol) const { return sim[symbol]; }
};

/**
 * Sim(v) = 1 - sum over l with f_l <= f_v of f_l (f_l - 1) / (n (n - 1)).
 * Rarer values are more similar when matched.
 */
inline CategoricalSimilarity categorical_sim(const CategoryStats& stats) {
    const std::size_t n = stats.total;
    if (n < 2) {
        throw ValidationError("categorical similarity needs at least two tuples");
    }
    const double denom = static_cast<double>(n) * static_cast<double>(n - 1);
    std::vector<std::size_t> order(stats.frequency.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return stats.frequency[a] < stats.frequency[b];
    });
    CategoricalSimilarity out;
    out.sim.assign(stats.frequency.size(), 1.0);
    // Prefix sums over ascending frequency; equal frequencies share one sum.
    double acc = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        double group = 0.0;
        while (j < order.size() && stats.frequency[order[j]] == stats.frequency[order[i]]) {
            const double f = static_cast<double>(stats.frequency[order[j]]);
            group += f * (f - 1.0);
            ++j;
        }
        acc += group;
        for (std::size_t k = i; k < j; ++k) {
            out.sim[order[k]] = std::clamp(1.0 - acc / denom, 0.0, 1.0);
        }
        i = j;
    }
    return out;
}

/// Difference of two values of one attribute, in [0,1].
inline double attr_delta(double v1, double v2, AttributeKind kind,
                         const CategoricalSimilarity* sim = nullptr) {
    if (kind == AttributeKind::Numeric) {
        return std::abs(v1 - v2);
    }
    const auto s1 = static_cast<std::size_t>(v1);
    const auto s2 = static_cast<std::size_t>(v2);
    if (s1 == s2) {
        return 0.0;
    }
    return 1.0 - sim->of(s1) * sim->of(s2);
}

/**
 * Sorts `deltas` into decreasing order and returns their dot product with
 * the weights. `deltas.size()` must equal `w.size()`.
 */
inline double ordered_weighted_sum(std::span<double> deltas, const WeightVector& w) {
    std::sort(deltas.begin(), deltas.end(), std::greater<>());
    double acc = 0.0;
    for (std::size_t j = 0; j < deltas.size(); ++j) {
        acc += w.weights[j] * deltas[j];
    }
    return acc;
}

/**
 * Diversity distance and predicate for one query over one dataset.
 *
 * Holds the weight vector for the query's diversity attributes and the
 * similarity tables of those that are categorical.
 */
class DiversityMeasure {
public:
    DiversityMeasure(const Dataset& ds, const Query& q) : min_div_(q.min_div) {
        attrs_ = q.diversity;
        kinds_.reserve(attrs_.size());
        sims_.resize(attrs_.size());
        for (std::size_t j = 0; j < attrs_.size(); ++j) {
            const auto kind = ds.schema[attrs_[j]].kind;
            kinds_.push_back(kind);
            if (kind == AttributeKind::Categorical) {
                sims_[j] = categorical_sim(*ds.cat_stats[attrs_[j]]);
            }
        }
        if (!attrs_.empty()) {
            weights_ = make_weights(attrs_.size(), q.decay);
        }
    }

    const WeightVector& weights() const { return weights_; }
    std::span<const std::size_t> attributes() const { return attrs_; }
    double min_div() const { return min_div_; }

    /// Difference of two tuples on the j-th diversity attribute.
    double delta(const Tuple& a, const Tuple& b, std::size_t j) const {
        const std::size_t attr = attrs_[j];
        return attr_delta(a.values[attr], b.values[attr], kinds_[j],
                          sims_[j] ? &*sims_[j] : nullptr);
    }

    double divdist(const Tuple& a, const Tuple& b) const {
        return with_deltas([&](std::span<double> d) {
            for (std::size_t j = 0; j < d.size(); ++j) {
                d[j] = delta(a, b, j);
            }
        });
    }

    bool is_div(const Tuple& a, const Tuple& b) const {
        return min_div_ <= 0.0 || divdist(a, b) >= min_div_;
    }

    template <typename Range>
    bool fully_diverse(const Range& tuples) const {
        for (auto i = std::begin(tuples); i != std::end(tuples); ++i) {
            for (auto j = std::next(i); j != std::end(tuples); ++j) {
                if (!is_div(*i, *j)) {
                    return false;
                }
            }
        }
        return true;
    }

    /**
     * Upper bound on divdist between `leader` and any point of `box`.
     *
     * Indexed numeric attributes use the box corner farthest from the leader.
     * Numeric attributes outside the box's dimensions are bounded by the
     * domain edge, categorical ones by 1.
     */
    double max_divdist(const Tuple& leader, MbrView box,
                       std::span<const std::size_t> box_dims) const {
        return with_deltas([&](std::span<double> d) {
            for (std::size_t j = 0; j < d.size(); ++j) {
                const std::size_t attr = attrs_[j];
                if (kinds_[j] == AttributeKind::Categorical) {
                    d[j] = 1.0;
                    continue;
                }
                const double v = leader.values[attr];
                const auto it = std::find(box_dims.begin(), box_dims.end(), attr);
                if (it == box_dims.end()) {
                    d[j] = std::max(v, 1.0 - v);
                } else {
                    const auto pos = static_cast<std::size_t>(it - box_dims.begin());
                    d[j] = std::max(std::abs(v - box.low[pos]), std::abs(box.high[pos] - v));
                }
            }
        });
    }

private:
    template <typename Fill>
    double with_deltas(Fill&& fill) const {
        if (attrs_.empty()) {
            return 0.0;
        }
        constexpr std::size_t inline_capacity = 16;
        if (attrs_.size() <= inline_capacity) {
            std::array<double, inline_capacity> buf{};
            std::span<double> d(buf.data(), attrs_.size());
            fill(d);
            return ordered_weighted_sum(d, weights_);
        }
        std::vector<double> buf(attrs_.size());
        fill(std::span<double>(buf));
        return ordered_weighted_sum(buf, weights_);
    }

    std::vector<std::size_t> attrs_;
    std::vector<AttributeKind> kinds_;
    std::vector<std::optional<CategoricalSimilarity>> sims_;
    WeightVector weights_;
    double min_div_ = 0.0;
};

} // namespace motley

#pragma once

/**
 * @file types.hpp
 *
 * Domain types shared by the whole library: schemas, normalized datasets,
 * diverse-neighbor queries and their result sets.
 */

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace motley {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numeric parameter outside its admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Input that is well-formed but violates a model invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed file contents (CSV, schema sidecar, index, config).
class FormatError : public Error {
public:
    using Error::Error;
};

using TupleId = std::uint64_t;

enum class AttributeKind { Numeric, Categorical };

struct AttributeSpec {
    std::string name;
    AttributeKind kind = AttributeKind::Numeric;
    /// Source-unit domain bounds, numeric attributes only.
    double raw_min = 0.0;
    double raw_max = 1.0;
};

/**
 * One row of a dataset. Numeric values are normalized into [0,1];
 * categorical values hold the dense symbol id of the interned category.
 */
struct Tuple {
    TupleId id = 0;
    std::vector<double> values;
};

/// Frequency table of one categorical attribute. Symbol ids index both vectors.
struct CategoryStats {
    std::vector<std::string> symbols;
    std::vector<std::size_t> frequency;
    std::size_t total = 0;

    std::optional<std::size_t> symbol_id(std::string_view symbol) const {
        for (std::size_t i = 0; i < symbols.size(); ++i) {
            if (symbols[i] == symbol) {
                return i;
            }
        }
        return std::nullopt;
    }
};

struct Dataset {
    std::vector<AttributeSpec> schema;
    std::vector<Tuple> tuples;
    /// Indexed by attribute position; engaged for categorical attributes only.
    std::vector<std::optional<CategoryStats>> cat_stats;

    std::size_t size() const { return tuples.size(); }
    std::size_t dimensions() const { return schema.size(); }

    const Tuple& tuple(TupleId id) const { return tuples[static_cast<std::size_t>(id)]; }

    std::optional<std::size_t> attribute_index(std::string_view name) const {
        for (std::size_t i = 0; i < schema.size(); ++i) {
            if (schema[i].name == name) {
                return i;
            }
        }
        return std::nullopt;
    }

    std::size_t require_attribute(std::string_view name) const {
        if (auto idx = attribute_index(name)) {
            return *idx;
        }
        throw ValidationError("unknown attribute '" + std::string(name) + "'");
    }

    bool is_numeric(std::size_t attr) const { return schema[attr].kind == AttributeKind::Numeric; }

    std::vector<std::size_t> numeric_attributes() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < schema.size(); ++i) {
            if (is_numeric(i)) {
                out.push_back(i);
            }
        }
        return out;
    }
};

enum class Metric { Euclidean, Manhattan };
enum class Aggregate { Arithmetic, Geometric, Harmonic };

struct PointAttr {
    std::size_t attr = 0;
    double target = 0.0;
};

struct Query {
    /// Point attributes with their target values (M of them).
    std::vector<PointAttr> point;
    /// Diversity attributes (L of them).
    std::vector<std::size_t> diversity;
    std::size_t k = 10;
    double min_div = 0.0;
    /// Geometric decay of the diversity weights.
    double decay = 0.1;
    Metric metric = Metric::Euclidean;
    Aggregate aggregate = Aggregate::Harmonic;
};

struct ExecutionStats {
    std::size_t tuples_read = 0;
    std::size_t nodes_expanded = 0;
    std::size_t pqueue_peak = 0;
    std::chrono::nanoseconds wall_time{0};
};

struct Answer {
    TupleId id = 0;
    double distance = 0.0;
    bool diverse = true;
};

struct ResultSet {
    std::vector<Answer> answers;
    double score = 0.0;
    ExecutionStats stats;

    std::vector<TupleId> ids() const {
        std::vector<TupleId> out;
        out.reserve(answers.size());
        for (const auto& a : answers) {
            out.push_back(a.id);
        }
        return out;
    }

    std::vector<double> distances() const {
        std::vector<double> out;
        out.reserve(answers.size());
        for (const auto& a : answers) {
            out.push_back(a.distance);
        }
        return out;
    }

    bool fully_diverse() const {
        for (const auto& a : answers) {
            if (!a.diverse) {
                return false;
            }
        }
        return true;
    }
};

inline std::string_view to_string(Metric m) {
    return m == Metric::Euclidean ? "euclidean" : "manhattan";
}

inline std::string_view to_string(Aggregate a) {
    switch (a) {
    case Aggregate::Arithmetic: return "arithmetic";
    case Aggregate::Geometric: return "geometric";
    case Aggregate::Harmonic: return "harmonic";
    }
    return "harmonic";
}

inline Metric parse_metric(std::string_view s) {
    if (s == "euclidean") return Metric::Euclidean;
    if (s == "manhattan") return Metric::Manhattan;
    throw ParameterError("unknown metric '" + std::string(s) + "' (expected euclidean|manhattan)");
}

inline Aggregate parse_aggregate(std::string_view s) {
    if (s == "arithmetic") return Aggregate::Arithmetic;
    if (s == "geometric") return Aggregate::Geometric;
    if (s == "harmonic") return Aggregate::Harmonic;
    throw ParameterError("unknown aggregate '" + std::string(s) +
                         "' (expected arithmetic|geometric|harmonic)");
}

/**
 * Checks the query against the dataset it will run on.
 *
 * Point attributes must be numeric and distinct with targets in [0,1].
 * Categorical attributes may only be used for diversity.
 */
inline void validate(const Query& q, const Dataset& ds) {
    const std::size_t dims = ds.dimensions();
    if (q.point.empty() || q.point.size() > dims) {
        throw ValidationError("query needs between 1 and D point attributes");
    }
    std::vector<bool> seen(dims, false);
    for (const auto& p : q.point) {
        if (p.attr >= dims) {
            throw ValidationError("point attribute index out of range");
        }
        if (!ds.is_numeric(p.attr)) {
            throw ValidationError("categorical attribute '" + ds.schema[p.attr].name +
                                  "' cannot be a point attribute");
        }
        if (seen[p.attr]) {
            throw ValidationError("duplicate point attribute '" + ds.schema[p.attr].name + "'");
        }
        seen[p.attr] = true;
        if (!(p.target >= 0.0 && p.target <= 1.0)) {
            throw ValidationError("point target for '" + ds.schema[p.attr].name +
                                  "' must lie in [0,1]");
        }
    }
    std::fill(seen.begin(), seen.end(), false);
    for (std::size_t a : q.diversity) {
        if (a >= dims) {
            throw ValidationError("diversity attribute index out of range");
        }
        if (seen[a]) {
            throw ValidationError("duplicate diversity attribute '" + ds.schema[a].name + "'");
        }
        seen[a] = true;
    }
    if (q.k < 1) {
        throw ParameterError("k must be at least 1");
    }
    if (!(q.min_div >= 0.0 && q.min_div <= 1.0)) {
        throw ParameterError("min_div must lie in [0,1]");
    }
    if (q.min_div > 0.0 && q.diversity.empty()) {
        throw ValidationError("min_div > 0 requires at least one diversity attribute");
    }
    if (!(q.decay > 0.0 && q.decay < 1.0)) {
        throw ParameterError("decay must lie in (0,1)");
    }
}

} // namespace motley

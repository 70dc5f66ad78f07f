#pragma once

/**
 * @file dataset.hpp
 *
 * Loading raw tables into normalized datasets, plus the CSV and schema
 * sidecar formats used by the command-line tools.
 *
 * Sidecar format, one `key = value` pair per line, `#` starts a comment:
 *
 *     speciality.kind = categorical
 *     expense.kind = numeric
 *     expense.min = 0
 *     expense.max = 100
 *
 * Columns the sidecar does not mention are numeric with bounds taken from
 * the observed column minimum and maximum.
 */

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "types.hpp"

namespace motley {

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct ColumnHint {
    AttributeKind kind = AttributeKind::Numeric;
    std::optional<double> min;
    std::optional<double> max;
};

using SchemaHints = std::map<std::string, ColumnHint, std::less<>>;

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        return std::nullopt;
    }
    return v;
}

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(trim(cell));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    if (quoted) {
        throw FormatError("line " + std::to_string(line_no) + ": unterminated quote");
    }
    out.push_back(trim(cell));
    return out;
}

} // namespace detail

inline RawTable read_csv(std::istream& in) {
    RawTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (detail::trim(line).empty()) {
            continue;
        }
        auto cells = detail::split_csv_line(line, line_no);
        if (table.header.empty()) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw FormatError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(table.header.size()) + " cells, found " +
                              std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (cells[c].empty()) {
                throw FormatError("line " + std::to_string(line_no) + ": empty cell in column '" +
                                  table.header[c] + "'");
            }
        }
        table.rows.push_back(std::move(cells));
    }
    if (table.header.empty()) {
        throw FormatError("CSV input has no header row");
    }
    return table;
}

inline SchemaHints read_schema(std::istream& in) {
    SchemaHints hints;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto eq = line.find('=');
        const auto key = detail::trim(std::string_view(line).substr(0, eq));
        const auto dot = key.rfind('.');
        if (eq == std::string::npos || dot == std::string::npos || dot == 0) {
            throw FormatError("schema line " + std::to_string(line_no) +
                              ": expected '<column>.<field> = <value>'");
        }
        const auto column = key.substr(0, dot);
        const auto field = key.substr(dot + 1);
        const auto value = detail::trim(std::string_view(line).substr(eq + 1));
        auto& hint = hints[column];
        if (field == "kind") {
            if (value == "numeric") {
                hint.kind = AttributeKind::Numeric;
            } else if (value == "categorical") {
                hint.kind = AttributeKind::Categorical;
            } else {
                throw FormatError("schema line " + std::to_string(line_no) + ": unknown kind '" +
                                  value + "'");
            }
        } else if (field == "min" || field == "max") {
            auto v = detail::parse_double(value);
            if (!v) {
                throw FormatError("schema line " + std::to_string(line_no) + ": bad number '" +
                                  value + "'");
            }
            (field == "min" ? hint.min : hint.max) = *v;
        } else {
            throw FormatError("schema line " + std::to_string(line_no) + ": unknown field '" +
                              field + "'");
        }
    }
    return hints;
}

/**
 * Maps a raw table onto a normalized dataset.
 *
 * Numeric columns are mapped by (v - min) / (max - min), using declared bounds
 * when the hints carry them and observed column bounds otherwise. Categorical
 * columns are interned in order of first appearance and counted. Tuple ids
 * follow row order.
 */
inline Dataset normalize(const RawTable& raw, const SchemaHints& hints = {}) {
    Dataset ds;
    const std::size_t cols = raw.header.size();
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t o = 0; o < c; ++o) {
            if (raw.header[o] == raw.header[c]) {
                throw ValidationError("duplicate column name '" + raw.header[c] + "'");
            }
        }
    }
    for (const auto& [name, hint] : hints) {
        bool found = false;
        for (const auto& h : raw.header) {
            found = found || h == name;
        }
        if (!found) {
            throw ValidationError("schema names unknown column '" + name + "'");
        }
    }

    ds.schema.resize(cols);
    ds.cat_stats.resize(cols);
    ds.tuples.resize(raw.rows.size());
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        ds.tuples[r].id = r;
        ds.tuples[r].values.resize(cols);
    }

    for (std::size_t c = 0; c < cols; ++c) {
        auto& spec = ds.schema[c];
        spec.name = raw.header[c];
        const auto hint_it = hints.find(spec.name);
        const ColumnHint hint = hint_it == hints.end() ? ColumnHint{} : hint_it->second;
        spec.kind = hint.kind;

        if (spec.kind == AttributeKind::Categorical) {
            CategoryStats stats;
            std::map<std::string, std::size_t, std::less<>> ids;
            for (std::size_t r = 0; r < raw.rows.size(); ++r) {
                const auto& cell = raw.rows[r][c];
                auto [it, inserted] = ids.try_emplace(cell, stats.symbols.size());
                if (inserted) {
                    stats.symbols.push_back(cell);
                    stats.frequency.push_back(0);
                }
                ++stats.frequency[it->second];
                ds.tuples[r].values[c] = static_cast<double>(it->second);
            }
            stats.total = raw.rows.size();
            ds.cat_stats[c] = std::move(stats);
            spec.raw_min = 0.0;
            spec.raw_max = 0.0;
            continue;
        }

        std::vector<double> column(raw.rows.size());
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < raw.rows.size(); ++r) {
            auto v = detail::parse_double(raw.rows[r][c]);
            if (!v || !std::isfinite(*v)) {
                throw FormatError("row " + std::to_string(r + 1) + ": column '" + spec.name +
                                  "' holds non-numeric value '" + raw.rows[r][c] + "'");
            }
            column[r] = *v;
            lo = std::min(lo, *v);
            hi = std::max(hi, *v);
        }
        spec.raw_min = hint.min.value_or(lo);
        spec.raw_max = hint.max.value_or(hi);
        if (!(spec.raw_min < spec.raw_max)) {
            throw ValidationError("column '" + spec.name +
                                  "' is constant or has empty bounds; cannot normalize");
        }
        const double span = spec.raw_max - spec.raw_min;
        for (std::size_t r = 0; r < raw.rows.size(); ++r) {
            if (column[r] < spec.raw_min || column[r] > spec.raw_max) {
                throw ValidationError("row " + std::to_string(r + 1) + ": column '" + spec.name +
                                      "' value outside declared bounds");
            }
            ds.tuples[r].values[c] = std::clamp((column[r] - spec.raw_min) / span, 0.0, 1.0);
        }
    }
    return ds;
}

/// Recomputes categorical frequency tables from the tuples.
inline std::vector<std::optional<CategoryStats>> recount_categories(const Dataset& ds) {
    std::vector<std::optional<CategoryStats>> out(ds.dimensions());
    for (std::size_t c = 0; c < ds.dimensions(); ++c) {
        if (ds.is_numeric(c)) {
            continue;
        }
        CategoryStats stats;
        stats.symbols = ds.cat_stats[c] ? ds.cat_stats[c]->symbols : std::vector<std::string>{};
        stats.frequency.assign(stats.symbols.size(), 0);
        for (const auto& t : ds.tuples) {
            const auto sym = static_cast<std::size_t>(t.values[c]);
            if (sym >= stats.frequency.size()) {
                stats.frequency.resize(sym + 1, 0);
            }
            ++stats.frequency[sym];
        }
        stats.total = ds.size();
        out[c] = std::move(stats);
    }
    return out;
}

/// Throws ValidationError when a dataset breaks a model invariant.
inline void validate(const Dataset& ds) {
    const std::size_t dims = ds.dimensions();
    if (ds.cat_stats.size() != dims) {
        throw ValidationError("cat_stats must have one slot per attribute");
    }
    for (std::size_t i = 0; i < dims; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (ds.schema[i].name == ds.schema[j].name) {
                throw ValidationError("duplicate attribute name '" + ds.schema[i].name + "'");
            }
        }
        if (ds.is_numeric(i) && !(ds.schema[i].raw_min < ds.schema[i].raw_max)) {
            throw ValidationError("attribute '" + ds.schema[i].name + "' has raw_min >= raw_max");
        }
        if (ds.is_numeric(i) == ds.cat_stats[i].has_value()) {
            throw ValidationError("cat_stats presence does not match kind of '" +
                                  ds.schema[i].name + "'");
        }
    }
    for (std::size_t r = 0; r < ds.size(); ++r) {
        const auto& t = ds.tuples[r];
        if (t.id != r) {
            throw ValidationError("tuple ids must follow input order");
        }
        if (t.values.size() != dims) {
            throw ValidationError("tuple " + std::to_string(r) + " has wrong arity");
        }
        for (std::size_t c = 0; c < dims; ++c) {
            const double v = t.values[c];
            if (ds.is_numeric(c) && !(v >= 0.0 && v <= 1.0)) {
                throw ValidationError("tuple " + std::to_string(r) + " value outside [0,1]");
            }
        }
    }
    const auto recount = recount_categories(ds);
    for (std::size_t c = 0; c < dims; ++c) {
        if (!ds.cat_stats[c]) {
            continue;
        }
        if (ds.cat_stats[c]->total != ds.size() ||
            ds.cat_stats[c]->frequency != recount[c]->frequency) {
            throw ValidationError("cat_stats of '" + ds.schema[c].name + "' disagree with tuples");
        }
    }
}

/// Writes values back in source units, so that `normalize(read_csv(...), hints)`
/// with the matching sidecar reproduces the dataset.
inline void write_csv(const Dataset& ds, std::ostream& out) {
    for (std::size_t c = 0; c < ds.dimensions(); ++c) {
        out << (c ? "," : "") << ds.schema[c].name;
    }
    out << '\n';
    for (const auto& t : ds.tuples) {
        for (std::size_t c = 0; c < ds.dimensions(); ++c) {
            if (c) {
                out << ',';
            }
            const auto& spec = ds.schema[c];
            if (spec.kind == AttributeKind::Categorical) {
                out << ds.cat_stats[c]->symbols[static_cast<std::size_t>(t.values[c])];
            } else if (spec.raw_min == 0.0 && spec.raw_max == 1.0) {
                out << detail::format_double(t.values[c]);
            } else {
                out << detail::format_double(spec.raw_min +
                                             t.values[c] * (spec.raw_max - spec.raw_min));
            }
        }
        out << '\n';
    }
}

inline void write_schema(const Dataset& ds, std::ostream& out) {
    out << "# column kinds and source-unit bounds\n";
    for (const auto& spec : ds.schema) {
        if (spec.kind == AttributeKind::Categorical) {
            out << spec.name << ".kind = categorical\n";
        } else {
            out << spec.name << ".kind = numeric\n";
            out << spec.name << ".min = " << detail::format_double(spec.raw_min) << '\n';
            out << spec.name << ".max = " << detail::format_double(spec.raw_max) << '\n';
        }
    }
}

/// Loads `csv_path`, reading `<csv_path>.schema` (or `schema_path`) when present.
inline Dataset load_dataset(const std::string& csv_path, const std::string& schema_path = {}) {
    std::ifstream csv(csv_path);
    if (!csv) {
        throw Error("cannot open dataset '" + csv_path + "'");
    }
    const std::string sidecar = schema_path.empty() ? csv_path + ".schema" : schema_path;
    SchemaHints hints;
    if (std::ifstream schema(sidecar); schema) {
        hints = read_schema(schema);
    } else if (!schema_path.empty()) {
        throw Error("cannot open schema '" + schema_path + "'");
    }
    return normalize(read_csv(csv), hints);
}

inline void save_dataset(const Dataset& ds, const std::string& csv_path) {
    std::ofstream csv(csv_path);
    std::ofstream schema(csv_path + ".schema");
    if (!csv || !schema) {
        throw Error("cannot write dataset '" + csv_path + "'");
    }
    write_csv(ds, csv);
    write_schema(ds, schema);
}

} // namespace motley

#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage or validation
// error, 2 runtime failure.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "motley/motley.hpp"

namespace motley::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_runtime = 2;

struct QueryFlags {
    std::string data;
    std::string schema;
    std::string index;
    std::string point;
    std::string diversity;
    std::size_t k = 10;
    double mindiv = 0.0;
    double decay = 0.1;
    std::string metric = "euclidean";
    std::string aggregate = "harmonic";
    std::string algorithm = "buffered";
    bool no_prune = false;
};

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = detail::trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

/// Parses `name=value,...` in source units into a normalized query point.
inline std::vector<PointAttr> parse_point(const std::string& text, const Dataset& ds) {
    std::vector<PointAttr> out;
    for (const auto& item : split(text, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw ParameterError("point item '" + item + "' is not name=value");
        }
        const std::size_t attr = ds.require_attribute(detail::trim(item.substr(0, eq)));
        if (!ds.is_numeric(attr)) {
            throw ValidationError("point attribute '" + ds.schema[attr].name + "' is categorical");
        }
        const auto raw = detail::parse_double(detail::trim(item.substr(eq + 1)));
        if (!raw) {
            throw ParameterError("point item '" + item + "' has a non-numeric value");
        }
        const auto& spec = ds.schema[attr];
        const double v = (*raw - spec.raw_min) / (spec.raw_max - spec.raw_min);
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ValidationError("point value for '" + spec.name + "' lies outside [" +
                                  detail::format_double(spec.raw_min) + ", " +
                                  detail::format_double(spec.raw_max) + "]");
        }
        out.push_back({attr, v});
    }
    if (out.empty()) {
        throw ParameterError("--point names no attributes");
    }
    return out;
}

inline Query build_query(const QueryFlags& f, const Dataset& ds) {
    Query q;
    q.point = parse_point(f.point, ds);
    if (f.diversity.empty()) {
        for (const auto& p : q.point) q.diversity.push_back(p.attr);
    } else {
        for (const auto& name : split(f.diversity, ',')) {
            q.diversity.push_back(ds.require_attribute(name));
        }
    }
    q.k = f.k;
    q.min_div = f.mindiv;
    q.decay = f.decay;
    q.metric = parse_metric(f.metric);
    q.aggregate = parse_aggregate(f.aggregate);
    validate(q, ds);
    return q;
}

inline std::string raw_value(const Dataset& ds, const Tuple& t, std::size_t c) {
    const auto& spec = ds.schema[c];
    if (spec.kind == AttributeKind::Categorical) {
        return ds.cat_stats[c]->symbols[static_cast<std::size_t>(t.values[c])];
    }
    return detail::format_double(spec.raw_min + t.values[c] * (spec.raw_max - spec.raw_min));
}

inline RTree obtain_index(const QueryFlags& f, const Dataset& ds) {
    if (f.index.empty()) {
        return RTree::build(ds, ds.numeric_attributes());
    }
    std::ifstream in(f.index, std::ios::binary);
    if (!in) {
        throw Error("cannot open index '" + f.index + "'");
    }
    auto tree = RTree::load(in);
    tree.check_against(ds);
    return tree;
}

inline void print_result(std::ostream& out, const Dataset& ds, const Query& q,
                         const ResultSet& rs, const std::string& algorithm) {
    out << "# k=" << q.k << " mindiv=" << q.min_div << " decay=" << q.decay
        << " metric=" << to_string(q.metric) << " aggregate=" << to_string(q.aggregate)
        << " algorithm=" << algorithm << '\n';
    out << "rank,id,distance,diverse";
    for (const auto& spec : ds.schema) out << ',' << spec.name;
    out << '\n';
    std::size_t rank = 0;
    for (const auto& a : rs.answers) {
        out << ++rank << ',' << a.id << ',' << detail::format_double(a.distance) << ','
            << (a.diverse ? 1 : 0);
        const auto& t = ds.tuple(a.id);
        for (std::size_t c = 0; c < ds.dimensions(); ++c) out << ',' << raw_value(ds, t, c);
        out << '\n';
    }
    out << "score=" << detail::format_double(rs.score) << '\n';
    out << "fully_diverse=" << (rs.fully_diverse() ? 1 : 0) << '\n';
    out << "tuples_read=" << rs.stats.tuples_read << '\n';
    out << "nodes_expanded=" << rs.stats.nodes_expanded << '\n';
    out << "pqueue_peak=" << rs.stats.pqueue_peak << '\n';
    out << "wall_time_ms=" << std::fixed << std::setprecision(3)
        << static_cast<double>(rs.stats.wall_time.count()) / 1e6 << std::defaultfloat << '\n';
}

inline ResultSet execute(const QueryFlags& f, const Dataset& ds, const Query& q) {
    if (f.algorithm == "buffered" || f.algorithm == "direct") {
        const auto tree = obtain_index(f, ds);
        SolverOptions opts;
        opts.prune = !f.no_prune;
        return f.algorithm == "buffered" ? buffered_greedy(tree, ds, q, opts)
                                         : direct_greedy(tree, ds, q, opts);
    }
    const auto t0 = std::chrono::steady_clock::now();
    ResultSet rs;
    if (f.algorithm == "scan") {
        rs = sequential_scan_kndn(ds, q);
    } else if (f.algorithm == "knn") {
        rs = knn_linear(ds, q);
    } else {
        rs = optimal_kndn(ds, q);
    }
    rs.stats.wall_time = std::chrono::steady_clock::now() - t0;
    return rs;
}

inline void add_query_flags(CLI::App& cmd, QueryFlags& f) {
    cmd.add_option("--data", f.data, "dataset CSV")->required();
    cmd.add_option("--schema", f.schema, "schema sidecar (default <data>.schema)");
    cmd.add_option("--k", f.k, "answers to return")->check(CLI::PositiveNumber);
    cmd.add_option("--mindiv", f.mindiv, "diversity threshold in [0,1]");
    cmd.add_option("--decay", f.decay, "weight decay in (0,1)");
    cmd.add_option("--diversity-attrs", f.diversity, "comma-separated attribute names (default: point attributes)");
    cmd.add_option("--metric", f.metric, "euclidean|manhattan")
        ->check(CLI::IsMember({"euclidean", "manhattan"}));
    cmd.add_option("--aggregate", f.aggregate, "arithmetic|geometric|harmonic")
        ->check(CLI::IsMember({"arithmetic", "geometric", "harmonic"}));
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"K nearest diverse neighbor search"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-data", "generate a Zipf dataset");
    std::size_t gn = 50000, gd = 6, gv = 1000;
    double gtheta = 1.0;
    std::uint64_t gseed = 42;
    std::string gout;
    gen->add_option("--n", gn, "tuples")->check(CLI::PositiveNumber);
    gen->add_option("--d", gd, "attributes")->check(CLI::PositiveNumber);
    gen->add_option("--theta", gtheta, "skew");
    gen->add_option("--values", gv, "distinct values per attribute");
    gen->add_option("--seed", gseed, "RNG seed");
    gen->add_option("--out", gout, "output CSV")->required();

    auto* build = app.add_subcommand("build-index", "bulk-load an R-tree");
    std::string bdata, bschema, bout, bdims;
    std::size_t bbranch = 64;
    double bfill = 0.7;
    build->add_option("--data", bdata, "dataset CSV")->required();
    build->add_option("--schema", bschema, "schema sidecar");
    build->add_option("--out", bout, "index file")->required();
    build->add_option("--dims", bdims, "comma-separated attributes to index (default: all numeric)");
    build->add_option("--branching", bbranch, "node branching factor");
    build->add_option("--fill", bfill, "bulk-load fill factor");

    auto* query = app.add_subcommand("query", "run a KNDN query");
    QueryFlags qf;
    add_query_flags(*query, qf);
    query->add_option("--index", qf.index, "prebuilt index (default: build in memory)");
    query->add_option("--point", qf.point, "name=value,... in source units")->required();
    query->add_option("--algorithm", qf.algorithm, "buffered|direct|scan|knn|optimal")
        ->check(CLI::IsMember({"buffered", "direct", "scan", "knn", "optimal"}));
    query->add_flag("--no-prune", qf.no_prune, "disable MBR pruning");

    auto* bench = app.add_subcommand("bench", "run the experiment harness");
    std::string bconfig, bench_out;
    std::vector<std::string> overrides;
    bench->add_option("--config", bconfig, "key = value config file");
    bench->add_option("--set", overrides, "override key=value (repeatable)");
    bench->add_option("--out", bench_out, "output directory");

    auto* compare = app.add_subcommand("compare-oracle", "compare greedy against the optimal oracle");
    QueryFlags cf;
    cf.k = 4;
    cf.mindiv = 0.1;
    add_query_flags(*compare, cf);
    std::size_t cqueries = 20;
    std::uint64_t cseed = 7;
    std::string cattrs;
    compare->add_option("--queries", cqueries, "workload size")->check(CLI::PositiveNumber);
    compare->add_option("--seed", cseed, "workload seed");
    compare->add_option("--point-attrs", cattrs, "attributes to place query points on (default: all numeric)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*gen) {
            save_dataset(gen_zipf(gn, gd, gtheta, gv, gseed), gout);
            out << "wrote " << gn << " tuples to " << gout << '\n';
        } else if (*build) {
            const auto ds = load_dataset(bdata, bschema);
            std::vector<std::size_t> dims;
            if (bdims.empty()) {
                dims = ds.numeric_attributes();
            } else {
                for (const auto& name : split(bdims, ',')) dims.push_back(ds.require_attribute(name));
            }
            const auto tree = RTree::build(ds, dims, {bbranch, bfill});
            std::ofstream f(bout, std::ios::binary);
            if (!f) throw Error("cannot write index '" + bout + "'");
            tree.save(f);
            out << "indexed " << tree.size() << " tuples in " << tree.node_count()
                << " nodes, height " << tree.height() << '\n';
        } else if (*query) {
            const auto ds = load_dataset(qf.data, qf.schema);
            const auto q = build_query(qf, ds);
            print_result(out, ds, q, execute(qf, ds, q), qf.algorithm);
        } else if (*bench) {
            BenchConfig cfg;
            if (!bconfig.empty()) {
                std::ifstream f(bconfig);
                if (!f) throw Error("cannot open config '" + bconfig + "'");
                cfg.merge(f);
            }
            for (const auto& kv : overrides) cfg.set_assignment(kv);
            if (!bench_out.empty()) cfg.set("out", bench_out);
            Bench b(cfg, out);
            const auto summary = b.run();
            out << "dataset_checksum=" << detail::hex(summary.dataset_checksum) << '\n';
            for (const auto& file : summary.files) out << "wrote " << file << '\n';
        } else if (*compare) {
            const auto ds = load_dataset(cf.data, cf.schema);
            std::vector<std::size_t> attrs;
            if (cattrs.empty()) {
                attrs = ds.numeric_attributes();
            } else {
                for (const auto& name : split(cattrs, ',')) attrs.push_back(ds.require_attribute(name));
            }
            Query proto;
            proto.k = cf.k;
            proto.min_div = cf.mindiv;
            proto.decay = cf.decay;
            proto.metric = parse_metric(cf.metric);
            proto.aggregate = parse_aggregate(cf.aggregate);
            if (cf.diversity.empty()) {
                proto.diversity = attrs;
            } else {
                for (const auto& name : split(cf.diversity, ',')) proto.diversity.push_back(ds.require_attribute(name));
            }
            const auto tree = RTree::build(ds, ds.numeric_attributes());
            double sum = 0.0, worst = 1.0;
            std::size_t n = 0, optimal = 0;
            out << "query,greedy_score,optimal_score,ratio\n";
            for (const auto& q : gen_workload(cqueries, attrs, cseed, proto)) {
                validate(q, ds);
                const auto g = buffered_greedy(tree, ds, q);
                const auto o = optimal_kndn(ds, q);
                const double ratio = g.score / o.score;
                out << n << ',' << detail::format_double(g.score) << ','
                    << detail::format_double(o.score) << ',' << detail::format_double(ratio) << '\n';
                sum += ratio;
                worst = std::min(worst, ratio);
                optimal += ratio >= 1.0;
                ++n;
            }
            out << "avg_ratio=" << detail::format_double(sum / static_cast<double>(n)) << '\n';
            out << "worst_ratio=" << detail::format_double(worst) << '\n';
            out << "optimal_cases=" << optimal << '/' << n << '\n';
        }
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_ok;
}

} // namespace motley::cli

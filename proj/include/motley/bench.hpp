#pragma once

/**
 * @file bench.hpp
 *
 * Experiment harness. A run is described by a layered key-value config
 * (built-in defaults, then a config file, then command-line overrides) and
 * produces one CSV per experiment family:
 *
 *   distance.csv  k,mindiv,rank,avg_distance,queries
 *   quality.csv   k,mindiv,avg_score,full_fraction[,avg_ratio,worst_ratio,nonopt_cases,avg_overlap_nonopt]
 *   scan.csv      k,mindiv,avg_tuples_read,fraction_read,avg_nodes_expanded,avg_pqueue_peak
 *   pruning.csv   k,mindiv,reads_pruned,reads_unpruned,hash_pruned,hash_unpruned,hash_scan,identical
 *   subspace.csv  k,mindiv,point_dims,reads_global,reads_custom,ratio
 *
 * Every file starts with `#` provenance lines (dataset checksum, seeds).
 * Output depends only on the dataset and the config; timings go to the log
 * stream instead.
 */

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "datagen.hpp"
#include "hash.hpp"
#include "oracle.hpp"
#include "rtree.hpp"
#include "solver.hpp"
#include "types.hpp"

namespace motley {

class BenchConfig {
public:
    BenchConfig() {
        values_ = {
            {"dataset", ""},
            {"gen.n", "50000"},
            {"gen.d", "6"},
            {"gen.theta", "1.0"},
            {"gen.values", "1000"},
            {"gen.seed", "42"},
            {"workload.count", "100"},
            {"workload.seed", "7"},
            {"k", "10"},
            {"mindiv", "0,0.05,0.1,0.2"},
            {"decay", "0.1"},
            {"metric", "euclidean"},
            {"aggregate", "harmonic"},
            {"branching", "64"},
            {"fill", "0.7"},
            {"subset_dims", ""},
            {"oracle.max_n", "400"},
            {"oracle.max_k", "5"},
            {"experiments", "distance,quality,scan,pruning,subspace"},
            {"out", "bench_out"},
        };
    }

    /// Applies `key = value` lines; `#` starts a comment. Unknown keys are rejected.
    void merge(std::istream& in) {
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
            if (eq == std::string::npos) {
                throw FormatError("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
            }
            set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
        }
    }

    void set(const std::string& key, const std::string& value) {
        auto it = values_.find(key);
        if (it == values_.end()) {
            throw ParameterError("unknown config key '" + key + "'");
        }
        it->second = value;
    }

    /// Parses an override of the form `key=value`.
    void set_assignment(const std::string& kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ParameterError("override '" + kv + "' is not key=value");
        }
        set(detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
    }

    const std::string& str(const std::string& key) const { return values_.at(key); }

    double real(const std::string& key) const {
        auto v = detail::parse_double(str(key));
        if (!v) {
            throw ParameterError("config key '" + key + "' is not a number");
        }
        return *v;
    }

    std::size_t count(const std::string& key) const {
        const double v = real(key);
        if (v < 0 || v != std::floor(v)) {
            throw ParameterError("config key '" + key + "' must be a non-negative integer");
        }
        return static_cast<std::size_t>(v);
    }

    std::vector<double> reals(const std::string& key) const {
        std::vector<double> out;
        for (const auto& item : items(key)) {
            auto v = detail::parse_double(item);
            if (!v) {
                throw ParameterError("config key '" + key + "' has non-numeric item '" + item + "'");
            }
            out.push_back(*v);
        }
        return out;
    }

    std::vector<std::size_t> counts(const std::string& key) const {
        std::vector<std::size_t> out;
        for (double v : reals(key)) {
            if (v < 0 || v != std::floor(v)) {
                throw ParameterError("config key '" + key + "' must list non-negative integers");
            }
            out.push_back(static_cast<std::size_t>(v));
        }
        return out;
    }

    std::vector<std::string> items(const std::string& key) const {
        std::vector<std::string> out;
        std::stringstream ss(str(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = detail::trim(item);
            if (!item.empty()) {
                out.push_back(item);
            }
        }
        return out;
    }

    bool wants(const std::string& experiment) const {
        const auto list = items("experiments");
        return std::find(list.begin(), list.end(), experiment) != list.end();
    }

    /// Canonical `key=value;...` rendering, stamped into every CSV.
    std::string canonical() const {
        std::string out;
        for (const auto& [k, v] : values_) {
            if (k == "out") continue;
            out += k + "=" + v + ";";
        }
        return out;
    }

private:
    std::map<std::string, std::string> values_;
};

struct BenchSummary {
    std::vector<std::string> files;
    std::uint64_t dataset_checksum = 0;
};

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

inline std::string hex(std::uint64_t v) {
    std::ostringstream os;
    os << "0x" << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

inline std::uint64_t workload_hash(const std::vector<ResultSet>& results) {
    Fnv1a h;
    for (const auto& r : results) {
        h.value(fingerprint(r));
    }
    return h.digest();
}

} // namespace detail

class Bench {
public:
    Bench(BenchConfig cfg, std::ostream& log) : cfg_(std::move(cfg)), log_(log) {}

    BenchSummary run() {
        load_data();
        std::filesystem::create_directories(cfg_.str("out"));
        BenchSummary summary;
        summary.dataset_checksum = checksum_;
        if (cfg_.wants("distance")) summary.files.push_back(distance_experiment());
        if (cfg_.wants("quality")) summary.files.push_back(quality_experiment());
        if (cfg_.wants("scan")) summary.files.push_back(scan_experiment());
        if (cfg_.wants("pruning")) summary.files.push_back(pruning_experiment());
        if (cfg_.wants("subspace")) summary.files.push_back(subspace_experiment());
        return summary;
    }

private:
    void load_data() {
        if (!cfg_.str("dataset").empty()) {
            ds_ = load_dataset(cfg_.str("dataset"));
        } else {
            ds_ = gen_zipf(cfg_.count("gen.n"), cfg_.count("gen.d"), cfg_.real("gen.theta"),
                           cfg_.count("gen.values"), cfg_.count("gen.seed"));
        }
        checksum_ = checksum(ds_);
        dims_ = ds_.numeric_attributes();
        if (dims_.empty()) {
            throw ValidationError("bench dataset has no numeric attributes");
        }
        rcfg_ = {cfg_.count("branching"), cfg_.real("fill")};
        tree_ = RTree::build(ds_, dims_, rcfg_);
    }

    std::vector<Query> workload(std::size_t k, double mindiv, std::span<const std::size_t> dims) const {
        Query proto;
        proto.k = k;
        proto.min_div = mindiv;
        proto.decay = cfg_.real("decay");
        proto.metric = parse_metric(cfg_.str("metric"));
        proto.aggregate = parse_aggregate(cfg_.str("aggregate"));
        proto.diversity.assign(dims.begin(), dims.end());
        return gen_workload(cfg_.count("workload.count"), dims, cfg_.count("workload.seed"), proto);
    }

    std::ofstream open(const std::string& name, std::string& path) const {
        path = (std::filesystem::path(cfg_.str("out")) / name).string();
        std::ofstream out(path);
        if (!out) {
            throw Error("cannot write '" + path + "'");
        }
        out << "# dataset_checksum=" << detail::hex(checksum_) << " n=" << ds_.size()
            << " d=" << ds_.dimensions() << " workload.seed=" << cfg_.str("workload.seed")
            << " gen.seed=" << cfg_.str("gen.seed") << '\n';
        out << "# config=" << cfg_.canonical() << '\n';
        return out;
    }

    std::string distance_experiment() {
        std::string path;
        auto out = open("distance.csv", path);
        out << "k,mindiv,rank,avg_distance,queries\n";
        for (std::size_t k : cfg_.counts("k")) {
            std::vector<std::size_t> ranks;
            for (std::size_t r : {1, 2, 3, 5}) {
                if (r <= k) ranks.push_back(r);
            }
            if (std::find(ranks.begin(), ranks.end(), k) == ranks.end()) ranks.push_back(k);
            for (double md : cfg_.reals("mindiv")) {
                std::vector<double> sum(k + 1, 0.0);
                std::vector<std::size_t> n(k + 1, 0);
                for (const auto& q : workload(k, md, dims_)) {
                    const auto rs = buffered_greedy(tree_, ds_, q);
                    std::size_t rank = 0;
                    for (const auto& a : rs.answers) {
                        if (!a.diverse) continue;
                        ++rank;
                        sum[rank] += a.distance;
                        ++n[rank];
                    }
                }
                for (std::size_t r : ranks) {
                    out << k << ',' << detail::fmt(md) << ',' << r << ','
                        << (n[r] ? detail::fmt(sum[r] / static_cast<double>(n[r])) : "NA") << ','
                        << n[r] << '\n';
                }
            }
        }
        return path;
    }

    std::string quality_experiment() {
        std::string path;
        auto out = open("quality.csv", path);
        const OracleLimits limits{cfg_.count("oracle.max_n"), cfg_.count("oracle.max_k")};
        for (std::size_t k : cfg_.counts("k")) {
            const bool oracle = ds_.size() <= limits.max_n && k <= limits.max_k;
            if (!oracle) {
                out << "# warning: optimal oracle skipped for k=" << k << " (N=" << ds_.size()
                    << " exceeds limits N<=" << limits.max_n << ", K<=" << limits.max_k << ")\n";
            }
        }
        const auto ks = cfg_.counts("k");
        const bool any_oracle = std::any_of(ks.begin(), ks.end(), [&](std::size_t k) {
            return ds_.size() <= limits.max_n && k <= limits.max_k;
        });
        out << "k,mindiv,avg_score,full_fraction";
        if (any_oracle) out << ",avg_ratio,worst_ratio,nonopt_cases,avg_overlap_nonopt";
        out << '\n';
        for (std::size_t k : ks) {
            const bool oracle = ds_.size() <= limits.max_n && k <= limits.max_k;
            for (double md : cfg_.reals("mindiv")) {
                double score_sum = 0.0, ratio_sum = 0.0, worst = 1.0, overlap_sum = 0.0;
                std::size_t full = 0, nonopt = 0, compared = 0, total = 0;
                for (const auto& q : workload(k, md, dims_)) {
                    const auto rs = buffered_greedy(tree_, ds_, q);
                    ++total;
                    score_sum += rs.score;
                    full += rs.fully_diverse();
                    if (!oracle) continue;
                    const auto opt = optimal_kndn(ds_, q, limits);
                    if (!rs.fully_diverse() || !opt.fully_diverse()) continue;
                    ++compared;
                    const double ratio = rs.score / opt.score;
                    ratio_sum += ratio;
                    worst = std::min(worst, ratio);
                    auto a = rs.ids(), b = opt.ids();
                    std::sort(a.begin(), a.end());
                    std::sort(b.begin(), b.end());
                    if (a != b) {
                        ++nonopt;
                        std::vector<TupleId> common;
                        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                                              std::back_inserter(common));
                        overlap_sum += static_cast<double>(common.size()) / static_cast<double>(b.size());
                    }
                }
                out << k << ',' << detail::fmt(md) << ','
                    << detail::fmt(score_sum / static_cast<double>(total)) << ','
                    << detail::fmt(static_cast<double>(full) / static_cast<double>(total));
                if (any_oracle) {
                    if (oracle && compared) {
                        out << ',' << detail::fmt(ratio_sum / static_cast<double>(compared)) << ','
                            << detail::fmt(worst) << ',' << nonopt << ','
                            << (nonopt ? detail::fmt(overlap_sum / static_cast<double>(nonopt)) : "NA");
                    } else {
                        out << ",NA,NA,NA,NA";
                    }
                }
                out << '\n';
            }
        }
        return path;
    }

    std::string scan_experiment() {
        std::string path;
        auto out = open("scan.csv", path);
        out << "k,mindiv,avg_tuples_read,fraction_read,avg_nodes_expanded,avg_pqueue_peak\n";
        for (std::size_t k : cfg_.counts("k")) {
            for (double md : cfg_.reals("mindiv")) {
                double reads = 0, nodes = 0, peak = 0, nq = 0;
                std::chrono::nanoseconds index_time{0}, scan_time{0};
                for (const auto& q : workload(k, md, dims_)) {
                    const auto rs = buffered_greedy(tree_, ds_, q);
                    reads += static_cast<double>(rs.stats.tuples_read);
                    nodes += static_cast<double>(rs.stats.nodes_expanded);
                    peak += static_cast<double>(rs.stats.pqueue_peak);
                    index_time += rs.stats.wall_time;
                    const auto t0 = std::chrono::steady_clock::now();
                    (void)sequential_scan_kndn(ds_, q);
                    scan_time += std::chrono::steady_clock::now() - t0;
                    ++nq;
                }
                out << k << ',' << detail::fmt(md) << ',' << detail::fmt(reads / nq) << ','
                    << detail::fmt(reads / nq / static_cast<double>(ds_.size())) << ','
                    << detail::fmt(nodes / nq) << ',' << detail::fmt(peak / nq) << '\n';
                log_ << "k=" << k << " mindiv=" << md << " time vs sequential scan: "
                     << std::fixed << std::setprecision(1)
                     << 100.0 * static_cast<double>(index_time.count()) /
                            static_cast<double>(std::max<std::int64_t>(1, scan_time.count()))
                     << "%" << std::defaultfloat << '\n';
            }
        }
        return path;
    }

    std::string pruning_experiment() {
        std::string path;
        auto out = open("pruning.csv", path);
        out << "k,mindiv,reads_pruned,reads_unpruned,hash_pruned,hash_unpruned,hash_scan,identical\n";
        for (std::size_t k : cfg_.counts("k")) {
            for (double md : cfg_.reals("mindiv")) {
                double rp = 0, ru = 0, nq = 0;
                std::vector<ResultSet> pruned, unpruned, scanned;
                for (const auto& q : workload(k, md, dims_)) {
                    pruned.push_back(buffered_greedy(tree_, ds_, q));
                    unpruned.push_back(buffered_greedy(tree_, ds_, q, {.prune = false}));
                    scanned.push_back(sequential_scan_kndn(ds_, q));
                    rp += static_cast<double>(pruned.back().stats.tuples_read);
                    ru += static_cast<double>(unpruned.back().stats.tuples_read);
                    ++nq;
                }
                const auto hp = detail::workload_hash(pruned);
                const auto hu = detail::workload_hash(unpruned);
                const auto hs = detail::workload_hash(scanned);
                out << k << ',' << detail::fmt(md) << ',' << detail::fmt(rp / nq) << ','
                    << detail::fmt(ru / nq) << ',' << detail::hex(hp) << ',' << detail::hex(hu)
                    << ',' << detail::hex(hs) << ',' << (hp == hu && hu == hs ? 1 : 0) << '\n';
            }
        }
        return path;
    }

    std::string subspace_experiment() {
        std::string path;
        auto out = open("subspace.csv", path);
        out << "k,mindiv,point_dims,reads_global,reads_custom,ratio\n";
        auto sizes = cfg_.counts("subset_dims");
        if (sizes.empty()) {
            for (std::size_t m = 1; m <= dims_.size(); ++m) sizes.push_back(m);
        }
        for (std::size_t m : sizes) {
            if (m < 1 || m > dims_.size()) {
                throw ParameterError("subset_dims entries must lie in [1, numeric dimensions]");
            }
            const std::vector<std::size_t> sub(dims_.begin(), dims_.begin() + static_cast<std::ptrdiff_t>(m));
            const auto custom = RTree::build(ds_, sub, rcfg_);
            for (std::size_t k : cfg_.counts("k")) {
                for (double md : cfg_.reals("mindiv")) {
                    double rg = 0, rc = 0, nq = 0;
                    for (const auto& q : workload(k, md, sub)) {
                        rg += static_cast<double>(buffered_greedy(tree_, ds_, q).stats.tuples_read);
                        rc += static_cast<double>(buffered_greedy(custom, ds_, q).stats.tuples_read);
                        ++nq;
                    }
                    out << k << ',' << detail::fmt(md) << ',' << m << ',' << detail::fmt(rg / nq)
                        << ',' << detail::fmt(rc / nq) << ','
                        << (rc > 0 ? detail::fmt(rg / rc) : "NA") << '\n';
                }
            }
        }
        return path;
    }

    BenchConfig cfg_;
    std::ostream& log_;
    Dataset ds_;
    std::uint64_t checksum_ = 0;
    std::vector<std::size_t> dims_;
    RTreeConfig rcfg_;
    RTree tree_;
};

} // namespace motley

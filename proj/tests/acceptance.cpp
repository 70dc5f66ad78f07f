// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "support.hpp"

using namespace motley;
using namespace testing_support;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

std::vector<std::size_t> first_dims(std::size_t m) {
    std::vector<std::size_t> d(m);
    std::iota(d.begin(), d.end(), 0);
    return d;
}

std::vector<Query> workload(std::size_t count, std::size_t dims, std::uint64_t seed, std::size_t k, double mindiv) {
    Query proto;
    proto.k = k;
    proto.min_div = mindiv;
    proto.diversity = first_dims(dims);
    const auto d = first_dims(dims);
    return gen_workload(count, d, seed, proto);
}

const Dataset& desk_dataset() {
    static const Dataset ds = gen_zipf(50000, 6, 1.0, 1000, 42);
    return ds;
}

const RTree& desk_tree() {
    static const RTree t = RTree::build(desk_dataset(), first_dims(6));
    return t;
}

Verdict knn_equivalence() {
    Verdict v;
    const auto t0 = Clock::now();
    const auto ds = gen_zipf(10000, 4, 1.0, 1000, 1);
    const auto tree = RTree::build(ds, first_dims(4));
    std::size_t mismatches = 0, total = 0;
    for (std::size_t k : {1, 10}) {
        for (const auto& q : workload(200, 4, 2 + k, k, 0.0)) {
            ++total;
            mismatches += buffered_greedy(tree, ds, q).ids() != knn_linear(ds, q).ids();
        }
    }
    const double secs = seconds_since(t0);
    v.detail << total << " queries, " << mismatches << " mismatches, " << secs << " s";
    v.require(mismatches == 0, "ids differ from linear-scan KNN");
    v.require(secs < 60.0, "runtime >= 1 min");
    return v;
}

Verdict near_optimality() {
    Verdict v;
    const auto t0 = Clock::now();
    const auto ds = gen_zipf(200, 3, 1.0, 1000, 5);
    const auto tree = RTree::build(ds, first_dims(3));
    double worst_overall = 1.0;
    for (double md : {0.05, 0.1, 0.2}) {
        double ratio_sum = 0.0, worst = 1.0, overlap_nonopt = 0.0, overlap_all = 0.0;
        std::size_t nonopt = 0, n = 0;
        for (const auto& q : workload(100, 3, 11, 4, md)) {
            const auto g = buffered_greedy(tree, ds, q);
            const auto o = optimal_kndn(ds, q);
            const double ratio = g.score / o.score;
            ratio_sum += ratio;
            worst = std::min(worst, ratio);
            const auto a = sorted_ids(g), b = sorted_ids(o);
            std::vector<TupleId> common;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
            const double overlap = static_cast<double>(common.size()) / static_cast<double>(b.size());
            overlap_all += overlap;
            if (a != b) {
                ++nonopt;
                overlap_nonopt += overlap;
            }
            ++n;
        }
        const double avg = ratio_sum / static_cast<double>(n);
        const double ov = nonopt ? overlap_nonopt / static_cast<double>(nonopt) : 1.0;
        worst_overall = std::min(worst_overall, worst);
        v.detail << "mindiv=" << md << ": avg_ratio=" << avg << " worst=" << worst
                 << " nonopt=" << nonopt << "/" << n << " overlap_nonopt=" << ov
                 << " overlap_all=" << overlap_all / static_cast<double>(n) << "; ";
        std::ostringstream tag;
        tag << "mindiv " << md;
        v.require(avg >= 0.90, "average ratio < 0.90 at " + tag.str());
        v.require(ov >= 0.90, "overlap on non-optimal cases < 90% at " + tag.str());
        v.require(worst >= 0.75, "worst ratio < 0.75 at " + tag.str());
    }
    const double secs = seconds_since(t0);
    v.detail << "worst=" << worst_overall << ", " << secs << " s";
    v.require(secs < 300.0, "runtime >= 5 min");
    return v;
}

void pruning(std::size_t dims, Verdict& v) {
    const auto ds = gen_zipf(50000, dims, 1.0, 1000, 42);
    const auto tree = RTree::build(ds, first_dims(dims));
    double rp = 0.0, ru = 0.0;
    std::size_t differ = 0;
    for (const auto& q : workload(100, dims, 13, 10, 0.1)) {
        const auto p = buffered_greedy(tree, ds, q);
        SolverOptions off;
        off.prune = false;
        const auto u = buffered_greedy(tree, ds, q, off);
        differ += fingerprint(p) != fingerprint(u);
        rp += static_cast<double>(p.stats.tuples_read) / 100.0;
        ru += static_cast<double>(u.stats.tuples_read) / 100.0;
    }
    v.detail << dims << "-D: mean reads pruned=" << rp << " unpruned=" << ru << " differing=" << differ << "; ";
    v.require(differ == 0, std::to_string(dims) + "-D result sets differ");
    v.require(rp < ru, std::to_string(dims) + "-D pruning reads no fewer tuples");
}

Verdict pruning_soundness() {
    Verdict v;
    const auto t0 = Clock::now();
    pruning(4, v);
    pruning(6, v);
    const double secs = seconds_since(t0);
    v.detail << secs << " s";
    v.require(secs < 300.0, "runtime >= 5 min");
    return v;
}

Verdict scan_fraction() {
    Verdict v;
    const auto& ds = desk_dataset();
    std::map<double, double> fraction;
    for (double md : {0.0, 0.05, 0.1, 0.2}) {
        double reads = 0.0;
        for (const auto& q : workload(100, 6, 17, 10, md)) {
            reads += static_cast<double>(buffered_greedy(desk_tree(), ds, q).stats.tuples_read);
        }
        fraction[md] = reads / 100.0 / static_cast<double>(ds.size());
        v.detail << "mindiv=" << md << ": " << fraction[md] << " ";
        v.require(fraction[md] < 0.5, "fraction read >= 0.5");
    }
    v.require(fraction[0.0] < fraction[0.2], "MinDiv 0 reads no fewer tuples than MinDiv 0.2");
    return v;
}

Verdict diversity_guarantee() {
    Verdict v;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t fully = 0, violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 20 + rng() % 280, d = 1 + rng() % 4;
        RawTable raw;
        for (std::size_t a = 0; a < d; ++a) raw.header.push_back("n" + std::to_string(a));
        const bool categorical = rng() % 3 == 0;
        if (categorical) raw.header.push_back("c");
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::string> row;
            for (std::size_t a = 0; a < d; ++a) row.push_back(std::to_string(rng() % 200));
            if (categorical) row.push_back("s" + std::to_string(rng() % 5));
            raw.rows.push_back(row);
        }
        SchemaHints hints;
        for (std::size_t a = 0; a < d; ++a) {
            hints["n" + std::to_string(a)].min = 0;
            hints["n" + std::to_string(a)].max = 199;
        }
        if (categorical) hints["c"].kind = AttributeKind::Categorical;
        const auto ds = normalize(raw, hints);
        Query q;
        for (std::size_t a = 0; a < d; ++a) {
            if (a == 0 || rng() % 2) q.point.push_back({a, u(rng)});
        }
        for (std::size_t a = 0; a < ds.dimensions(); ++a) {
            if (rng() % 2 || q.diversity.empty()) q.diversity.push_back(a);
        }
        q.k = 1 + rng() % 8;
        q.min_div = 0.02 + 0.3 * u(rng);
        q.decay = 0.01 + 0.98 * u(rng);
        const auto tree = RTree::build(ds, ds.numeric_attributes(), {4 + rng() % 30, 0.7});
        const auto rs = rng() % 2 ? buffered_greedy(tree, ds, q) : direct_greedy(tree, ds, q);
        if (!rs.fully_diverse()) continue;
        ++fully;
        const DiversityMeasure m(ds, q);
        for (std::size_t i = 0; i < rs.answers.size(); ++i) {
            for (std::size_t j = i + 1; j < rs.answers.size(); ++j) {
                const auto& a = ds.tuple(rs.answers[i].id);
                const auto& b = ds.tuple(rs.answers[j].id);
                bool some = false;
                for (std::size_t l = 0; l < q.diversity.size(); ++l) some = some || m.delta(a, b, l) >= q.min_div;
                violations += !(m.divdist(a, b) >= q.min_div && some);
            }
        }
    }
    const double secs = seconds_since(t0);
    v.detail << fully << " fully diverse results of 1000, " << violations << " violating pairs, " << secs << " s";
    v.require(violations == 0, "a diverse pair falls below MinDiv");
    v.require(fully > 500, "too few fully diverse results to be meaningful");
    v.require(secs < 60.0, "runtime >= 1 min");
    return v;
}

Verdict weight_suite() {
    Verdict v;
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_sum = 0.0, worst_max = 0.0, worst_mean = 0.0;
    bool monotone = true;
    for (std::size_t L = 1; L <= 6; ++L) {
        for (double a : {1e-6, 0.001, 0.1, 0.5, 0.9, 0.999}) {
            const auto w = make_weights(L, a).weights;
            double s = 0.0;
            for (std::size_t j = 0; j < L; ++j) {
                s += w[j];
                monotone = monotone && (j == 0 || w[j] < w[j - 1]);
            }
            worst_sum = std::max(worst_sum, std::fabs(s - 1.0));
        }
    }
    const auto sharp = [](std::size_t L) { return make_weights(L, 1e-6); };
    const auto flat = [](std::size_t L) { return make_weights(L, 0.999); };
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t L = 1 + trial % 6;
        std::vector<double> d(L);
        for (auto& x : d) x = u(rng);
        auto d1 = d, d2 = d;
        const double mx = *std::max_element(d.begin(), d.end());
        const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(L);
        worst_max = std::max(worst_max, std::fabs(ordered_weighted_sum(d1, sharp(L)) - mx));
        worst_mean = std::max(worst_mean, std::fabs(ordered_weighted_sum(d2, flat(L)) - mean));
    }
    v.detail << "max |sum-1|=" << worst_sum << " max |divdist-max|=" << worst_max
             << " max |divdist-mean|=" << worst_mean;
    v.require(worst_sum <= 1e-12, "weights do not sum to 1");
    v.require(monotone, "weights not strictly decreasing");
    v.require(worst_max < 1e-5, "a=1e-6 does not approach max");
    v.require(worst_mean < 1e-3, "a=0.999 does not approach mean");
    return v;
}

Verdict browse_order() {
    Verdict v;
    std::mt19937_64 rng(31);
    std::size_t mismatched = 0, tuples = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 2000, d = 1 + rng() % 5;
        const auto ds = random_dataset(n, d, rng(), trial % 2);
        const auto tree = RTree::build(ds, ds.numeric_attributes(), {4 + rng() % 61, 0.7});
        auto q = full_query(ds, random_point(d, rng), 1, 0.0);
        if (trial % 3 == 0) q.metric = Metric::Manhattan;
        Browser b(tree, q);
        ScanSource scan(ds, q);
        const auto want = scan.order();
        std::size_t i = 0;
        double last = 0.0;
        bool ok = true;
        while (auto c = b.next()) {
            ok = ok && i < want.size() && c->id == want[i].id && c->distance == want[i].distance && c->distance >= last;
            last = c->distance;
            ++i;
        }
        ok = ok && i == want.size();
        mismatched += !ok;
        tuples += n;
    }
    v.detail << "50 datasets, " << tuples << " tuples, " << mismatched << " mismatching";
    v.require(mismatched == 0, "browse order differs from sorted scan");
    return v;
}

Verdict categorical_formula() {
    Verdict v;
    const auto sim = categorical_sim({{"a", "b"}, {3, 1}, 4});
    const double delta = attr_delta(0, 1, AttributeKind::Categorical, &sim);
    v.detail << "Sim(a)=" << sim.sim[0] << " Sim(b)=" << sim.sim[1] << " delta(a,b)=" << delta;
    v.require(sim.sim[0] == 0.5 && sim.sim[1] == 1.0 && delta == 0.5, "fixture values");
    std::mt19937_64 rng(37);
    std::size_t bad = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        CategoryStats st;
        const std::size_t m = 1 + rng() % 10;
        for (std::size_t i = 0; i < m; ++i) {
            st.symbols.push_back(std::to_string(i));
            st.frequency.push_back(1 + rng() % 20);
            st.total += st.frequency.back();
        }
        if (st.total < 2) continue;
        const auto s = categorical_sim(st);
        for (std::size_t i = 0; i < m; ++i) {
            bad += attr_delta(static_cast<double>(i), static_cast<double>(i), AttributeKind::Categorical, &s) != 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                bad += st.frequency[i] < st.frequency[j] && s.sim[i] < s.sim[j];
            }
        }
    }
    v.detail << "; " << bad << " property violations";
    v.require(bad == 0, "frequency monotonicity or identity property");
    return v;
}

Verdict scan_equivalence() {
    Verdict v;
    const auto t0 = Clock::now();
    const auto& ds = desk_dataset();
    std::size_t differ = 0, n = 0;
    const double sweep[] = {0.05, 0.1, 0.2, 0.0};
    for (int part = 0; part < 4; ++part) {
        for (const auto& q : workload(50, 6, 41 + part, 10, sweep[part])) {
            ++n;
            differ += fingerprint(buffered_greedy(desk_tree(), ds, q)) != fingerprint(sequential_scan_kndn(ds, q));
        }
    }
    const double secs = seconds_since(t0);
    v.detail << n << " queries, " << differ << " differing, " << secs << " s";
    v.require(differ == 0, "index and sequential scan disagree");
    v.require(secs < 120.0, "runtime >= 2 min");
    return v;
}

Verdict first_answer() {
    Verdict v;
    const auto& ds = desk_dataset();
    std::map<double, double> avg;
    std::size_t moved = 0;
    const auto base = workload(100, 6, 43, 10, 0.0);
    for (std::size_t i = 0; i < base.size(); ++i) {
        TupleId first = 0;
        for (double md : {0.0, 0.05, 0.1, 0.2}) {
            auto q = base[i];
            q.min_div = md;
            const auto rs = buffered_greedy(desk_tree(), ds, q);
            avg[md] += rs.answers[0].distance / static_cast<double>(base.size());
            if (md == 0.0) first = rs.answers[0].id;
            moved += rs.answers[0].id != first;
        }
    }
    for (const auto& [md, d] : avg) v.detail << "mindiv=" << md << ": " << d << " ";
    v.detail << "; " << moved << " queries changed answer 1";
    v.require(moved == 0, "first answer depends on MinDiv");
    for (const auto& [md, d] : avg) v.require(d == avg.begin()->second, "average distance differs");
    return v;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::vector<int> only;
    app.add_option("--only", only, "criteria to run (default all)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"KNN equivalence", knn_equivalence},
        {"near-optimality", near_optimality},
        {"pruning soundness and benefit", pruning_soundness},
        {"scan fraction", scan_fraction},
        {"diversity guarantee", diversity_guarantee},
        {"weight vector suite", weight_suite},
        {"browsing order", browse_order},
        {"categorical formula", categorical_formula},
        {"sequential-scan equivalence", scan_equivalence},
        {"first-answer invariance", first_answer},
    };
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto verdict = criteria[i].second();
        std::cout << "criterion " << id << " " << (verdict.pass ? "PASS" : "FAIL") << " ("
                  << criteria[i].first << "): " << verdict.detail.str() << std::endl;
        all = all && verdict.pass;
    }
    return all ? 0 : 1;
}

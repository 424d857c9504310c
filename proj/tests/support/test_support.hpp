#pragma once

// Shared helpers for the unit and acceptance tests: scratch directories,
// brute-force oracles and small synthetic data generators.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <unistd.h>

#include "jitvc/dataprep.hpp"
#include "jitvc/repo_miner.hpp"
#include "jitvc/visual_graph.hpp"

namespace jitvc::testing {

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "t") {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("jitvc-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

// --- oracles -----------------------------------------------------------------------------------

inline double entropy_oracle(const std::vector<double>& w) {
    double total = 0;
    std::size_t n = 0;
    for (double x : w) {
        if (x > 0) {
            total += x;
            ++n;
        }
    }
    if (n <= 1) return 0.0;
    double h = 0;
    for (double x : w) {
        if (x > 0) h -= (x / total) * std::log2(x / total);
    }
    return h / std::log2(static_cast<double>(n));
}

// Fraction of (positive, negative) pairs ordered correctly, ties counting 1/2.
inline double auc_oracle(const std::vector<double>& p, const std::vector<int>& y) {
    double good = 0, pairs = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (y[i] != 1) continue;
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (y[j] == 1) continue;
            pairs += 1;
            good += p[i] > p[j] ? 1.0 : (p[i] == p[j] ? 0.5 : 0.0);
        }
    }
    return good / pairs;
}

// Two-sided permutation p of the rank-sum statistic by listing every subset
// of the pooled sample that could have been `a`.
inline double rank_sum_enumeration(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::size_t n = pooled.size(), na = a.size();
    // mid-ranks by direct counting
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        double less = 0, equal = 0;
        for (std::size_t j = 0; j < n; ++j) {
            less += pooled[j] < pooled[i] ? 1 : 0;
            equal += pooled[j] == pooled[i] ? 1 : 0;
        }
        rank[i] = less + (equal + 1) / 2;
    }
    const double centre = static_cast<double>(na) * static_cast<double>(n + 1) / 2;
    double observed = 0;
    for (std::size_t i = 0; i < na; ++i) observed += rank[i];
    const double deviation = std::fabs(observed - centre);

    std::size_t extreme = 0, total = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != na) continue;
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) s += rank[i];
        }
        ++total;
        if (std::fabs(s - centre) >= deviation - 1e-9) ++extreme;
    }
    return static_cast<double>(extreme) / static_cast<double>(total);
}

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double normal(std::mt19937_64& rng) {
    // Box-Muller over the portable uniform above.
    double u1 = uniform01(rng), u2 = uniform01(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline double cauchy(std::mt19937_64& rng) { return std::tan(M_PI * (uniform01(rng) - 0.5)); }

// --- synthetic data -----------------------------------------------------------------------------

// Labelled table over the 20 metric names; positives shift a few features so
// learners have something to find.
inline dataprep::Dataset synthetic_features(std::uint64_t seed, std::size_t rows, double positive_rate = 0.3);

// Random patch graph with optional one-level subpatchers.
inline visual::VisualGraph random_graph(std::mt19937_64& rng, int max_nodes = 8, bool nested = true) {
    visual::VisualGraph g;
    const int n = static_cast<int>(rng() % static_cast<std::uint64_t>(max_nodes + 1));
    for (int i = 0; i < n; ++i) {
        visual::VisualNode node;
        node.id = "obj-" + std::to_string(i + 1);
        node.class_name = (rng() % 2) ? "newobj" : "message";
        node.attributes["text"] = "op " + std::to_string(rng() % 5);
        if (rng() % 3 == 0) node.attributes["numinlets"] = static_cast<int>(rng() % 3);
        node.position = visual::Position{static_cast<double>(rng() % 300), static_cast<double>(rng() % 300), 80, 22};
        if (nested && rng() % 5 == 0) {
            node.children = std::make_shared<visual::VisualGraph>(random_graph(rng, 3, false));
        }
        g.nodes.push_back(std::move(node));
    }
    for (int e = 0; n > 1 && e < n; ++e) {
        if (rng() % 2) continue;
        visual::VisualEdge edge;
        edge.source_id = g.nodes[rng() % static_cast<std::uint64_t>(n)].id;
        edge.dest_id = g.nodes[rng() % static_cast<std::uint64_t>(n)].id;
        edge.source_port = static_cast<int>(rng() % 2);
        edge.dest_port = static_cast<int>(rng() % 2);
        g.edges.push_back(edge);
    }
    return g;
}

}  // namespace jitvc::testing

#include "jitvc/metrics.hpp"

namespace jitvc::testing {

inline dataprep::Dataset synthetic_features(std::uint64_t seed, std::size_t rows, double positive_rate) {
    std::mt19937_64 rng(seed);
    dataprep::Dataset d;
    d.feature_names = metrics::feature_names();
    for (std::size_t i = 0; i < rows; ++i) {
        const int label = uniform01(rng) < positive_rate ? 1 : 0;
        std::vector<double> row(d.feature_names.size());
        for (std::size_t j = 0; j < row.size(); ++j) {
            double v = std::fabs(normal(rng)) * static_cast<double>(1 + j % 4);
            if (label == 1 && (j == 4 || j == 11 || j == 15)) v += 2.0;
            row[j] = std::round(v * 100) / 100;
        }
        row[10] = uniform01(rng) < (label ? 0.6 : 0.2) ? 1.0 : 0.0;  // is_fix
        d.push_back(std::move(row), label, "c" + std::to_string(i), static_cast<std::int64_t>(1000 + i));
    }
    // Guarantee both classes.
    d.labels[0] = 1;
    d.labels[1] = 0;
    return d;
}

// Relative path -> file bytes for every regular file under `root`.
inline std::map<std::string, std::string> tree_contents(const std::filesystem::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        out[std::filesystem::relative(e.path(), root).generic_string()] = buf.str();
    }
    return out;
}

}  // namespace jitvc::testing

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "jitvc/error.hpp"
#include "jitvc/learners.hpp"
#include "tree_builder.hpp"

namespace jitvc::learners {

double Tree::predict(std::span<const double> x) const {
    if (nodes.empty()) return 0.0;
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

std::size_t Tree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        best = std::max(best, d[i]);
        if (nodes[i].feature >= 0) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return best;
}

namespace {

// Threshold strictly between a < b that sends a left and b right.
double midpoint(double a, double b) {
    double m = a + (b - a) / 2.0;
    return m >= b ? a : m;
}

double binary_entropy(double pos, double n) {
    if (n <= 0 || pos <= 0 || pos >= n) return 0.0;
    double p = pos / n;
    return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

struct Split {
    bool valid = false;
    double score = 0;
    int feature = -1;
    double threshold = 0;
};

class ClassificationBuilder {
public:
    ClassificationBuilder(const Matrix& x, const std::vector<int>& y, const TreeOptions& options, std::uint64_t seed)
        : x_(x), y_(y), options_(options), rng_(seed), width_(x.empty() ? 0 : x.front().size()) {}

    Tree build(std::vector<std::size_t> samples) {
        Tree tree;
        grow(tree, std::move(samples), 0);
        return tree;
    }

private:
    int grow(Tree& tree, std::vector<std::size_t> samples, std::size_t depth) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        std::size_t pos = 0;
        for (auto s : samples) pos += y_[s] == 1 ? 1u : 0u;
        const double n = static_cast<double>(samples.size());
        tree.nodes[static_cast<std::size_t>(id)].value = n > 0 ? static_cast<double>(pos) / n : 0.0;

        if (samples.size() < options_.min_samples_split || pos == 0 || pos == samples.size() ||
            (options_.max_depth != 0 && depth >= options_.max_depth)) {
            return id;
        }
        Split best = find_split(samples, static_cast<double>(pos));
        if (!best.valid) return id;

        std::vector<std::size_t> left, right;
        for (auto s : samples) {
            (x_[s][static_cast<std::size_t>(best.feature)] <= best.threshold ? left : right).push_back(s);
        }
        samples.clear();
        samples.shrink_to_fit();
        int l = grow(tree, std::move(left), depth + 1);
        int r = grow(tree, std::move(right), depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    Split find_split(const std::vector<std::size_t>& samples, double pos) {
        std::vector<std::size_t> order(width_);
        std::iota(order.begin(), order.end(), 0);
        const bool subsample = options_.max_features != 0 && options_.max_features < width_;
        if (subsample) std::shuffle(order.begin(), order.end(), rng_);

        const double n = static_cast<double>(samples.size());
        const double parent = binary_entropy(pos, n);
        Split best;
        std::size_t visited = 0;
        std::vector<std::size_t> sorted(samples);
        for (auto f : order) {
            if (subsample && visited >= options_.max_features && best.valid) break;
            std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
                if (x_[a][f] != x_[b][f]) return x_[a][f] < x_[b][f];
                return a < b;
            });
            if (x_[sorted.front()][f] == x_[sorted.back()][f]) continue;
            ++visited;
            double left_pos = 0;
            for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
                left_pos += y_[sorted[i]] == 1 ? 1.0 : 0.0;
                double a = x_[sorted[i]][f], b = x_[sorted[i + 1]][f];
                if (a == b) continue;
                double nl = static_cast<double>(i + 1), nr = n - nl;
                double gain = parent - (nl / n) * binary_entropy(left_pos, nl) -
                              (nr / n) * binary_entropy(pos - left_pos, nr);
                if (!best.valid || gain > best.score) {
                    best = {true, gain, static_cast<int>(f), midpoint(a, b)};
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    const std::vector<int>& y_;
    TreeOptions options_;
    std::mt19937_64 rng_;
    std::size_t width_;
};

}  // namespace

Tree fit_classification_tree(const Matrix& x, const std::vector<int>& y, const TreeOptions& options,
                             std::uint64_t seed, const std::vector<std::size_t>& sample) {
    if (x.size() != y.size() || x.empty()) throw Error(ErrorCode::InvalidConfig, "tree needs matching, non-empty x/y");
    std::vector<std::size_t> samples = sample;
    if (samples.empty()) {
        samples.resize(x.size());
        std::iota(samples.begin(), samples.end(), 0);
    }
    return ClassificationBuilder(x, y, options, seed).build(std::move(samples));
}

namespace detail {

namespace {

class BoostingBuilder {
public:
    BoostingBuilder(const Matrix& x, const std::vector<double>& g, const std::vector<double>& h,
                    const RegressionTreeOptions& options)
        : x_(x), g_(g), h_(h), options_(options), width_(x.empty() ? 0 : x.front().size()) {}

    int grow(Tree& tree, std::vector<std::size_t> samples, std::size_t depth) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        double G = 0, H = 0;
        for (auto s : samples) {
            G += g_[s];
            H += h_[s];
        }
        tree.nodes[static_cast<std::size_t>(id)].value = leaf_value(G, H);
        if (samples.size() < 2 || depth >= options_.max_depth) return id;
        if (options_.criterion == BoostCriterion::Friedman && pure(samples, G)) return id;

        Split best = find_split(samples, G, H);
        if (!best.valid) return id;

        std::vector<std::size_t> left, right;
        for (auto s : samples) {
            (x_[s][static_cast<std::size_t>(best.feature)] <= best.threshold ? left : right).push_back(s);
        }
        int l = grow(tree, std::move(left), depth + 1);
        int r = grow(tree, std::move(right), depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

private:
    double leaf_value(double G, double H) const {
        if (options_.criterion == BoostCriterion::SecondOrder) return -G / (H + options_.lambda);
        return std::fabs(H) < 1e-150 ? 0.0 : -G / H;
    }

    bool pure(const std::vector<std::size_t>& samples, double G) const {
        const double mean = G / static_cast<double>(samples.size());
        double var = 0;
        for (auto s : samples) var += (g_[s] - mean) * (g_[s] - mean);
        return var / static_cast<double>(samples.size()) <= 1e-14;
    }

    Split find_split(const std::vector<std::size_t>& samples, double G, double H) const {
        const double n = static_cast<double>(samples.size());
        const double lambda = options_.lambda;
        Split best;
        std::vector<std::size_t> sorted(samples);
        for (std::size_t f = 0; f < width_; ++f) {
            std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
                if (x_[a][f] != x_[b][f]) return x_[a][f] < x_[b][f];
                return a < b;
            });
            double GL = 0, HL = 0;
            for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
                GL += g_[sorted[i]];
                HL += h_[sorted[i]];
                double a = x_[sorted[i]][f], b = x_[sorted[i + 1]][f];
                if (a == b) continue;
                double score;
                if (options_.criterion == BoostCriterion::SecondOrder) {
                    double GR = G - GL, HR = H - HL;
                    if (HL < options_.min_child_weight || HR < options_.min_child_weight) continue;
                    score = 0.5 * (GL * GL / (HL + lambda) + GR * GR / (HR + lambda) - G * G / (H + lambda));
                    if (score <= 1e-6) continue;
                } else {
                    double nl = static_cast<double>(i + 1), nr = n - nl;
                    double ml = -GL / nl, mr = -(G - GL) / nr;
                    score = nl * nr / n * (ml - mr) * (ml - mr);
                }
                if (!best.valid || score > best.score) best = {true, score, static_cast<int>(f), midpoint(a, b)};
            }
        }
        return best;
    }

    const Matrix& x_;
    const std::vector<double>& g_;
    const std::vector<double>& h_;
    RegressionTreeOptions options_;
    std::size_t width_;
};

}  // namespace

Tree fit_boosting_tree(const Matrix& x, const std::vector<double>& grad, const std::vector<double>& hess,
                       const RegressionTreeOptions& options) {
    std::vector<std::size_t> samples(x.size());
    std::iota(samples.begin(), samples.end(), 0);
    Tree tree;
    BoostingBuilder(x, grad, hess, options).grow(tree, std::move(samples), 0);
    return tree;
}

}  // namespace detail

}  // namespace jitvc::learners

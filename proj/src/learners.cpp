#include "jitvc/learners.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "jitvc/error.hpp"
#include "jitvc/io.hpp"
#include "tree_builder.hpp"

namespace jitvc::learners {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(LearnerKind kind) noexcept {
    switch (kind) {
    case LearnerKind::LR: return "LR";
    case LearnerKind::DT: return "DT";
    case LearnerKind::RF: return "RF";
    case LearnerKind::GBM: return "GBM";
    case LearnerKind::XGB: return "XGB";
    case LearnerKind::NN: return "NN";
    }
    return "LR";
}

std::string_view to_string(FeatureCombo combo) noexcept {
    switch (combo) {
    case FeatureCombo::Base: return "Base";
    case FeatureCombo::Textual: return "Textual";
    case FeatureCombo::Visual: return "Visual";
    case FeatureCombo::Combined: return "Combined";
    }
    return "Base";
}

LearnerKind learner_kind_from_string(std::string_view s) {
    for (auto k : kAllKinds) {
        if (to_string(k) == s) return k;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown learner " + std::string(s));
}

FeatureCombo feature_combo_from_string(std::string_view s) {
    for (auto c : kAllCombos) {
        if (to_string(c) == s) return c;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown feature combo " + std::string(s));
}

std::vector<std::string> combo_features(FeatureCombo combo, const std::vector<std::string>& kept) {
    std::vector<std::string> out;
    for (const auto& name : kept) {
        metrics::Category cat;
        try {
            cat = metrics::category_of(name);
        } catch (const Error&) {
            continue;
        }
        bool take = cat == metrics::Category::Process ||
                    (cat == metrics::Category::Textual &&
                     (combo == FeatureCombo::Textual || combo == FeatureCombo::Combined)) ||
                    (cat == metrics::Category::Visual &&
                     (combo == FeatureCombo::Visual || combo == FeatureCombo::Combined));
        if (take) out.push_back(name);
    }
    return out;
}

std::uint64_t derive_seed(std::uint64_t seed, LearnerKind kind, FeatureCombo combo) noexcept {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ static_cast<std::uint64_t>(kind)) ^ (static_cast<std::uint64_t>(combo) << 8));
}

Standardizer Standardizer::fit(const Matrix& x) {
    Standardizer s;
    const std::size_t d = x.empty() ? 0 : x.front().size();
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 1.0);
    if (x.empty()) return s;
    const double n = static_cast<double>(x.size());
    for (std::size_t j = 0; j < d; ++j) {
        for (const auto& r : x) s.mean[j] += r[j];
        s.mean[j] /= n;
        double var = 0;
        for (const auto& r : x) var += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
        var /= n;
        if (var > 0) s.scale[j] = std::sqrt(var);
    }
    return s;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
    return out;
}

Matrix Standardizer::apply(const Matrix& x) const {
    Matrix out;
    out.reserve(x.size());
    for (const auto& r : x) out.push_back(apply(r));
    return out;
}

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double mean_log_loss(const std::vector<double>& raw, const std::vector<int>& y) {
    double s = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) s += softplus(raw[i]) - (y[i] == 1 ? raw[i] : 0.0);
    return s / static_cast<double>(raw.size());
}

void check_training_data(const Matrix& x, const std::vector<int>& y) {
    if (x.empty() || x.size() != y.size()) throw Error(ErrorCode::InvalidConfig, "training data is empty or ragged");
    auto pos = std::count(y.begin(), y.end(), 1);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(y.size())) throw Error(ErrorCode::SingleClass, "labels hold one class");
}

}  // namespace

// --- logistic regression --------------------------------------------------------------

double logistic_objective(const LogisticParams& params, const Matrix& x, const std::vector<int>& y, double l2) {
    double loss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double z = params.intercept;
        for (std::size_t j = 0; j < params.weights.size(); ++j) z += params.weights[j] * x[i][j];
        loss += softplus(z) - (y[i] == 1 ? z : 0.0);
    }
    double reg = 0;
    for (double w : params.weights) reg += w * w;
    return loss + 0.5 * l2 * reg;
}

std::vector<double> logistic_gradient(const LogisticParams& params, const Matrix& x, const std::vector<int>& y,
                                      double l2) {
    const std::size_t d = params.weights.size();
    std::vector<double> g(d + 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double z = params.intercept;
        for (std::size_t j = 0; j < d; ++j) z += params.weights[j] * x[i][j];
        double r = sigmoid(z) - (y[i] == 1 ? 1.0 : 0.0);
        for (std::size_t j = 0; j < d; ++j) g[j] += r * x[i][j];
        g[d] += r;
    }
    for (std::size_t j = 0; j < d; ++j) g[j] += l2 * params.weights[j];
    return g;
}

LogisticParams fit_logistic(const Matrix& x, const std::vector<int>& y, const LogisticOptions& options) {
    check_training_data(x, y);
    const auto n = static_cast<Eigen::Index>(x.size());
    const auto d = static_cast<Eigen::Index>(x.front().size());

    Eigen::MatrixXd design(n, d + 1);
    Eigen::VectorXd target(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) design(i, j) = x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        design(i, d) = 1.0;
        target(i) = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : 0.0;
    }
    Eigen::VectorXd penalty = Eigen::VectorXd::Constant(d + 1, options.l2);
    penalty(d) = 0.0;

    auto objective = [&](const Eigen::VectorXd& theta) {
        Eigen::VectorXd z = design * theta;
        double loss = 0;
        for (Eigen::Index i = 0; i < n; ++i) loss += softplus(z(i)) - target(i) * z(i);
        return loss + 0.5 * (penalty.array() * theta.array().square()).sum();
    };

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
    double f = objective(theta);
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        Eigen::VectorXd z = design * theta;
        Eigen::VectorXd p(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            p(i) = sigmoid(z(i));
            w(i) = p(i) * (1.0 - p(i));
        }
        Eigen::VectorXd grad = design.transpose() * (p - target) + penalty.cwiseProduct(theta);
        if (grad.norm() < options.gradient_tolerance) break;

        Eigen::MatrixXd hess = design.transpose() * w.asDiagonal() * design;
        hess.diagonal() += penalty;
        hess(d, d) += 1e-10;
        Eigen::VectorXd step = hess.ldlt().solve(-grad);
        if (!step.allFinite() || grad.dot(step) >= 0) step = -grad;

        double t = 1.0;
        const double slope = grad.dot(step);
        double f_new = objective(theta + t * step);
        while (f_new > f + 1e-4 * t * slope && t > 1e-12) {
            t *= 0.5;
            f_new = objective(theta + t * step);
        }
        if (!(f_new <= f)) break;
        theta += t * step;
        f = f_new;
    }

    LogisticParams params;
    params.weights.assign(theta.data(), theta.data() + d);
    params.intercept = theta(d);
    return params;
}

// --- forest -------------------------------------------------------------------------------

ForestParams fit_forest(const Matrix& x, const std::vector<int>& y, const ForestOptions& options, std::uint64_t seed) {
    check_training_data(x, y);
    const std::size_t d = x.front().size();
    TreeOptions tree_options;
    if (options.sqrt_features) {
        tree_options.max_features = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));
    }

    ForestParams forest;
    forest.trees.resize(options.n_trees);
    const auto n_trees = static_cast<std::ptrdiff_t>(options.n_trees);
    std::vector<std::exception_ptr> errors(options.n_trees);

#pragma omp parallel for schedule(dynamic) if (options.parallel)
    for (std::ptrdiff_t t = 0; t < n_trees; ++t) {
        try {
            std::mt19937_64 rng(derive_seed(seed, LearnerKind::RF, FeatureCombo::Base) + static_cast<std::uint64_t>(t));
            std::vector<std::size_t> sample;
            if (options.bootstrap) {
                sample.resize(x.size());
                for (auto& s : sample) s = static_cast<std::size_t>(rng() % x.size());
                std::sort(sample.begin(), sample.end());
            }
            forest.trees[static_cast<std::size_t>(t)] = fit_classification_tree(x, y, tree_options, rng(), sample);
        } catch (...) {
            errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return forest;
}

// --- boosting ---------------------------------------------------------------------------------

BoostParams fit_gbm(const Matrix& x, const std::vector<int>& y, const GbmOptions& options,
                    std::vector<double>* loss_trace) {
    check_training_data(x, y);
    const std::size_t n = x.size();
    const double prevalence = static_cast<double>(std::count(y.begin(), y.end(), 1)) / static_cast<double>(n);

    BoostParams params;
    params.base_score = std::log(prevalence / (1.0 - prevalence));
    std::vector<double> raw(n, params.base_score), g(n), h(n), delta(n), trial(n);
    double loss = mean_log_loss(raw, y);
    if (loss_trace) loss_trace->push_back(loss);

    detail::RegressionTreeOptions tree_options;
    tree_options.criterion = detail::BoostCriterion::Friedman;
    tree_options.max_depth = options.max_depth;

    for (std::size_t round = 0; round < options.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            double p = sigmoid(raw[i]);
            g[i] = p - (y[i] == 1 ? 1.0 : 0.0);
            h[i] = p * (1.0 - p);
        }
        Tree tree = detail::fit_boosting_tree(x, g, h, tree_options);
        for (std::size_t i = 0; i < n; ++i) delta[i] = tree.predict(x[i]);

        double scale = options.learning_rate;
        double new_loss = 0;
        for (int halvings = 0;; ++halvings) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = raw[i] + scale * delta[i];
            new_loss = mean_log_loss(trial, y);
            if (new_loss <= loss || halvings >= 30) break;
            scale *= 0.5;
        }
        if (new_loss > loss) {
            scale = 0.0;
            new_loss = loss;
            trial = raw;
        }
        for (auto& node : tree.nodes) node.value *= scale;
        raw.swap(trial);
        loss = new_loss;
        if (loss_trace) loss_trace->push_back(loss);
        params.trees.push_back(std::move(tree));
    }
    return params;
}

BoostParams fit_xgb(const Matrix& x, const std::vector<int>& y, const XgbOptions& options,
                    std::vector<double>* loss_trace) {
    check_training_data(x, y);
    const std::size_t n = x.size();
    BoostParams params;
    params.base_score = 0.0;
    std::vector<double> raw(n, 0.0), g(n), h(n);
    if (loss_trace) loss_trace->push_back(mean_log_loss(raw, y));

    detail::RegressionTreeOptions tree_options;
    tree_options.criterion = detail::BoostCriterion::SecondOrder;
    tree_options.max_depth = options.max_depth;
    tree_options.lambda = options.lambda;
    tree_options.min_child_weight = options.min_child_weight;

    for (std::size_t round = 0; round < options.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            double p = sigmoid(raw[i]);
            g[i] = p - (y[i] == 1 ? 1.0 : 0.0);
            h[i] = p * (1.0 - p);
        }
        Tree tree = detail::fit_boosting_tree(x, g, h, tree_options);
        for (auto& node : tree.nodes) node.value *= options.learning_rate;
        for (std::size_t i = 0; i < n; ++i) raw[i] += tree.predict(x[i]);
        if (loss_trace) loss_trace->push_back(mean_log_loss(raw, y));
        params.trees.push_back(std::move(tree));
    }
    return params;
}

// --- multi-layer perceptron --------------------------------------------------------------------

namespace {

double mlp_forward(const MlpParams& m, std::span<const double> x, std::vector<double>* hidden_out = nullptr) {
    double z2 = m.b2;
    if (hidden_out) hidden_out->resize(m.hidden);
    for (std::size_t u = 0; u < m.hidden; ++u) {
        double z = m.b1[u];
        const double* w = &m.w1[u * m.inputs];
        for (std::size_t j = 0; j < m.inputs; ++j) z += w[j] * x[j];
        double a = z > 0 ? z : 0.0;
        if (hidden_out) (*hidden_out)[u] = a;
        z2 += m.w2[u] * a;
    }
    return z2;
}

struct Adam {
    std::vector<double> m, v;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8, lr;
    std::size_t t = 0;
    Adam(std::size_t n, double learning_rate) : m(n, 0.0), v(n, 0.0), lr(learning_rate) {}
    void step(std::vector<double*>& params, const std::vector<double>& grads) {
        ++t;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        const double rate = lr * std::sqrt(c2) / c1;
        for (std::size_t i = 0; i < grads.size(); ++i) {
            m[i] = beta1 * m[i] + (1 - beta1) * grads[i];
            v[i] = beta2 * v[i] + (1 - beta2) * grads[i] * grads[i];
            *params[i] -= rate * m[i] / (std::sqrt(v[i]) + eps);
        }
    }
};

}  // namespace

MlpParams fit_mlp(const Matrix& x, const std::vector<int>& y, const MlpOptions& options, std::uint64_t seed) {
    check_training_data(x, y);
    const std::size_t n = x.size(), d = x.front().size(), hsize = options.hidden;
    std::mt19937_64 rng(seed);
    auto uniform = [&](double bound) { return (static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0) * bound; };

    MlpParams m;
    m.inputs = d;
    m.hidden = hsize;
    const double b1_bound = std::sqrt(6.0 / static_cast<double>(d + hsize));
    const double b2_bound = std::sqrt(2.0 / static_cast<double>(hsize + 1));
    m.w1.resize(hsize * d);
    for (auto& w : m.w1) w = uniform(b1_bound);
    m.b1.resize(hsize);
    for (auto& b : m.b1) b = uniform(b1_bound);
    m.w2.resize(hsize);
    for (auto& w : m.w2) w = uniform(b2_bound);
    m.b2 = uniform(b2_bound);

    std::vector<double*> params;
    for (auto& w : m.w1) params.push_back(&w);
    for (auto& b : m.b1) params.push_back(&b);
    for (auto& w : m.w2) params.push_back(&w);
    params.push_back(&m.b2);
    Adam adam(params.size(), options.learning_rate);

    const std::size_t batch = std::max<std::size_t>(1, std::min(options.batch_size, n));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grads(params.size()), hidden;

    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            const double bs = static_cast<double>(end - start);
            std::fill(grads.begin(), grads.end(), 0.0);
            double* gw1 = grads.data();
            double* gb1 = gw1 + hsize * d;
            double* gw2 = gb1 + hsize;
            double& gb2 = grads.back();
            for (std::size_t k = start; k < end; ++k) {
                const auto& row = x[order[k]];
                double dz2 = (sigmoid(mlp_forward(m, row, &hidden)) - (y[order[k]] == 1 ? 1.0 : 0.0)) / bs;
                gb2 += dz2;
                for (std::size_t u = 0; u < hsize; ++u) {
                    gw2[u] += dz2 * hidden[u];
                    if (hidden[u] <= 0) continue;
                    double dz1 = dz2 * m.w2[u];
                    gb1[u] += dz1;
                    double* gw = gw1 + u * d;
                    for (std::size_t j = 0; j < d; ++j) gw[j] += dz1 * row[j];
                }
            }
            for (std::size_t i = 0; i < hsize * d; ++i) gw1[i] += options.alpha * m.w1[i] / bs;
            for (std::size_t u = 0; u < hsize; ++u) gw2[u] += options.alpha * m.w2[u] / bs;
            adam.step(params, grads);
        }
    }
    return m;
}

// --- model facade ---------------------------------------------------------------------------------

TrainedModel train(LearnerKind kind, const Dataset& data, FeatureCombo combo, const std::vector<std::string>& kept,
                   std::uint64_t seed) {
    TrainedModel model;
    model.kind = kind;
    model.combo = combo;
    model.seed = seed;
    model.feature_names = combo_features(combo, kept);
    if (model.feature_names.empty()) {
        throw Error(ErrorCode::EmptyFeatureSet, std::string(to_string(combo)) + " has no selected features");
    }
    const Dataset sub = data.select(model.feature_names);
    check_training_data(sub.rows, sub.labels);

    switch (kind) {
    case LearnerKind::LR: {
        model.standardizer = Standardizer::fit(sub.rows);
        model.params = fit_logistic(model.standardizer->apply(sub.rows), sub.labels);
        break;
    }
    case LearnerKind::DT:
        model.params = fit_classification_tree(sub.rows, sub.labels, TreeOptions{}, seed);
        break;
    case LearnerKind::RF:
        model.params = fit_forest(sub.rows, sub.labels, ForestOptions{}, seed);
        break;
    case LearnerKind::GBM:
        model.params = fit_gbm(sub.rows, sub.labels);
        break;
    case LearnerKind::XGB:
        model.params = fit_xgb(sub.rows, sub.labels);
        break;
    case LearnerKind::NN: {
        model.standardizer = Standardizer::fit(sub.rows);
        model.params = fit_mlp(model.standardizer->apply(sub.rows), sub.labels, MlpOptions{}, seed);
        break;
    }
    }
    return model;
}

double predict_proba(const TrainedModel& model, std::span<const double> row) {
    if (row.size() != model.feature_names.size()) {
        throw Error(ErrorCode::MissingFeature, "row has " + std::to_string(row.size()) + " values, model expects " +
                                                   std::to_string(model.feature_names.size()));
    }
    std::vector<double> scaled;
    if (model.standardizer) {
        scaled = model.standardizer->apply(row);
        row = scaled;
    }
    return std::visit(
        [&](const auto& p) -> double {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, LogisticParams>) {
                double z = p.intercept;
                for (std::size_t j = 0; j < p.weights.size(); ++j) z += p.weights[j] * row[j];
                return sigmoid(z);
            } else if constexpr (std::is_same_v<P, Tree>) {
                return std::clamp(p.predict(row), 0.0, 1.0);
            } else if constexpr (std::is_same_v<P, ForestParams>) {
                if (p.trees.empty()) return 0.5;
                double s = 0;
                for (const auto& t : p.trees) s += t.predict(row);
                return std::clamp(s / static_cast<double>(p.trees.size()), 0.0, 1.0);
            } else if constexpr (std::is_same_v<P, BoostParams>) {
                double z = p.base_score;
                for (const auto& t : p.trees) z += t.predict(row);
                return sigmoid(z);
            } else {
                return sigmoid(mlp_forward(p, row));
            }
        },
        model.params);
}

double predict_proba(const TrainedModel& model, const std::map<std::string, double>& row) {
    std::vector<double> ordered;
    ordered.reserve(model.feature_names.size());
    for (const auto& name : model.feature_names) {
        auto it = row.find(name);
        if (it == row.end()) throw Error(ErrorCode::MissingFeature, name);
        ordered.push_back(it->second);
    }
    return predict_proba(model, std::span<const double>(ordered));
}

std::vector<double> predict_proba(const TrainedModel& model, const Dataset& data) {
    const Dataset sub = data.select(model.feature_names);
    std::vector<double> out;
    out.reserve(sub.size());
    for (const auto& r : sub.rows) out.push_back(predict_proba(model, std::span<const double>(r)));
    return out;
}

// --- serialization ---------------------------------------------------------------------------------

namespace {

constexpr int kModelFormatVersion = 1;

ordered_json tree_to_json(const Tree& t) {
    ordered_json nodes = ordered_json::array();
    for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    return nodes;
}

Tree tree_from_json(const json& j) {
    Tree t;
    for (const auto& n : j) {
        t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                           n.at(4).get<double>()});
    }
    return t;
}

ordered_json trees_to_json(const std::vector<Tree>& trees) {
    ordered_json out = ordered_json::array();
    for (const auto& t : trees) out.push_back(tree_to_json(t));
    return out;
}

}  // namespace

ordered_json to_json(const TrainedModel& model) {
    ordered_json j;
    j["format"] = "jitvc-model";
    j["version"] = kModelFormatVersion;
    j["kind"] = to_string(model.kind);
    j["combo"] = to_string(model.combo);
    j["seed"] = model.seed;
    j["features"] = model.feature_names;
    if (model.standardizer) {
        j["standardizer"] = {{"mean", model.standardizer->mean}, {"scale", model.standardizer->scale}};
    } else {
        j["standardizer"] = nullptr;
    }
    ordered_json params;
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, LogisticParams>) {
                params["weights"] = p.weights;
                params["intercept"] = p.intercept;
            } else if constexpr (std::is_same_v<P, Tree>) {
                params["tree"] = tree_to_json(p);
            } else if constexpr (std::is_same_v<P, ForestParams>) {
                params["trees"] = trees_to_json(p.trees);
            } else if constexpr (std::is_same_v<P, BoostParams>) {
                params["base_score"] = p.base_score;
                params["trees"] = trees_to_json(p.trees);
            } else {
                params["inputs"] = p.inputs;
                params["hidden"] = p.hidden;
                params["w1"] = p.w1;
                params["b1"] = p.b1;
                params["w2"] = p.w2;
                params["b2"] = p.b2;
            }
        },
        model.params);
    j["params"] = std::move(params);
    return j;
}

TrainedModel model_from_json(const json& j) {
    try {
        if (j.at("format").get<std::string>() != "jitvc-model" || j.at("version").get<int>() != kModelFormatVersion) {
            throw Error(ErrorCode::Io, "unsupported model format/version");
        }
        TrainedModel m;
        m.kind = learner_kind_from_string(j.at("kind").get<std::string>());
        m.combo = feature_combo_from_string(j.at("combo").get<std::string>());
        m.seed = j.at("seed").get<std::uint64_t>();
        m.feature_names = j.at("features").get<std::vector<std::string>>();
        if (const auto& s = j.at("standardizer"); !s.is_null()) {
            m.standardizer = Standardizer{s.at("mean").get<std::vector<double>>(), s.at("scale").get<std::vector<double>>()};
        }
        const auto& p = j.at("params");
        switch (m.kind) {
        case LearnerKind::LR:
            m.params = LogisticParams{p.at("weights").get<std::vector<double>>(), p.at("intercept").get<double>()};
            break;
        case LearnerKind::DT: m.params = tree_from_json(p.at("tree")); break;
        case LearnerKind::RF: {
            ForestParams f;
            for (const auto& t : p.at("trees")) f.trees.push_back(tree_from_json(t));
            m.params = std::move(f);
            break;
        }
        case LearnerKind::GBM:
        case LearnerKind::XGB: {
            BoostParams b;
            b.base_score = p.at("base_score").get<double>();
            for (const auto& t : p.at("trees")) b.trees.push_back(tree_from_json(t));
            m.params = std::move(b);
            break;
        }
        case LearnerKind::NN: {
            MlpParams nn;
            nn.inputs = p.at("inputs").get<std::size_t>();
            nn.hidden = p.at("hidden").get<std::size_t>();
            nn.w1 = p.at("w1").get<std::vector<double>>();
            nn.b1 = p.at("b1").get<std::vector<double>>();
            nn.w2 = p.at("w2").get<std::vector<double>>();
            nn.b2 = p.at("b2").get<double>();
            m.params = std::move(nn);
            break;
        }
        }
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Io, std::string("bad model file: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
    io::write_text(path, to_json(model).dump() + "\n");
}

TrainedModel load_model(const std::filesystem::path& path) {
    auto j = json::parse(io::read_text(path), nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::Io, "malformed model " + path.string());
    return model_from_json(j);
}

// --- matrix ----------------------------------------------------------------------------------------------

std::string model_file_name(LearnerKind kind, FeatureCombo combo) {
    return std::string(to_string(kind)) + "_" + std::string(to_string(combo)) + ".json";
}

std::vector<MatrixCell> train_matrix(const Dataset& balanced_train, const std::vector<std::string>& kept,
                                     std::uint64_t seed, bool parallel) {
    std::vector<MatrixCell> cells;
    for (auto kind : kAllKinds) {
        for (auto combo : kAllCombos) cells.push_back({kind, combo, std::nullopt, {}});
    }
    const auto n = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        auto& cell = cells[static_cast<std::size_t>(i)];
        try {
            cell.model = train(cell.kind, balanced_train, cell.combo, kept, derive_seed(seed, cell.kind, cell.combo));
        } catch (const Error& e) {
            cell.error = e.what();
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    }
    return cells;
}

}  // namespace jitvc::learners

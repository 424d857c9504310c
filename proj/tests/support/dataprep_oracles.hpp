#pragma once

// Independent re-implementations used to check feature selection and SMOTE.

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "jitvc/dataprep.hpp"
#include "jitvc/metrics.hpp"
#include "support/test_support.hpp"

namespace jitvc::testing {

inline std::vector<double> midranks(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0, equal = 0;
        for (double w : v) {
            less += w < v[i];
            equal += w == v[i];
        }
        r[i] = less + (equal + 1) / 2;
    }
    return r;
}

inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

inline std::optional<double> spearman_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(midranks(x), midranks(y));
}

// R^2 of column j on the others plus an intercept, by modified Gram-Schmidt.
inline double vif_oracle(std::size_t j, const std::vector<std::vector<double>>& cols) {
    const std::size_t n = cols[j].size();
    std::vector<std::vector<double>> basis;
    auto add = [&](std::vector<double> v) {
        double norm0 = 0;
        for (double x : v) norm0 += x * x;
        for (const auto& q : basis) {
            double dot = 0;
            for (std::size_t i = 0; i < n; ++i) dot += q[i] * v[i];
            for (std::size_t i = 0; i < n; ++i) v[i] -= dot * q[i];
        }
        double norm = 0;
        for (double x : v) norm += x * x;
        if (norm0 == 0 || norm < 1e-20 * norm0) return;
        norm = std::sqrt(norm);
        for (auto& x : v) x /= norm;
        basis.push_back(std::move(v));
    };
    add(std::vector<double>(n, 1.0));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        if (k != j) add(cols[k]);
    }
    std::vector<double> y = cols[j];
    double mean = 0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    double ss_tot = 0;
    for (double v : y) ss_tot += (v - mean) * (v - mean);
    if (ss_tot == 0) return std::numeric_limits<double>::infinity();
    for (const auto& q : basis) {
        double dot = 0;
        for (std::size_t i = 0; i < n; ++i) dot += q[i] * y[i];
        for (std::size_t i = 0; i < n; ++i) y[i] -= dot * q[i];
    }
    double ss_res = 0;
    for (double v : y) ss_res += v * v;
    const double r2 = 1 - ss_res / ss_tot;
    if (r2 >= 1 - 1e-10) return std::numeric_limits<double>::infinity();
    return 1 / (1 - std::max(r2, 0.0));
}

inline bool selection_ok(const dataprep::Dataset& d, const std::vector<std::string>& kept, double rho_max,
                         double vif_max) {
    std::vector<std::vector<double>> cols;
    for (const auto& name : kept) {
        const auto it = std::find(d.feature_names.begin(), d.feature_names.end(), name);
        cols.push_back(d.column(static_cast<std::size_t>(it - d.feature_names.begin())));
    }
    for (std::size_t a = 0; a < cols.size(); ++a) {
        for (std::size_t b = a + 1; b < cols.size(); ++b) {
            if (std::fabs(spearman_oracle(cols[a], cols[b]).value_or(0.0)) >= rho_max) return false;
        }
    }
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (vif_oracle(j, cols) >= vif_max) return false;
    }
    return true;
}

// Columns mixing latent factors, exact duplicates, exact sums, rounding and
// the odd constant. With `metric_names`, names are drawn from the feature list
// so the category floor comes into play.
inline dataprep::Dataset random_collinear_dataset(std::mt19937_64& rng, bool metric_names) {
    const std::size_t p = 4 + rng() % 11, n = 15 + rng() % 66, k = 1 + rng() % 3;
    std::vector<std::vector<double>> latent(k, std::vector<double>(n));
    for (auto& f : latent) {
        for (auto& v : f) v = normal(rng);
    }
    std::vector<std::vector<double>> cols;
    for (std::size_t j = 0; j < p; ++j) {
        std::vector<double> c(n);
        const auto roll = rng() % 10;
        if (roll < 3 || cols.size() < 2) {
            for (auto& v : c) v = normal(rng);
        } else if (roll < 6) {
            const double noise = 0.05 + uniform01(rng);
            const auto f = rng() % k;
            for (std::size_t i = 0; i < n; ++i) c[i] = latent[f][i] * (1 + uniform01(rng)) + noise * normal(rng);
        } else if (roll == 6) {
            c = cols[rng() % cols.size()];
        } else if (roll == 7) {
            const auto a = rng() % cols.size(), b = rng() % cols.size();
            for (std::size_t i = 0; i < n; ++i) c[i] = cols[a][i] + 2 * cols[b][i];
        } else if (roll == 8) {
            for (auto& v : c) v = std::round(std::fabs(normal(rng)) * 2);
        } else {
            for (auto& v : c) v = 1.0;
        }
        cols.push_back(std::move(c));
    }

    dataprep::Dataset d;
    if (metric_names) {
        std::vector<std::string> pool = metrics::feature_names();
        std::vector<std::size_t> idx(pool.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(p);
        std::sort(idx.begin(), idx.end());
        for (auto i : idx) d.feature_names.push_back(pool[i]);
    } else {
        for (std::size_t j = 0; j < p; ++j) d.feature_names.push_back("f" + std::to_string(j));
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(p);
        for (std::size_t j = 0; j < p; ++j) row[j] = cols[j][i];
        d.push_back(std::move(row), static_cast<int>(rng() % 2), "r" + std::to_string(i), static_cast<std::int64_t>(i));
    }
    return d;
}

// Largest distance (standardized, max-norm) from any synthetic row to the
// nearest segment between two real minority rows. Boolean columns must copy
// an endpoint's value.
inline double max_convexity_residual(const dataprep::Dataset& original, const dataprep::Dataset& augmented,
                                     const std::vector<bool>& boolean_columns) {
    const std::size_t p = original.width();
    const int minority = original.positives() * 2 < original.size() ? 1 : 0;
    std::vector<const std::vector<double>*> real;
    for (std::size_t i = 0; i < original.size(); ++i) {
        if (original.labels[i] == minority) real.push_back(&original.rows[i]);
    }
    std::vector<double> mean(p, 0), scale(p, 1);
    for (std::size_t j = 0; j < p; ++j) {
        const auto c = original.column(j);
        for (double v : c) mean[j] += v;
        mean[j] /= static_cast<double>(c.size());
        double var = 0;
        for (double v : c) var += (v - mean[j]) * (v - mean[j]);
        var /= static_cast<double>(c.size());
        if (var > 0) scale[j] = std::sqrt(var);
    }
    double worst = 0;
    for (std::size_t s = original.size(); s < augmented.size(); ++s) {
        if (augmented.labels[s] != minority) return std::numeric_limits<double>::infinity();
        const auto& row = augmented.rows[s];
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < real.size(); ++a) {
            for (std::size_t b = 0; b < real.size(); ++b) {
                if (a == b) continue;
                const auto& x = *real[a];
                const auto& y = *real[b];
                double num = 0, den = 0;
                bool bool_ok = true;
                for (std::size_t j = 0; j < p; ++j) {
                    if (boolean_columns[j]) {
                        bool_ok = bool_ok && (row[j] == x[j] || row[j] == y[j]);
                        continue;
                    }
                    const double dx = (y[j] - x[j]) / scale[j], ds = (row[j] - x[j]) / scale[j];
                    num += dx * ds;
                    den += dx * dx;
                }
                if (!bool_ok) continue;
                const double u = den == 0 ? 0 : std::clamp(num / den, 0.0, 1.0);
                double r = 0;
                for (std::size_t j = 0; j < p; ++j) {
                    if (boolean_columns[j]) continue;
                    const double want = x[j] + u * (y[j] - x[j]);
                    r = std::max(r, std::fabs(row[j] - want) / scale[j]);
                }
                best = std::min(best, r);
            }
        }
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace jitvc::testing

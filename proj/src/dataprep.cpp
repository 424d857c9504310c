#include "jitvc/dataprep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "jitvc/error.hpp"
#include "jitvc/io.hpp"

namespace jitvc::dataprep {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<double> Dataset::column(std::size_t j) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[j]);
    return out;
}

std::size_t Dataset::positives() const noexcept {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

Dataset Dataset::select(const std::vector<std::string>& names) const {
    std::vector<std::size_t> cols;
    for (const auto& name : names) {
        auto it = std::find(feature_names.begin(), feature_names.end(), name);
        if (it == feature_names.end()) throw Error(ErrorCode::MissingFeature, name);
        cols.push_back(static_cast<std::size_t>(it - feature_names.begin()));
    }
    Dataset out;
    out.feature_names = names;
    out.labels = labels;
    out.ids = ids;
    out.timestamps = timestamps;
    out.rows.reserve(rows.size());
    for (const auto& r : rows) {
        std::vector<double> row;
        row.reserve(cols.size());
        for (auto c : cols) row.push_back(r[c]);
        out.rows.push_back(std::move(row));
    }
    return out;
}

void Dataset::push_back(std::vector<double> row, int label, std::string id, std::int64_t timestamp) {
    rows.push_back(std::move(row));
    labels.push_back(label);
    ids.push_back(std::move(id));
    timestamps.push_back(timestamp);
}

Dataset from_features(const std::vector<metrics::FeatureVector>& features) {
    Dataset d;
    d.feature_names = metrics::feature_names();
    for (const auto& f : features) d.push_back(f.values(), f.is_defect_inducing ? 1 : 0, f.commit_hash, f.timestamp);
    return d;
}

Split time_split(const Dataset& data, double train_fraction) {
    if (data.size() < 5) throw Error(ErrorCode::TooFewRows, std::to_string(data.size()) + " rows");
    if (!(train_fraction > 0 && train_fraction < 1)) throw Error(ErrorCode::InvalidConfig, "train fraction must be in (0,1)");

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (data.timestamps[a] != data.timestamps[b]) return data.timestamps[a] < data.timestamps[b];
        return data.ids[a] < data.ids[b];
    });
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(data.size())));

    Split split;
    split.train.feature_names = split.test.feature_names = data.feature_names;
    for (std::size_t k = 0; k < order.size(); ++k) {
        auto i = order[k];
        auto& target = k < n_train ? split.train : split.test;
        target.push_back(data.rows[i], data.labels[i], data.ids[i], data.timestamps[i]);
    }
    return split;
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

std::optional<double> spearman_rho(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidConfig, "spearman needs equal lengths >= 2");
    auto rx = average_ranks(x);
    auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0 || syy == 0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double vif(std::size_t j, const std::vector<std::vector<double>>& columns) {
    if (j >= columns.size()) throw Error(ErrorCode::InvalidConfig, "vif column out of range");
    const auto n = static_cast<Eigen::Index>(columns[j].size());
    const auto p = static_cast<Eigen::Index>(columns.size());

    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) y(r) = columns[j][static_cast<std::size_t>(r)];
    const double mean = y.mean();
    const double ss_tot = (y.array() - mean).square().sum();
    const double scale = std::max(1.0, y.squaredNorm());
    if (ss_tot <= 1e-12 * scale) return std::numeric_limits<double>::infinity();
    if (p == 1) return 1.0;

    Eigen::MatrixXd x(n, p);
    x.col(0).setOnes();
    Eigen::Index c = 1;
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (k == j) continue;
        for (Eigen::Index r = 0; r < n; ++r) x(r, c) = columns[k][static_cast<std::size_t>(r)];
        ++c;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
    Eigen::VectorXd beta = cod.solve(y);
    const double ss_res = (y - x * beta).squaredNorm();
    const double r2 = 1.0 - ss_res / ss_tot;
    if (r2 >= 1.0 - 1e-10) return std::numeric_limits<double>::infinity();
    return 1.0 / (1.0 - std::max(r2, 0.0));
}

FeatureSelection autospearman(const Dataset& train, const AutoSpearmanConfig& config) {
    const std::size_t p = train.width();
    std::vector<std::vector<double>> cols(p);
    for (std::size_t j = 0; j < p; ++j) cols[j] = train.column(j);

    std::vector<std::string> category(p);
    for (std::size_t j = 0; j < p; ++j) {
        const auto& name = train.feature_names[j];
        if (auto it = config.categories.find(name); it != config.categories.end()) {
            category[j] = it->second;
        } else if (config.categories.empty()) {
            try {
                category[j] = std::string(metrics::to_string(metrics::category_of(name)));
            } catch (const Error&) {
                category[j].clear();
            }
        }
    }

    std::vector<bool> alive(p, true);
    auto last_of_category = [&](std::size_t j) {
        if (!config.category_floor || category[j].empty()) return false;
        for (std::size_t k = 0; k < p; ++k) {
            if (k != j && alive[k] && category[k] == category[j]) return false;
        }
        return true;
    };

    FeatureSelection sel;

    // Stage 1: pairwise Spearman correlation.
    std::vector<std::vector<double>> rho(p, std::vector<double>(p, 0.0));
    if (train.size() >= 2) {
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = a + 1; b < p; ++b) {
                rho[a][b] = rho[b][a] = std::fabs(spearman_rho(cols[a], cols[b]).value_or(0.0));
            }
        }
    }
    auto mean_abs_rho = [&](std::size_t j) {
        double s = 0;
        std::size_t n = 0;
        for (std::size_t k = 0; k < p; ++k) {
            if (k == j || !alive[k]) continue;
            s += rho[j][k];
            ++n;
        }
        return n == 0 ? 0.0 : s / static_cast<double>(n);
    };
    while (true) {
        double best = -1;
        std::size_t ba = 0, bb = 0;
        for (std::size_t a = 0; a < p; ++a) {
            if (!alive[a]) continue;
            for (std::size_t b = a + 1; b < p; ++b) {
                if (alive[b] && rho[a][b] > best) {
                    best = rho[a][b];
                    ba = a;
                    bb = b;
                }
            }
        }
        if (best < config.correlation_threshold) break;
        const double ma = mean_abs_rho(ba), mb = mean_abs_rho(bb);
        std::size_t drop = ma < mb ? bb : ba;
        if (ma == mb) drop = bb;
        std::size_t keep = drop == ba ? bb : ba;
        if (last_of_category(drop) && !last_of_category(keep)) std::swap(drop, keep);
        alive[drop] = false;
        sel.dropped.push_back({train.feature_names[drop], DroppedFeature::Reason::Correlation,
                               train.feature_names[keep], best});
    }

    // Stage 2: variance inflation.
    while (true) {
        std::vector<std::size_t> live;
        for (std::size_t j = 0; j < p; ++j) {
            if (alive[j]) live.push_back(j);
        }
        if (live.empty()) break;
        std::vector<std::vector<double>> live_cols;
        for (auto j : live) live_cols.push_back(cols[j]);
        std::vector<std::pair<double, std::size_t>> scores;
        for (std::size_t k = 0; k < live.size(); ++k) {
            double v = vif(k, live_cols);
            if (v >= config.vif_threshold) scores.emplace_back(v, live[k]);
        }
        if (scores.empty()) break;
        // Highest VIF first; among equal scores the later column goes first.
        std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second > b.second;
        });
        auto pick = scores.front();
        for (const auto& s : scores) {
            if (!last_of_category(s.second)) {
                pick = s;
                break;
            }
        }
        alive[pick.second] = false;
        sel.dropped.push_back({train.feature_names[pick.second], DroppedFeature::Reason::Vif, {}, pick.first});
    }

    for (std::size_t j = 0; j < p; ++j) {
        if (alive[j]) sel.kept.push_back(train.feature_names[j]);
    }
    return sel;
}

ordered_json to_json(const FeatureSelection& selection) {
    ordered_json j;
    j["kept"] = selection.kept;
    ordered_json dropped = ordered_json::array();
    for (const auto& d : selection.dropped) {
        ordered_json e;
        e["feature"] = d.feature;
        e["reason"] = d.reason == DroppedFeature::Reason::Correlation ? "correlation" : "vif";
        if (!d.partner.empty()) e["partner"] = d.partner;
        e["score"] = std::isfinite(d.score) ? ordered_json(d.score) : ordered_json("inf");
        dropped.push_back(std::move(e));
    }
    j["dropped"] = std::move(dropped);
    return j;
}

FeatureSelection selection_from_json(const json& j) {
    FeatureSelection sel;
    try {
        sel.kept = j.at("kept").get<std::vector<std::string>>();
        for (const auto& e : j.at("dropped")) {
            DroppedFeature d;
            d.feature = e.at("feature").get<std::string>();
            d.reason = e.at("reason").get<std::string>() == "vif" ? DroppedFeature::Reason::Vif
                                                                  : DroppedFeature::Reason::Correlation;
            d.partner = e.value("partner", std::string{});
            const auto& s = e.at("score");
            d.score = s.is_string() ? std::numeric_limits<double>::infinity() : s.get<double>();
            sel.dropped.push_back(std::move(d));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Io, std::string("bad selection: ") + e.what());
    }
    return sel;
}

namespace {

std::size_t draw_index(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }
double draw_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

SmoteResult smote(const Dataset& train, const SmoteConfig& config) {
    const std::size_t pos = train.positives();
    const std::size_t neg = train.size() - pos;
    if (pos == 0 || neg == 0) throw Error(ErrorCode::SingleClass, "SMOTE needs both classes");

    SmoteResult result;
    result.data = train;
    const std::size_t p = train.width();
    result.boolean_columns.assign(p, true);
    for (const auto& row : train.rows) {
        for (std::size_t j = 0; j < p; ++j) {
            if (row[j] != 0.0 && row[j] != 1.0) result.boolean_columns[j] = false;
        }
    }
    if (pos == neg) return result;

    const int minority_label = pos < neg ? 1 : 0;
    std::vector<std::size_t> minority;
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (train.labels[i] == minority_label) minority.push_back(i);
    }
    if (minority.size() < 2) throw Error(ErrorCode::MinorityTooSmall, std::to_string(minority.size()) + " minority rows");

    // Standardize with train statistics for the neighbor search only.
    std::vector<double> mean(p, 0.0), scale(p, 1.0);
    const double n = static_cast<double>(train.size());
    for (std::size_t j = 0; j < p; ++j) {
        for (const auto& row : train.rows) mean[j] += row[j];
        mean[j] /= n;
        double var = 0;
        for (const auto& row : train.rows) var += (row[j] - mean[j]) * (row[j] - mean[j]);
        var /= n;
        if (var > 0) scale[j] = std::sqrt(var);
    }
    auto distance2 = [&](std::size_t a, std::size_t b) {
        double d = 0;
        for (std::size_t j = 0; j < p; ++j) {
            double diff = (train.rows[a][j] - train.rows[b][j]) / scale[j];
            d += diff * diff;
        }
        return d;
    };

    const std::size_t k = std::max<std::size_t>(1, std::min(config.k, minority.size() - 1));
    std::vector<std::vector<std::size_t>> neighbors(minority.size());
    for (std::size_t a = 0; a < minority.size(); ++a) {
        std::vector<std::pair<double, std::size_t>> cand;
        for (std::size_t b = 0; b < minority.size(); ++b) {
            if (b != a) cand.emplace_back(distance2(minority[a], minority[b]), minority[b]);
        }
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
        for (std::size_t t = 0; t < k; ++t) neighbors[a].push_back(cand[t].second);
    }

    std::mt19937_64 rng(config.seed);
    const std::size_t needed = std::max(pos, neg) - minority.size();
    for (std::size_t s = 0; s < needed; ++s) {
        const std::size_t a = draw_index(rng, minority.size());
        const std::size_t nb = neighbors[a][draw_index(rng, k)];
        const double u = draw_unit(rng);
        const auto& x = train.rows[minority[a]];
        const auto& y = train.rows[nb];
        std::vector<double> row(p);
        for (std::size_t j = 0; j < p; ++j) {
            row[j] = x[j] + u * (y[j] - x[j]);
            if (result.boolean_columns[j]) row[j] = std::round(row[j]);
        }
        result.data.push_back(std::move(row), minority_label, "synthetic-" + std::to_string(s), 0);
        result.origins.push_back({minority[a], nb, u});
    }
    return result;
}

std::string dataset_csv(const Dataset& data) {
    std::string out = "id,timestamp";
    for (const auto& name : data.feature_names) out += "," + name;
    out += ",label\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        out += data.ids[i] + "," + std::to_string(data.timestamps[i]);
        for (double v : data.rows[i]) out += "," + io::format_double(v);
        out += "," + std::to_string(data.labels[i]) + "\n";
    }
    return out;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
    io::write_text(path, dataset_csv(data));
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    auto lines = io::split_lines(io::read_text(path));
    if (lines.empty()) throw Error(ErrorCode::Io, "empty dataset " + path.string());
    auto split_csv = [](const std::string& line) {
        std::vector<std::string> cols;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cols.push_back(cell);
        if (!line.empty() && line.back() == ',') cols.emplace_back();
        return cols;
    };
    auto header = split_csv(lines[0]);
    if (header.size() < 3 || header[0] != "id" || header[1] != "timestamp" || header.back() != "label") {
        throw Error(ErrorCode::Io, "unexpected dataset header in " + path.string());
    }
    Dataset d;
    d.feature_names.assign(header.begin() + 2, header.end() - 1);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        auto cols = split_csv(lines[li]);
        if (cols.size() != header.size()) throw Error(ErrorCode::Io, "bad column count in " + path.string());
        std::vector<double> row;
        for (std::size_t k = 2; k + 1 < cols.size(); ++k) row.push_back(std::stod(cols[k]));
        d.push_back(std::move(row), std::stoi(cols.back()), cols[0], std::stoll(cols[1]));
    }
    return d;
}

}  // namespace jitvc::dataprep

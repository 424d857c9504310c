#include "jitvc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>

#include "jitvc/error.hpp"
#include "jitvc/io.hpp"

namespace jitvc::evaluation {

using nlohmann::ordered_json;

double auc(std::span<const double> probabilities, std::span<const int> labels) {
    if (probabilities.size() != labels.size()) throw Error(ErrorCode::InvalidConfig, "auc: size mismatch");
    const auto ranks = dataprep::average_ranks(probabilities);
    double pos = 0, rank_sum = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            pos += 1;
            rank_sum += ranks[i];
        }
    }
    const double neg = static_cast<double>(labels.size()) - pos;
    if (pos == 0 || neg == 0) throw Error(ErrorCode::SingleClass, "auc needs both labels");
    return (rank_sum - pos * (pos + 1) / 2) / (pos * neg);
}

Confusion confusion(std::span<const double> probabilities, std::span<const int> labels, double threshold) {
    if (probabilities.size() != labels.size()) throw Error(ErrorCode::InvalidConfig, "confusion: size mismatch");
    Confusion c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool predicted = probabilities[i] >= threshold;
        const bool actual = labels[i] == 1;
        if (predicted && actual) ++c.tp;
        else if (predicted) ++c.fp;
        else if (actual) ++c.fn;
        else ++c.tn;
    }
    return c;
}

double mcc(const Confusion& c) {
    const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
    const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom == 0) return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(denom);
}

Score score(std::span<const double> probabilities, std::span<const int> labels) {
    Score s;
    s.confusion = confusion(probabilities, labels);
    s.mcc = mcc(s.confusion);
    const auto pos = std::count(labels.begin(), labels.end(), 1);
    if (pos > 0 && pos < static_cast<std::ptrdiff_t>(labels.size())) s.auc = auc(probabilities, labels);
    return s;
}

RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyGroup, "rank-sum test needs two non-empty samples");
    const std::size_t na = a.size(), nb = b.size(), n = na + nb;
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = dataprep::average_ranks(pooled);

    double rank_sum_a = 0;
    for (std::size_t i = 0; i < na; ++i) rank_sum_a += ranks[i];
    const double dna = static_cast<double>(na), dnb = static_cast<double>(nb), dn = static_cast<double>(n);

    RankSumResult r;
    r.u = rank_sum_a - dna * (dna + 1) / 2;

    if (n <= kExactRankSumLimit) {
        // Mid-ranks are multiples of 1/2, so doubled ranks are integers and
        // the whole distribution is counted exactly.
        std::vector<int> doubled(n);
        for (std::size_t i = 0; i < n; ++i) doubled[i] = static_cast<int>(std::lround(2 * ranks[i]));
        const int max_sum = static_cast<int>(2 * n * (n + 1) / 2);
        std::vector<std::vector<std::uint64_t>> count(na + 1, std::vector<std::uint64_t>(max_sum + 1, 0));
        count[0][0] = 1;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = std::min(i + 1, na); k >= 1; --k) {
                for (int s = max_sum; s >= doubled[i]; --s) count[k][s] += count[k - 1][s - doubled[i]];
            }
        }
        const long centre = static_cast<long>(na * (n + 1));  // doubled expected rank sum
        long observed = 0;
        for (std::size_t i = 0; i < na; ++i) observed += doubled[i];
        const long deviation = std::labs(observed - centre);
        std::uint64_t extreme = 0, total = 0;
        for (int s = 0; s <= max_sum; ++s) {
            total += count[na][s];
            if (std::labs(s - centre) >= deviation) extreme += count[na][s];
        }
        r.p = static_cast<double>(extreme) / static_cast<double>(total);
        r.exact = true;
        return r;
    }

    std::vector<double> sorted(pooled);
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double mean = dna * dnb / 2;
    const double var = dna * dnb / 12 * ((dn + 1) - tie_term / (dn * (dn - 1)));
    if (var <= 0) {
        r.p = 1.0;
        return r;
    }
    const double z = std::max(0.0, std::fabs(r.u - mean) - 0.5) / std::sqrt(var);
    r.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return r;
}

double cliffs_delta(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyGroup, "cliff's delta needs two non-empty samples");
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sb.begin(), sb.end());
    double more = 0, less = 0;
    for (double x : a) {
        more += static_cast<double>(std::lower_bound(sb.begin(), sb.end(), x) - sb.begin());
        less += static_cast<double>(sb.end() - std::upper_bound(sb.begin(), sb.end(), x));
    }
    return (more - less) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

double median(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptyGroup, "median of nothing");
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    return values.size() % 2 ? values[m] : (values[m - 1] + values[m]) / 2;
}

namespace {

struct Ranked {
    std::string name;
    const std::vector<double>* values;
    double median;
};

std::vector<double> pool(const std::vector<Ranked>& t, std::size_t lo, std::size_t hi) {
    std::vector<double> out;
    for (std::size_t i = lo; i < hi; ++i) out.insert(out.end(), t[i].values->begin(), t[i].values->end());
    return out;
}

void split_segment(const std::vector<Ranked>& t, std::size_t lo, std::size_t hi,
                   std::vector<std::pair<std::size_t, std::size_t>>& segments) {
    if (hi - lo < 2) {
        segments.emplace_back(lo, hi);
        return;
    }
    double mean = 0;
    for (std::size_t i = lo; i < hi; ++i) mean += t[i].median;
    mean /= static_cast<double>(hi - lo);

    std::size_t best_cut = lo + 1;
    double best_ss = -1;
    for (std::size_t cut = lo + 1; cut < hi; ++cut) {
        double ml = 0, mr = 0;
        for (std::size_t i = lo; i < cut; ++i) ml += t[i].median;
        for (std::size_t i = cut; i < hi; ++i) mr += t[i].median;
        const double nl = static_cast<double>(cut - lo), nr = static_cast<double>(hi - cut);
        ml /= nl;
        mr /= nr;
        const double ss = nl * (ml - mean) * (ml - mean) + nr * (mr - mean) * (mr - mean);
        if (ss > best_ss) {
            best_ss = ss;
            best_cut = cut;
        }
    }
    const auto left = pool(t, lo, best_cut), right = pool(t, best_cut, hi);
    const bool distinct = wilcoxon_rank_sum(left, right).p < kAlpha &&
                          std::fabs(cliffs_delta(left, right)) >= kNegligibleDelta;
    if (!distinct) {
        segments.emplace_back(lo, hi);
        return;
    }
    split_segment(t, lo, best_cut, segments);
    split_segment(t, best_cut, hi, segments);
}

}  // namespace

RankGroups npsk_rank(const Treatments& treatments) {
    if (treatments.empty()) throw Error(ErrorCode::InvalidConfig, "no treatments to rank");
    std::vector<Ranked> t;
    std::set<std::string> names;
    for (const auto& [name, values] : treatments) {
        if (values.empty()) throw Error(ErrorCode::InvalidConfig, "treatment " + name + " has no values");
        if (!names.insert(name).second) throw Error(ErrorCode::InvalidConfig, "duplicate treatment " + name);
        t.push_back({name, &values, median(values)});
    }
    std::sort(t.begin(), t.end(), [](const Ranked& x, const Ranked& y) {
        if (x.median != y.median) return x.median > y.median;
        return x.name < y.name;
    });
    std::vector<std::pair<std::size_t, std::size_t>> segments;
    split_segment(t, 0, t.size(), segments);

    RankGroups groups;
    for (const auto& [lo, hi] : segments) {
        RankGroup g;
        g.rank = static_cast<int>(groups.size()) + 1;
        for (std::size_t i = lo; i < hi; ++i) g.treatments.push_back(t[i].name);
        groups.push_back(std::move(g));
    }
    return groups;
}

ordered_json to_json(const RankGroups& groups) {
    ordered_json out = ordered_json::array();
    for (const auto& g : groups) out.push_back({{"rank", g.rank}, {"treatments", g.treatments}});
    return out;
}

std::vector<EvalRow> score_matrix(const std::string& project, const std::vector<learners::MatrixCell>& cells,
                                  const dataprep::Dataset& test, bool parallel) {
    if (test.size() == 0) throw Error(ErrorCode::TooFewRows, "empty test split");
    std::vector<const learners::MatrixCell*> trained;
    for (const auto& c : cells) {
        if (c.model) trained.push_back(&c);
    }
    std::vector<EvalRow> rows(trained.size());
    std::vector<std::string> errors(trained.size());
    const auto n = static_cast<std::ptrdiff_t>(trained.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& cell = *trained[static_cast<std::size_t>(i)];
        auto& row = rows[static_cast<std::size_t>(i)];
        row.project = project;
        row.kind = cell.kind;
        row.combo = cell.combo;
        try {
            const auto probs = learners::predict_proba(*cell.model, test);
            row.score = score(probs, test.labels);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw Error(ErrorCode::InvalidConfig, "scoring failed: " + e);
    }
    return rows;
}

std::string evaluation_csv(const std::vector<EvalRow>& rows) {
    std::string out = "project,kind,combo,auc,mcc,tp,fp,tn,fn\n";
    for (const auto& r : rows) {
        out += r.project + ',' + std::string(learners::to_string(r.kind)) + ',' +
               std::string(learners::to_string(r.combo)) + ',' +
               (r.score.auc ? io::format_double(*r.score.auc) : std::string()) + ',' + io::format_double(r.score.mcc) +
               ',' + std::to_string(r.score.confusion.tp) + ',' + std::to_string(r.score.confusion.fp) + ',' +
               std::to_string(r.score.confusion.tn) + ',' + std::to_string(r.score.confusion.fn) + '\n';
    }
    return out;
}

void write_evaluation_csv(const std::filesystem::path& path, const std::vector<EvalRow>& rows) {
    io::write_text(path, evaluation_csv(rows));
}

std::vector<EvalRow> read_evaluation_csv(const std::filesystem::path& path) {
    const auto lines = io::split_lines(io::read_text(path));
    if (lines.empty() || lines[0] != "project,kind,combo,auc,mcc,tp,fp,tn,fn") {
        throw Error(ErrorCode::Io, "unexpected evaluation header in " + path.string());
    }
    std::vector<EvalRow> rows;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(lines[li]);
        for (std::string cell; std::getline(ss, cell, ',');) cols.push_back(cell);
        if (cols.size() != 9) throw Error(ErrorCode::Io, "bad evaluation row in " + path.string());
        EvalRow r;
        r.project = cols[0];
        r.kind = learners::learner_kind_from_string(cols[1]);
        r.combo = learners::feature_combo_from_string(cols[2]);
        if (!cols[3].empty()) r.score.auc = std::stod(cols[3]);
        r.score.mcc = std::stod(cols[4]);
        r.score.confusion = {std::stoul(cols[5]), std::stoul(cols[6]), std::stoul(cols[7]), std::stoul(cols[8])};
        rows.push_back(std::move(r));
    }
    return rows;
}

Pooling pooling_from_string(std::string_view s) {
    if (s == "models") return Pooling::Models;
    if (s == "medians") return Pooling::Medians;
    throw Error(ErrorCode::InvalidConfig, "unknown pooling " + std::string(s));
}

Treatments treatments_for(const std::vector<EvalRow>& rows, Dimension dim, Metric metric, Pooling pooling) {
    // treatment -> project -> values
    std::map<std::string, std::map<std::string, std::vector<double>>> grouped;
    for (const auto& r : rows) {
        std::optional<double> v = metric == Metric::Auc ? r.score.auc : std::optional<double>(r.score.mcc);
        if (!v) continue;
        std::string name(dim == Dimension::ByCombo ? learners::to_string(r.combo) : learners::to_string(r.kind));
        grouped[name][r.project].push_back(*v);
    }
    Treatments out;
    auto emit = [&](const std::string& name) {
        auto it = grouped.find(name);
        if (it == grouped.end()) return;
        std::vector<double> values;
        for (const auto& [project, vs] : it->second) {
            if (pooling == Pooling::Medians) values.push_back(median(vs));
            else values.insert(values.end(), vs.begin(), vs.end());
        }
        out.emplace_back(name, std::move(values));
    };
    if (dim == Dimension::ByCombo) {
        for (auto c : learners::kAllCombos) emit(std::string(learners::to_string(c)));
    } else {
        for (auto k : learners::kAllKinds) emit(std::string(learners::to_string(k)));
    }
    return out;
}

ordered_json rank_tables(const std::vector<EvalRow>& rows, Pooling pooling) {
    ordered_json out;
    for (auto [dim, dim_name] : {std::pair{Dimension::ByCombo, "by_combo"}, std::pair{Dimension::ByLearner, "by_learner"}}) {
        ordered_json per_metric;
        for (auto [metric, metric_name] : {std::pair{Metric::Auc, "auc"}, std::pair{Metric::Mcc, "mcc"}}) {
            const auto treatments = treatments_for(rows, dim, metric, pooling);
            // e.g. every test split held a single class, so no AUC exists
            per_metric[metric_name] = treatments.empty() ? ordered_json::array() : to_json(npsk_rank(treatments));
        }
        out[dim_name] = std::move(per_metric);
    }
    return out;
}

}  // namespace jitvc::evaluation

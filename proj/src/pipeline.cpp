#include "jitvc/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <set>

#include "jitvc/error.hpp"
#include "jitvc/io.hpp"

namespace jitvc::pipeline {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

void RunConfig::validate() const {
    auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (!(train_fraction > 0 && train_fraction < 1)) bad("train fraction must lie in (0, 1)");
    if (!(autospearman.correlation_threshold > 0 && autospearman.correlation_threshold <= 1)) {
        bad("correlation threshold must lie in (0, 1]");
    }
    if (!(autospearman.vif_threshold > 0)) bad("VIF threshold must be positive");
    if (smote.k == 0) bad("SMOTE k must be positive");
    if (branch.empty()) bad("branch is empty");
    if (fix.strategy == labeling::FixStrategy::Keywords && fix.keywords.empty()) bad("keyword list is empty");
    if (miner.classifier.textual_extensions.empty()) bad("textual extension list is empty");
}

std::string project_name(const fs::path& repo) {
    auto p = repo.lexically_normal();
    if (p.filename().empty()) p = p.parent_path();
    auto name = p.filename().string();
    if (name.empty() || name == "." || name == "..") name = fs::absolute(repo).lexically_normal().filename().string();
    return name.empty() ? "project" : name;
}

ProjectPaths::ProjectPaths(const fs::path& out, const std::string& project)
    : dir(out / project), models(out / "models" / project) {}

// --- file types ------------------------------------------------------------------------------

std::size_t ComboTable::total() const {
    std::size_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

double ComboTable::percentage(std::size_t i) const {
    const auto t = total();
    return t == 0 ? 0.0 : 100.0 * static_cast<double>(counts[i]) / static_cast<double>(t);
}

ordered_json ComboTable::to_json() const {
    ordered_json c, p;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const std::string name(mining::to_string(mining::file_type_combo_at(i)));
        c[name] = counts[i];
        p[name] = percentage(i);
    }
    return {{"total", total()}, {"counts", c}, {"percentages", p}};
}

std::string_view to_string(Majority m) noexcept { return m == Majority::MoreVisual ? "more-visual" : "more-textual"; }

Majority majority_from_string(std::string_view s) {
    if (s == "more-visual") return Majority::MoreVisual;
    if (s == "more-textual") return Majority::MoreTextual;
    throw Error(ErrorCode::InvalidConfig, "unknown majority tag " + std::string(s));
}

namespace {

Majority majority_of(std::size_t visual, std::size_t textual) {
    return visual > textual ? Majority::MoreVisual : Majority::MoreTextual;
}

}  // namespace

FileTypeReport file_type_report(const mining::History& history, const std::set<std::string>& fix_commits) {
    FileTypeReport r;
    for (const auto& c : history) {
        const auto idx = static_cast<std::size_t>(mining::commit_file_combo(c));
        ++r.all.counts[idx];
        if (fix_commits.contains(c.hash)) ++r.fix.counts[idx];
        bool visual = false, textual = false;
        for (const auto& ch : c.changes) {
            visual |= ch.file_class == mining::FileClass::VisualCode;
            textual |= ch.file_class == mining::FileClass::TextualCode;
        }
        r.visual_commits += visual ? 1 : 0;
        r.textual_commits += textual ? 1 : 0;
    }
    r.majority = majority_of(r.visual_commits, r.textual_commits);
    return r;
}

FileTypeReport aggregate(const std::vector<FileTypeReport>& reports) {
    FileTypeReport r;
    for (const auto& p : reports) {
        for (std::size_t i = 0; i < mining::kFileTypeComboCount; ++i) {
            r.all.counts[i] += p.all.counts[i];
            r.fix.counts[i] += p.fix.counts[i];
        }
        r.visual_commits += p.visual_commits;
        r.textual_commits += p.textual_commits;
    }
    r.majority = majority_of(r.visual_commits, r.textual_commits);
    return r;
}

namespace {

ordered_json file_types_json(const FileTypeReport& r) {
    return {{"all", r.all.to_json()},
            {"fix", r.fix.to_json()},
            {"visual_commits", r.visual_commits},
            {"textual_commits", r.textual_commits},
            {"majority", to_string(r.majority)}};
}

void write_json(const fs::path& path, const ordered_json& j) { io::write_text(path, j.dump(2) + "\n"); }

}  // namespace

// --- stages ---------------------------------------------------------------------------------

mining::History stage_mine(const mining::Repository& repo, const RunConfig& config, const ProjectPaths& paths) {
    auto miner = config.miner;
    miner.parallel = config.parallel;
    auto history = mining::walk_history(repo, config.branch, miner);
    mining::write_commits_jsonl(paths.commits(), history);
    return history;
}

labeling::LabelSet stage_label(const mining::Repository& repo, const mining::History& history,
                               const RunConfig& config, const ProjectPaths& paths) {
    auto fixes = labeling::identify_fix_commits(history, config.fix);
    auto szz = config.szz;
    szz.parallel = config.parallel;
    auto labels = labeling::label_commits(repo, history, fixes, szz);
    labeling::write_labels_jsonl(paths.labels(), history, labels);
    return labels;
}

std::vector<metrics::FeatureVector> stage_features(const mining::History& history, const labeling::LabelSet& labels,
                                                   const RunConfig& config, const ProjectPaths& paths) {
    auto features = config.parallel ? metrics::extract_features_parallel(history, labels)
                                    : metrics::extract_features_serial(history, labels);
    metrics::write_features_csv(paths.features(), features);
    return features;
}

Prepared stage_prepare(const std::vector<metrics::FeatureVector>& features, const RunConfig& config,
                       const ProjectPaths& paths) {
    Prepared p;
    p.split = dataprep::time_split(dataprep::from_features(features), config.train_fraction);
    p.selection = dataprep::autospearman(p.split.train, config.autospearman);
    if (p.selection.kept.empty()) throw Error(ErrorCode::EmptyFeatureSet, "feature selection kept nothing");
    p.balanced = dataprep::smote(p.split.train.select(p.selection.kept), config.smote).data;
    write_json(paths.selection(), dataprep::to_json(p.selection));
    dataprep::write_dataset_csv(paths.train_balanced(), p.balanced);
    dataprep::write_dataset_csv(paths.test(), p.split.test);
    return p;
}

std::vector<learners::MatrixCell> stage_train(const dataprep::Dataset& balanced,
                                              const dataprep::FeatureSelection& selection, const RunConfig& config,
                                              const ProjectPaths& paths) {
    auto cells = learners::train_matrix(balanced, selection.kept, config.seed, config.parallel);
    for (const auto& cell : cells) {
        const auto file = paths.models / learners::model_file_name(cell.kind, cell.combo);
        if (cell.model) {
            learners::save_model(file, *cell.model);
        } else {
            std::error_code ec;
            fs::remove(file, ec);
        }
    }
    return cells;
}

std::vector<evaluation::EvalRow> stage_evaluate(const std::string& project,
                                                const std::vector<learners::MatrixCell>& cells,
                                                const dataprep::Dataset& test, const RunConfig& config,
                                                const ProjectPaths& paths) {
    auto rows = evaluation::score_matrix(project, cells, test, config.parallel);
    evaluation::write_evaluation_csv(paths.evaluation(), rows);
    return rows;
}

ordered_json stage_rank(const std::vector<evaluation::EvalRow>& rows, const RunConfig& config,
                        const ProjectPaths& paths) {
    auto ranks = evaluation::rank_tables(rows, config.pooling);
    write_json(paths.ranks(), ranks);
    return ranks;
}

std::vector<metrics::FeatureVector> load_features_with_timestamps(const ProjectPaths& paths) {
    auto features = metrics::read_features_csv(paths.features());
    std::map<std::string, std::int64_t> ts;
    for (const auto& c : mining::read_commits_jsonl(paths.commits())) ts[c.hash] = c.timestamp;
    for (auto& f : features) {
        auto it = ts.find(f.commit_hash);
        if (it == ts.end()) throw Error(ErrorCode::Io, "feature row " + f.commit_hash + " has no commit record");
        f.timestamp = it->second;
    }
    return features;
}

std::vector<learners::MatrixCell> load_models(const ProjectPaths& paths) {
    std::vector<learners::MatrixCell> cells;
    for (auto kind : learners::kAllKinds) {
        for (auto combo : learners::kAllCombos) {
            learners::MatrixCell cell{kind, combo, std::nullopt, {}};
            const auto file = paths.models / learners::model_file_name(kind, combo);
            if (fs::exists(file)) cell.model = learners::load_model(file);
            else cell.error = "no model file";
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

// --- reports -----------------------------------------------------------------------------------

namespace {

ordered_json eval_row_json(const evaluation::EvalRow& r) {
    return {{"kind", learners::to_string(r.kind)},
            {"combo", learners::to_string(r.combo)},
            {"auc", r.score.auc ? ordered_json(*r.score.auc) : ordered_json(nullptr)},
            {"mcc", r.score.mcc},
            {"tp", r.score.confusion.tp},
            {"fp", r.score.confusion.fp},
            {"tn", r.score.confusion.tn},
            {"fn", r.score.confusion.fn}};
}

}  // namespace

ordered_json to_json(const ProjectReport& r) {
    ordered_json j;
    j["project"] = r.project;
    j["status"] = r.status == ProjectReport::Status::Complete ? "complete" : "ineligible";
    j["eligibility"] = mining::to_json(r.eligibility);
    j["file_types"] = file_types_json(r.file_types);
    if (r.label_facts) {
        j["labels"] = {{"fix_commits", r.label_facts->fix_commits},
                       {"inducing_commits", r.inducing_commits},
                       {"textual_inducing", r.label_facts->textual_inducing},
                       {"visual_inducing", r.label_facts->visual_inducing},
                       {"skipped_visual_files", r.skipped_visual_files}};
    } else {
        j["labels"] = nullptr;
    }
    j["dataset"] = {{"feature_rows", r.feature_rows},
                    {"train_rows", r.train_rows},
                    {"test_rows", r.test_rows},
                    {"train_balanced_rows", r.balanced_rows},
                    {"kept_features", r.kept_features}};
    ordered_json failed = ordered_json::array();
    for (const auto& [cell, error] : r.failed_cells) failed.push_back({{"model", cell}, {"error", error}});
    j["models"] = {{"trained", r.evaluation.size()}, {"failed", failed}};
    ordered_json eval = ordered_json::array();
    for (const auto& row : r.evaluation) eval.push_back(eval_row_json(row));
    j["evaluation"] = eval;
    j["ranks"] = r.ranks.is_null() ? ordered_json::object() : r.ranks;
    return j;
}

ProjectReport report_from_json(const json& j) {
    try {
        ProjectReport r;
        r.project = j.at("project").get<std::string>();
        r.status = j.at("status").get<std::string>() == "complete" ? ProjectReport::Status::Complete
                                                                    : ProjectReport::Status::Ineligible;
        const auto& ft = j.at("file_types");
        for (auto [key, table] : {std::pair{"all", &r.file_types.all}, std::pair{"fix", &r.file_types.fix}}) {
            const auto& counts = ft.at(key).at("counts");
            for (std::size_t i = 0; i < mining::kFileTypeComboCount; ++i) {
                table->counts[i] = counts.at(std::string(mining::to_string(mining::file_type_combo_at(i))))
                                       .get<std::size_t>();
            }
        }
        r.file_types.visual_commits = ft.at("visual_commits").get<std::size_t>();
        r.file_types.textual_commits = ft.at("textual_commits").get<std::size_t>();
        r.file_types.majority = majority_from_string(ft.at("majority").get<std::string>());
        for (const auto& e : j.at("evaluation")) {
            evaluation::EvalRow row;
            row.project = r.project;
            row.kind = learners::learner_kind_from_string(e.at("kind").get<std::string>());
            row.combo = learners::feature_combo_from_string(e.at("combo").get<std::string>());
            if (!e.at("auc").is_null()) row.score.auc = e.at("auc").get<double>();
            row.score.mcc = e.at("mcc").get<double>();
            row.score.confusion = {e.at("tp").get<std::size_t>(), e.at("fp").get<std::size_t>(),
                                   e.at("tn").get<std::size_t>(), e.at("fn").get<std::size_t>()};
            r.evaluation.push_back(std::move(row));
        }
        r.ranks = j.at("ranks");
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Io, std::string("bad report: ") + e.what());
    }
}

GroupComparison group_compare(const std::vector<ProjectReport>& reports, evaluation::Metric metric,
                              evaluation::Pooling pooling) {
    GroupComparison g;
    std::vector<double> visual, textual;
    for (const auto& r : reports) {
        std::vector<double> values;
        for (const auto& row : r.evaluation) {
            if (metric == evaluation::Metric::Auc) {
                if (row.score.auc) values.push_back(*row.score.auc);
            } else {
                values.push_back(row.score.mcc);
            }
        }
        if (values.empty()) continue;
        if (pooling == evaluation::Pooling::Medians) values = {evaluation::median(values)};
        const bool is_visual = r.file_types.majority == Majority::MoreVisual;
        auto& target = is_visual ? visual : textual;
        target.insert(target.end(), values.begin(), values.end());
        ++(is_visual ? g.visual_projects : g.textual_projects);
    }
    if (visual.empty() || textual.empty()) {
        throw Error(ErrorCode::EmptyGroup, std::string(visual.empty() ? "more-visual" : "more-textual") +
                                               " group has no scored projects");
    }
    g.visual_values = visual.size();
    g.textual_values = textual.size();
    g.test = evaluation::wilcoxon_rank_sum(visual, textual);
    g.reject = g.test.p < evaluation::kAlpha;
    return g;
}

// --- orchestration -------------------------------------------------------------------------------

namespace {

ProjectReport run_project_tracked(const fs::path& repo_path, const RunConfig& config, std::string& stage) {
    ProjectReport report;
    report.project = project_name(repo_path);
    const ProjectPaths paths(config.out, report.project);

    stage = "mine";
    auto repo = mining::open_git_repository(repo_path);
    auto history = stage_mine(*repo, config, paths);
    report.eligibility = mining::check_eligibility(history);
    report.file_types = file_type_report(history, {});

    auto finish = [&](ProjectReport::Status status) {
        stage = "report";
        report.status = status;
        write_json(paths.report(), to_json(report));
        return report;
    };
    if (config.enforce_eligibility && !report.eligibility.history_eligible()) {
        return finish(ProjectReport::Status::Ineligible);
    }

    stage = "label";
    auto labels = stage_label(*repo, history, config, paths);
    report.label_facts = labels.facts();
    report.inducing_commits = labels.inducing_commits.size();
    report.skipped_visual_files = labels.skipped.size();
    report.eligibility = mining::check_eligibility(history, report.label_facts);
    report.file_types = file_type_report(history, labels.fix_commits);
    if (config.enforce_eligibility && !report.eligibility.eligible()) {
        return finish(ProjectReport::Status::Ineligible);
    }

    stage = "features";
    auto features = stage_features(history, labels, config, paths);
    report.feature_rows = features.size();

    stage = "prepare";
    auto prepared = stage_prepare(features, config, paths);
    report.train_rows = prepared.split.train.size();
    report.test_rows = prepared.split.test.size();
    report.balanced_rows = prepared.balanced.size();
    report.kept_features = prepared.selection.kept;

    stage = "train";
    auto cells = stage_train(prepared.balanced, prepared.selection, config, paths);
    for (const auto& c : cells) {
        if (!c.model) {
            auto stem = learners::model_file_name(c.kind, c.combo);
            report.failed_cells.emplace_back(stem.substr(0, stem.size() - 5), c.error);
        }
    }

    stage = "evaluate";
    report.evaluation = stage_evaluate(report.project, cells, prepared.split.test, config, paths);

    stage = "rank";
    report.ranks = stage_rank(report.evaluation, config, paths);
    return finish(ProjectReport::Status::Complete);
}

std::string code_of(const std::exception& e) {
    if (auto* err = dynamic_cast<const Error*>(&e)) return std::string(to_string(err->code()));
    return "Internal";
}

}  // namespace

ProjectReport report_from_artifacts(const std::string& project, const RunConfig& config) {
    const ProjectPaths paths(config.out, project);
    ProjectReport report;
    report.project = project;
    const auto history = mining::read_commits_jsonl(paths.commits());
    report.eligibility = mining::check_eligibility(history);
    report.file_types = file_type_report(history, {});
    report.status = ProjectReport::Status::Ineligible;

    if (fs::exists(paths.labels())) {
        const auto labels = labeling::read_labels_jsonl(paths.labels());
        report.label_facts = labels.facts();
        report.inducing_commits = labels.inducing_commits.size();
        // Untraceable visual files are not persisted; SZZ-VC is pure, so
        // recount them.
        for (const auto& fix : labels.fix_commits) {
            std::vector<std::string> skipped;
            labeling::szz_vc(history, fix, config.szz.depth, &skipped);
            report.skipped_visual_files += skipped.size();
        }
        report.eligibility = mining::check_eligibility(history, report.label_facts);
        report.file_types = file_type_report(history, labels.fix_commits);
    }
    if (fs::exists(paths.features())) report.feature_rows = metrics::read_features_csv(paths.features()).size();
    if (fs::exists(paths.test())) {
        report.test_rows = dataprep::read_dataset_csv(paths.test()).size();
        report.train_rows = report.feature_rows - report.test_rows;
    }
    if (fs::exists(paths.train_balanced())) {
        report.balanced_rows = dataprep::read_dataset_csv(paths.train_balanced()).size();
    }
    if (fs::exists(paths.selection())) {
        auto j = json::parse(io::read_text(paths.selection()), nullptr, false);
        if (j.is_discarded()) throw Error(ErrorCode::Io, "malformed " + paths.selection().string());
        report.kept_features = dataprep::selection_from_json(j).kept;
    }
    if (fs::exists(paths.evaluation())) {
        for (const auto& c : load_models(paths)) {
            if (!c.model) {
                auto stem = learners::model_file_name(c.kind, c.combo);
                report.failed_cells.emplace_back(stem.substr(0, stem.size() - 5), c.error);
            }
        }
        report.evaluation = evaluation::read_evaluation_csv(paths.evaluation());
        report.ranks = evaluation::rank_tables(report.evaluation, config.pooling);
        report.status = ProjectReport::Status::Complete;
    }
    write_json(paths.report(), to_json(report));
    return report;
}

ProjectReport run_project(const fs::path& repo, const RunConfig& config) {
    std::string stage;
    return run_project_tracked(repo, config, stage);
}

void write_summary(const RunConfig& config, const std::vector<ProjectReport>& reports,
                   const std::vector<ProjectFailure>& failures) {
    ordered_json projects = ordered_json::array();
    std::vector<FileTypeReport> types;
    std::vector<evaluation::EvalRow> rows;
    for (const auto& r : reports) {
        projects.push_back({{"project", r.project},
                            {"status", r.status == ProjectReport::Status::Complete ? "complete" : "ineligible"},
                            {"majority", to_string(r.file_types.majority)}});
        types.push_back(r.file_types);
        rows.insert(rows.end(), r.evaluation.begin(), r.evaluation.end());
    }
    ordered_json failed = ordered_json::array();
    std::string errors;
    for (const auto& f : failures) {
        ordered_json e = {{"project", f.project}, {"stage", f.stage}, {"code", f.code}, {"message", f.message}};
        errors += e.dump() + "\n";
        failed.push_back(std::move(e));
    }

    const auto ranks = evaluation::rank_tables(rows, config.pooling);
    ordered_json compare;
    for (auto [metric, name] : {std::pair{evaluation::Metric::Auc, "auc"}, std::pair{evaluation::Metric::Mcc, "mcc"}}) {
        try {
            auto g = group_compare(reports, metric, config.pooling);
            compare[name] = {{"more_visual_projects", g.visual_projects},
                             {"more_textual_projects", g.textual_projects},
                             {"more_visual_values", g.visual_values},
                             {"more_textual_values", g.textual_values},
                             {"u", g.test.u},
                             {"p", g.test.p},
                             {"exact", g.test.exact},
                             {"reject", g.reject}};
        } catch (const Error& e) {
            compare[name] = {{"error", e.what()}};
        }
    }

    ordered_json summary;
    summary["projects"] = projects;
    summary["failures"] = failed;
    summary["file_types"] = file_types_json(aggregate(types));
    summary["pooling"] = config.pooling == evaluation::Pooling::Models ? "models" : "medians";
    summary["ranks"] = ranks;
    summary["group_compare"] = compare;
    write_json(config.out / "summary.json", summary);
    write_json(config.out / "ranks.json", ranks);

    const auto error_log = config.out / "errors.jsonl";
    if (failures.empty()) {
        std::error_code ec;
        fs::remove(error_log, ec);
    } else {
        io::write_text(error_log, errors);
    }
}

RunResult run_pipeline(const RunConfig& config) {
    config.validate();
    if (config.repos.empty()) throw Error(ErrorCode::InvalidConfig, "no repositories given");
    std::set<std::string> names;
    for (const auto& r : config.repos) {
        if (!names.insert(project_name(r)).second) {
            throw Error(ErrorCode::InvalidConfig, "two repositories share the project name " + project_name(r));
        }
    }

    const auto n = static_cast<std::ptrdiff_t>(config.repos.size());
    std::vector<std::optional<ProjectReport>> reports(config.repos.size());
    std::vector<std::optional<ProjectFailure>> failures(config.repos.size());
#pragma omp parallel for schedule(dynamic) if (config.parallel && n > 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& repo = config.repos[static_cast<std::size_t>(i)];
        std::string stage = "mine";
        try {
            reports[static_cast<std::size_t>(i)] = run_project_tracked(repo, config, stage);
        } catch (const std::exception& e) {
            failures[static_cast<std::size_t>(i)] = ProjectFailure{project_name(repo), stage, code_of(e), e.what()};
        }
    }

    RunResult result;
    for (auto& r : reports) {
        if (r) result.reports.push_back(std::move(*r));
    }
    for (auto& f : failures) {
        if (f) result.failures.push_back(std::move(*f));
    }
    auto by_name = [](const auto& a, const auto& b) { return a.project < b.project; };
    std::sort(result.reports.begin(), result.reports.end(), by_name);
    std::sort(result.failures.begin(), result.failures.end(), by_name);
    write_summary(config, result.reports, result.failures);
    return result;
}

}  // namespace jitvc::pipeline

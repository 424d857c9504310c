// jitvc: command-line front end for the defect-prediction pipeline.

#include <cstdlib>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jitvc/error.hpp"
#include "jitvc/io.hpp"
#include "jitvc/pipeline.hpp"

namespace {

using namespace jitvc;
using pipeline::ProjectPaths;
using pipeline::RunConfig;
namespace fs = std::filesystem;

// Raw flag values; folded into a RunConfig once parsing is done.
struct Flags {
    std::vector<std::string> repos;
    std::vector<std::string> projects;
    std::string branch = "HEAD";
    std::string out = "out";
    std::vector<std::string> textual_ext;
    bool count_position_changes = false;
    std::string strategy = "keywords";
    std::vector<std::string> keywords;
    std::string issues;
    std::string issue_pattern;
    std::string depth = "max";
    double train_fraction = 0.8;
    double corr_threshold = 0.7;
    double vif_threshold = 5.0;
    bool no_category_floor = false;
    std::size_t smote_k = 5;
    std::uint64_t smote_seed = 42;
    std::uint64_t seed = 1;
    std::string pool = "models";
    bool no_eligibility_gate = false;
    bool serial = false;
};

RunConfig to_config(const Flags& f) {
    RunConfig c;
    for (const auto& r : f.repos) c.repos.emplace_back(r);
    c.branch = f.branch;
    c.out = f.out;
    if (!f.textual_ext.empty()) c.miner.classifier.textual_extensions = f.textual_ext;
    c.miner.diff.count_position_changes = f.count_position_changes;
    c.fix.strategy = labeling::fix_strategy_from_string(f.strategy);
    if (!f.keywords.empty()) c.fix.keywords = f.keywords;
    if (!f.issue_pattern.empty()) c.fix.issue_pattern = f.issue_pattern;
    if (!f.issues.empty()) c.fix.issues = labeling::read_issues_csv(f.issues);
    if (c.fix.strategy == labeling::FixStrategy::IssueLinks && f.issues.empty()) {
        throw Error(ErrorCode::InvalidConfig, "--strategy issue-links needs --issues");
    }
    c.szz.depth = labeling::change_depth_from_string(f.depth);
    c.train_fraction = f.train_fraction;
    c.autospearman.correlation_threshold = f.corr_threshold;
    c.autospearman.vif_threshold = f.vif_threshold;
    c.autospearman.category_floor = !f.no_category_floor;
    c.smote.k = f.smote_k;
    c.smote.seed = f.smote_seed;
    c.seed = f.seed;
    c.pooling = evaluation::pooling_from_string(f.pool);
    c.enforce_eligibility = !f.no_eligibility_gate;
    c.parallel = !f.serial;
    c.validate();
    return c;
}

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--out,-o", f.out, "Output directory")->capture_default_str();
    cmd->add_flag("--serial", f.serial, "Disable OpenMP parallelism");
}

void add_repo(CLI::App* cmd, Flags& f, bool many) {
    auto* opt = cmd->add_option("--repo,-r", f.repos, "Git repository path")->required();
    if (!many) opt->expected(1);
    cmd->add_option("--branch,-b", f.branch, "Branch or revision to walk")->capture_default_str();
}

void add_project(CLI::App* cmd, Flags& f) {
    cmd->add_option("--project,-p", f.projects, "Project name (directory under --out)")->required();
}

void add_mining(CLI::App* cmd, Flags& f) {
    cmd->add_option("--textual-ext", f.textual_ext, "Textual code extensions (replaces the default list)");
    cmd->add_flag("--count-position-changes", f.count_position_changes, "Treat node moves as modifications");
}

void add_labeling(CLI::App* cmd, Flags& f) {
    cmd->add_option("--strategy", f.strategy, "Fix identification: keywords | issue-links")->capture_default_str();
    cmd->add_option("--keywords", f.keywords, "Defect keywords (replaces the default list)");
    cmd->add_option("--issues", f.issues, "Issue CSV: key,is_defect,fix_commit");
    cmd->add_option("--issue-pattern", f.issue_pattern, "Regex for issue keys in commit messages");
    cmd->add_option("--depth", f.depth, "SZZ-VC change depth: max | most-recent")->capture_default_str();
}

void add_prepare(CLI::App* cmd, Flags& f) {
    cmd->add_option("--train-fraction", f.train_fraction, "Chronological training share")->capture_default_str();
    cmd->add_option("--corr-threshold", f.corr_threshold, "AutoSpearman |rho| threshold")->capture_default_str();
    cmd->add_option("--vif-threshold", f.vif_threshold, "AutoSpearman VIF threshold")->capture_default_str();
    cmd->add_flag("--no-category-floor", f.no_category_floor, "Allow a metric category to lose every feature");
    cmd->add_option("--smote-k", f.smote_k, "SMOTE neighbours")->capture_default_str();
    cmd->add_option("--smote-seed", f.smote_seed, "SMOTE seed")->capture_default_str();
}

void add_train(CLI::App* cmd, Flags& f) {
    cmd->add_option("--seed", f.seed, "Learner seed")->capture_default_str();
}

void add_rank(CLI::App* cmd, Flags& f) {
    cmd->add_option("--pool", f.pool, "Cross-project pooling: models | medians")->capture_default_str();
}

void print_error(const std::string& code, const std::string& message) {
    nlohmann::ordered_json j = {{"code", code}, {"message", message}};
    std::cerr << j.dump() << '\n';
}

std::string single_project(const Flags& f) {
    if (!f.projects.empty()) return f.projects.front();
    return pipeline::project_name(f.repos.front());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Just-in-time defect prediction for mixed textual and visual code repositories"};
    app.require_subcommand(1);
    Flags f;

    auto* mine = app.add_subcommand("mine", "Walk first-parent history into commits.jsonl");
    add_repo(mine, f, false);
    add_mining(mine, f);
    add_common(mine, f);

    auto* label = app.add_subcommand("label", "Identify fixes and run SZZ into labels.jsonl");
    add_repo(label, f, false);
    add_labeling(label, f);
    add_common(label, f);

    auto* features = app.add_subcommand("features", "Compute features.csv from commits and labels");
    add_project(features, f);
    add_common(features, f);

    auto* prepare = app.add_subcommand("prepare", "Split, select features and balance the training data");
    add_project(prepare, f);
    add_prepare(prepare, f);
    add_common(prepare, f);

    auto* train = app.add_subcommand("train", "Train the 6 x 4 model matrix");
    add_project(train, f);
    add_train(train, f);
    add_common(train, f);

    auto* evaluate = app.add_subcommand("evaluate", "Score every model on the test split");
    add_project(evaluate, f);
    add_common(evaluate, f);

    auto* rank = app.add_subcommand("rank", "Scott-Knott ranks per project and pooled");
    add_project(rank, f);
    add_rank(rank, f);
    add_common(rank, f);

    auto* report = app.add_subcommand("report", "Rebuild report.json files and the cross-project summary");
    add_project(report, f);
    add_rank(report, f);
    add_labeling(report, f);
    add_common(report, f);

    auto* run = app.add_subcommand("run", "Every stage for one or more repositories");
    add_repo(run, f, true);
    add_mining(run, f);
    add_labeling(run, f);
    add_prepare(run, f);
    add_train(run, f);
    add_rank(run, f);
    run->add_flag("--no-eligibility-gate", f.no_eligibility_gate, "Continue past failed eligibility checks");
    add_common(run, f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help
    } catch (const CLI::ParseError& e) {
        print_error(std::string(to_string(ErrorCode::InvalidConfig)), e.what());
        return 2;
    }

    try {
        const RunConfig config = to_config(f);

        if (*run) {
            auto result = pipeline::run_pipeline(config);
            for (const auto& r : result.reports) {
                std::cout << r.project << ": "
                          << (r.status == pipeline::ProjectReport::Status::Complete ? "complete" : "ineligible")
                          << '\n';
            }
            for (const auto& fail : result.failures) {
                std::cout << fail.project << ": failed at " << fail.stage << " (" << fail.code << ")\n";
                print_error(fail.code, fail.project + ": " + fail.message);
            }
            return result.ok() ? EXIT_SUCCESS : EXIT_FAILURE;
        }

        if (*mine || *label) {
            const ProjectPaths paths(config.out, single_project(f));
            auto repo = mining::open_git_repository(f.repos.front());
            if (*mine) {
                auto history = pipeline::stage_mine(*repo, config, paths);
                std::cout << mining::to_json(mining::check_eligibility(history)).dump(2) << '\n';
            } else {
                auto history = mining::read_commits_jsonl(paths.commits());
                auto labels = pipeline::stage_label(*repo, history, config, paths);
                std::cout << mining::to_json(mining::check_eligibility(history, labels.facts())).dump(2) << '\n';
            }
            return EXIT_SUCCESS;
        }

        if (*rank) {
            std::vector<evaluation::EvalRow> all;
            for (const auto& project : f.projects) {
                const ProjectPaths paths(config.out, project);
                auto rows = evaluation::read_evaluation_csv(paths.evaluation());
                pipeline::stage_rank(rows, config, paths);
                all.insert(all.end(), rows.begin(), rows.end());
            }
            if (f.projects.size() > 1) {
                jitvc::io::write_text(config.out / "ranks.json",
                                      evaluation::rank_tables(all, config.pooling).dump(2) + "\n");
            }
            return EXIT_SUCCESS;
        }

        if (*report) {
            std::vector<pipeline::ProjectReport> reports;
            for (const auto& project : f.projects) reports.push_back(pipeline::report_from_artifacts(project, config));
            pipeline::write_summary(config, reports, {});
            return EXIT_SUCCESS;
        }

        const ProjectPaths paths(config.out, single_project(f));
        if (*features) {
            auto history = mining::read_commits_jsonl(paths.commits());
            auto labels = labeling::read_labels_jsonl(paths.labels());
            pipeline::stage_features(history, labels, config, paths);
        } else if (*prepare) {
            auto prepared = pipeline::stage_prepare(pipeline::load_features_with_timestamps(paths), config, paths);
            std::cout << "kept " << prepared.selection.kept.size() << " features; "
                      << prepared.balanced.size() << " balanced training rows\n";
        } else if (*train) {
            auto balanced = dataprep::read_dataset_csv(paths.train_balanced());
            auto j = nlohmann::json::parse(jitvc::io::read_text(paths.selection()));
            auto cells = pipeline::stage_train(balanced, dataprep::selection_from_json(j), config, paths);
            int failed = 0;
            for (const auto& c : cells) {
                if (!c.model) {
                    ++failed;
                    print_error("ModelFailed", learners::model_file_name(c.kind, c.combo) + ": " + c.error);
                }
            }
            std::cout << (cells.size() - static_cast<std::size_t>(failed)) << " models trained\n";
        } else if (*evaluate) {
            auto test = dataprep::read_dataset_csv(paths.test());
            pipeline::stage_evaluate(single_project(f), pipeline::load_models(paths), test, config, paths);
        }
        return EXIT_SUCCESS;
    } catch (const Error& e) {
        print_error(std::string(to_string(e.code())), e.what());
        return 2;
    } catch (const std::exception& e) {
        print_error("Internal", e.what());
        return 2;
    }
}

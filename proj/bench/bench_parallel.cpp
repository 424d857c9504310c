// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <filesystem>
#include <memory>
#include <random>

#include <unistd.h>

#include "fixture_repo.hpp"
#include "jitvc/dataprep.hpp"
#include "jitvc/evaluation.hpp"
#include "jitvc/labeling.hpp"
#include "jitvc/learners.hpp"
#include "jitvc/metrics.hpp"
#include "jitvc/repo_miner.hpp"

using namespace jitvc;
namespace fs = std::filesystem;

namespace {

// Fixture repository built once and removed at exit.
struct MinedFixture {
    fs::path dir;
    std::unique_ptr<mining::Repository> repo;
    mining::History history;
    labeling::LabelSet labels;

    MinedFixture() {
        dir = fs::temp_directory_path() / ("jitvc-bench-" + std::to_string(::getpid()));
        fs::remove_all(dir);
        auto fx = fixture::build_fixture_repo(dir / "repo", {.total_commits = 400});
        repo = mining::open_git_repository(fx.path);
        history = mining::walk_history(*repo, "HEAD");
        labels = labeling::label_commits(*repo, history, labeling::identify_fix_commits(history, {}));
    }
    ~MinedFixture() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
};

MinedFixture& mined() {
    static MinedFixture m;
    return m;
}

dataprep::Dataset synthetic(std::size_t rows, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise;
    dataprep::Dataset d;
    d.feature_names = metrics::feature_names();
    for (std::size_t i = 0; i < rows; ++i) {
        const int y = i % 2 == 0 ? 1 : 0;
        std::vector<double> row(d.feature_names.size());
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = noise(rng) + (y && j % 4 == 0 ? 1.5 : 0.0);
        d.push_back(std::move(row), y, "c" + std::to_string(i), static_cast<std::int64_t>(i));
    }
    return d;
}

void BM_WalkHistory(benchmark::State& state) {
    auto& m = mined();
    const bool parallel = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(mining::walk_history(*m.repo, "HEAD", {.parallel = parallel}));
}

void BM_LabelCommits(benchmark::State& state) {
    auto& m = mined();
    const auto fixes = labeling::identify_fix_commits(m.history, {});
    const bool parallel = state.range(0) != 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(labeling::label_commits(*m.repo, m.history, fixes, {.parallel = parallel}));
    }
}

void BM_Features(benchmark::State& state) {
    auto& m = mined();
    const bool parallel = state.range(0) != 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(parallel ? metrics::extract_features_parallel(m.history, m.labels)
                                          : metrics::extract_features_serial(m.history, m.labels));
    }
}

void BM_Forest(benchmark::State& state) {
    const auto d = synthetic(static_cast<std::size_t>(state.range(1)), 1);
    const bool parallel = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(learners::fit_forest(d.rows, d.labels, {.parallel = parallel}, 7));
}

void BM_TrainMatrix(benchmark::State& state) {
    const auto d = synthetic(static_cast<std::size_t>(state.range(1)), 2);
    const bool parallel = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(learners::train_matrix(d, d.feature_names, 1, parallel));
}

void BM_ScoreMatrix(benchmark::State& state) {
    const auto train = synthetic(300, 3), test = synthetic(static_cast<std::size_t>(state.range(1)), 4);
    const auto cells = learners::train_matrix(train, train.feature_names, 1);
    const bool parallel = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(evaluation::score_matrix("bench", cells, test, parallel));
}

}  // namespace

// First argument: 0 = serial reference, 1 = OpenMP.
BENCHMARK(BM_WalkHistory)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LabelCommits)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Features)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Forest)->ArgNames({"parallel", "rows"})->ArgsProduct({{0, 1}, {200, 800}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainMatrix)->ArgNames({"parallel", "rows"})->ArgsProduct({{0, 1}, {200}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreMatrix)->ArgNames({"parallel", "rows"})->ArgsProduct({{0, 1}, {2000}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

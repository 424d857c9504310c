// Writes the bundled fixture repository (and optionally its SZZ ground truth).

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fixture_repo.hpp"
#include "jitvc/error.hpp"
#include "jitvc/io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Generate the deterministic fixture repository"};
    std::string dir, truth;
    jitvc::fixture::FixtureOptions options;
    std::size_t filler_only = 0;
    app.add_option("dir", dir, "Target directory (must not exist)")->required();
    app.add_option("--commits", options.total_commits, "Total commits")->capture_default_str();
    app.add_option("--seed", options.seed, "Interleaving seed")->capture_default_str();
    app.add_option("--truth", truth, "Write planted fix/inducing pairs as JSON");
    app.add_option("--filler-only", filler_only, "Build N filler commits and no scenarios");
    CLI11_PARSE(app, argc, argv);

    try {
        if (std::filesystem::exists(dir) && !std::filesystem::is_empty(dir)) {
            throw jitvc::Error(jitvc::ErrorCode::InvalidConfig, dir + " exists and is not empty");
        }
        if (filler_only > 0) {
            auto hashes = jitvc::fixture::build_filler_repo(dir, filler_only, options.seed);
            std::cout << hashes.size() << " commits\n";
            return EXIT_SUCCESS;
        }
        auto fx = jitvc::fixture::build_fixture_repo(dir, options);
        if (!truth.empty()) {
            nlohmann::ordered_json j = nlohmann::ordered_json::array();
            for (const auto& s : fx.scenarios) {
                nlohmann::ordered_json fixes = nlohmann::ordered_json::array();
                for (const auto& f : s.fixes) {
                    fixes.push_back({{"fix", f.fix}, {"inducing", f.inducing}, {"inducing_most_recent", f.inducing_most_recent}});
                }
                j.push_back({{"scenario", s.name}, {"kind", s.kind}, {"fixes", fixes}});
            }
            jitvc::io::write_text(truth, j.dump(2) + "\n");
        }
        std::cout << fx.hashes.size() << " commits, " << fx.scenarios.size() << " scenarios\n";
        return EXIT_SUCCESS;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return EXIT_FAILURE;
    }
}

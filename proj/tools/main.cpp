#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vqc/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Variational quantum circuit training with parameter-shift, SPSA, and "
                 "guided-SPSA gradient estimation"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--seed", seed, "master seed (overrides the config)");
        sub->add_option("--workers", workers, "threads for batch-level parallelism");
    };

    auto* train = app.add_subcommand("train", "run a training experiment");
    auto* toy = app.add_subcommand("toy", "minimize the toy objective");
    auto* gradcheck = app.add_subcommand("gradcheck", "compare gradient estimators on the ansatz");
    auto* count = app.add_subcommand("count", "predict circuit-evaluation counts");
    for (auto* sub : {train, toy, gradcheck, count}) {
        add_common(sub);
    }

    CLI11_PARSE(app, argc, argv);

    const vqc::CliOverrides overrides{out_dir, seed, workers};
    if (train->parsed()) {
        return vqc::cmd_train(config_path, overrides);
    }
    if (toy->parsed()) {
        return vqc::cmd_toy(config_path, overrides);
    }
    if (gradcheck->parsed()) {
        return vqc::cmd_gradcheck(config_path, overrides);
    }
    return vqc::cmd_count(config_path, overrides);
}

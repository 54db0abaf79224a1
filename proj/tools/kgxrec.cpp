// kgxrec: build user-item KG datasets, train the joint rating + explanation
// model, evaluate, explain single pairs, and sweep the loss weights.

#include <CLI11.hpp>
#include <string>
#include <vector>

#include "kgxrec/commands.hpp"
#include "kgxrec/config.hpp"
#include "kgxrec/error.hpp"

namespace {

kgxrec::RunConfig make_config(const std::string& config_path,
                              const std::vector<std::string>& overrides) {
    kgxrec::RunConfig cfg;
    if (!config_path.empty()) cfg = kgxrec::RunConfig::load(config_path);
    for (const std::string& kv : overrides) {
        auto pos = kv.find('=');
        if (pos == std::string::npos)
            throw kgxrec::ConfigError("override '" + kv + "' must be key=value");
        cfg.set(kv.substr(0, pos), kv.substr(pos + 1));
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"user-item knowledge-graph recommendation with natural-language explanations"};
    app.require_subcommand(1);

    std::string config_path, dataset, out, checkpoint, user_spec, kg_spec, grid = "0.01:1";
    std::string metadata, gazetteer;
    std::vector<std::string> overrides;
    long long seed = -1, epochs = -1, beam = -1;
    double eval_fraction = -1.0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key=value config file");
        cmd->add_option("--dataset", dataset, "dataset records file");
        cmd->add_option("--out", out, "output directory");
        cmd->add_option("--seed", seed, "RNG seed override");
        cmd->add_option("--set", overrides, "extra key=value overrides")->take_all();
    };

    CLI::App* build = app.add_subcommand("build-dataset", "construct dataset records from item metadata");
    build->add_option("--metadata", metadata, "item metadata TSV (item_id, name, description)")
        ->required();
    build->add_option("--gazetteer", gazetteer, "gazetteer TSV (surface, canonical, type)")->required();
    build->add_option("--out", out, "output dataset path")->required();

    CLI::App* train = app.add_subcommand("train", "train a model");
    add_common(train);
    train->add_option("--epochs", epochs, "epoch count override");

    CLI::App* evaluate = app.add_subcommand("evaluate", "score a checkpoint on the test split");
    add_common(evaluate);
    evaluate->add_option("--checkpoint", checkpoint, "checkpoint directory (default <out>/best)");
    evaluate->add_option("--eval-fraction", eval_fraction, "fraction of the test split to score");
    evaluate->add_option("--beam", beam, "beam size override");

    CLI::App* explain = app.add_subcommand("explain", "rate and explain one user-item pair");
    explain->add_option("--checkpoint", checkpoint, "checkpoint directory")->required();
    explain->add_option("--user", user_spec, "semicolon-separated purchase names")->required();
    explain->add_option("--kg", kg_spec, "semicolon-separated head|relation|tail triples")->required();
    explain->add_option("--beam", beam, "beam size");

    CLI::App* sweep = app.add_subcommand("sweep", "train across a lambda_r:lambda_e grid");
    add_common(sweep);
    sweep->add_option("--grid", grid, "comma-separated lambda_r:lambda_e pairs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kgxrec::cli::kExitUsage;
    }

    return kgxrec::cli::guarded([&]() -> int {
        if (build->parsed())
            return kgxrec::cli::run_build_dataset(metadata, gazetteer, out);

        kgxrec::RunConfig cfg = make_config(config_path, overrides);
        if (!dataset.empty()) cfg.dataset_path = dataset;
        if (!out.empty()) cfg.out_dir = out;
        if (seed >= 0) cfg.seed = static_cast<uint64_t>(seed);
        if (epochs >= 0) cfg.epochs = static_cast<size_t>(epochs);
        if (beam > 0) cfg.beam = static_cast<size_t>(beam);
        if (eval_fraction > 0.0) cfg.eval_fraction = eval_fraction;

        if (train->parsed()) return kgxrec::cli::run_train(cfg);
        if (evaluate->parsed()) return kgxrec::cli::run_evaluate(cfg, checkpoint);
        if (explain->parsed())
            return kgxrec::cli::run_explain(checkpoint, user_spec, kg_spec,
                                            beam > 0 ? static_cast<size_t>(beam) : 5);
        if (sweep->parsed()) return kgxrec::cli::run_sweep(cfg, grid);
        throw kgxrec::ConfigError("no subcommand");
    });
}

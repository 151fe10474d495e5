// tabreg — tabular regression pipeline: synthesize, clean, profile, train,
// evaluate, compare and predict on role-tagged CSV data.

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tabreg/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

tabreg::pipeline::PipelineConfig load_config(const std::string& path) {
    if (path.empty()) return tabreg::pipeline::PipelineConfig::defaults();
    return tabreg::pipeline::PipelineConfig::from_json_file(path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tabreg — tabular regression toolkit"};
    app.require_subcommand(1);

    std::string in_path, out_path, config_path, model_path, spec_path, report_path;
    std::int64_t rows = 5000;
    std::optional<std::uint64_t> seed;

    auto* generate = app.add_subcommand("generate", "synthesize a dataset from a column spec");
    generate->add_option("--spec", spec_path, "synthetic spec JSON (default: bundled)");
    generate->add_option("--rows", rows, "number of rows")->required();
    generate->add_option("--seed", seed, "override the spec seed");
    generate->add_option("--out", out_path, "output directory")->required();

    auto* clean = app.add_subcommand("clean", "drop nulls/duplicates/outliers, filter features");
    clean->add_option("--in", in_path, "input CSV")->required();
    clean->add_option("--config", config_path, "pipeline config JSON");
    clean->add_option("--out", out_path, "cleaned CSV path")->required();
    clean->add_option("--report", report_path, "clean report JSON path");

    auto* profile = app.add_subcommand("profile", "dataset profile: histograms, moments, correlations");
    profile->add_option("--in", in_path, "input CSV")->required();
    profile->add_option("--config", config_path, "pipeline config JSON");
    profile->add_option("--out", out_path, "output directory")->required();

    auto* train = app.add_subcommand("train", "fit the configured pipeline and save a model file");
    train->add_option("--in", in_path, "training CSV (cleaned)")->required();
    train->add_option("--config", config_path, "pipeline config JSON");
    train->add_option("--out", model_path, "model file path")->required();

    auto* evaluate = app.add_subcommand("evaluate", "score a saved model on labeled data");
    evaluate->add_option("--model", model_path, "model file")->required();
    evaluate->add_option("--in", in_path, "labeled CSV")->required();
    evaluate->add_option("--out", out_path, "output directory")->required();

    auto* compare = app.add_subcommand("compare", "before/after-binning model comparison grid");
    compare->add_option("--in", in_path, "input CSV (raw)")->required();
    compare->add_option("--config", config_path, "pipeline config JSON");
    compare->add_option("--out", out_path, "output directory")->required();

    auto* predict = app.add_subcommand("predict", "predict with a saved model file");
    predict->add_option("--model", model_path, "model file")->required();
    predict->add_option("--in", in_path, "feature CSV (target not required)")->required();
    predict->add_option("--out", out_path, "predictions CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        using namespace tabreg::pipeline;
        if (generate->parsed()) {
            run_generate(spec_path, rows, seed, out_path);
        } else if (clean->parsed()) {
            if (report_path.empty()) report_path = out_path + ".report.json";
            run_clean(in_path, load_config(config_path), out_path, report_path);
        } else if (profile->parsed()) {
            run_profile(in_path, load_config(config_path), out_path);
        } else if (train->parsed()) {
            run_train(in_path, load_config(config_path), model_path);
        } else if (evaluate->parsed()) {
            run_evaluate(model_path, in_path, out_path);
        } else if (compare->parsed()) {
            run_compare(in_path, load_config(config_path), out_path);
        } else if (predict->parsed()) {
            run_predict(model_path, in_path, out_path);
        }
    } catch (const tabreg::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const tabreg::DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return 0;
}

// Command-line pipeline driver: synthesize datasets, run localization /
// normalization / feature extraction per image, train the classifier
// ensemble, classify single inputs, and evaluate test splits.
//
// Exit codes: 0 ok, 2 config error, 3 I/O error, 4 localization failure
// (classify only), 5 dimension mismatch.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "iris/iris.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitLocalization = 4;
constexpr int kExitDimension = 5;

struct CommonOpts {
    std::string config_file;
    std::vector<std::string> overrides;  // key=value
    long long seed = -1;                 // -1 = keep config/default
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_file, "key = value configuration file");
    cmd->add_option("--set", opts.overrides, "override a single config key (key=value), repeatable");
    cmd->add_option("--seed", opts.seed, "override the master seed");
}

iris::RunConfig build_config(const CommonOpts& opts) {
    iris::RunConfig cfg;
    if (!opts.config_file.empty()) iris::apply_config_file(cfg, opts.config_file);
    for (const std::string& kv : opts.overrides) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw iris::ConfigError(iris::strf("--set expects key=value, got '%s'", kv.c_str()));
        iris::set_config_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (opts.seed >= 0) cfg.seed = static_cast<uint64_t>(opts.seed);
    iris::validate_config(cfg);
    return cfg;
}

int map_error(const iris::Error& e) {
    if (dynamic_cast<const iris::ConfigError*>(&e) || dynamic_cast<const iris::ParameterError*>(&e))
        return kExitConfig;
    if (dynamic_cast<const iris::DimensionError*>(&e)) return kExitDimension;
    if (dynamic_cast<const iris::NoPupilError*>(&e) || dynamic_cast<const iris::LocalizationError*>(&e))
        return kExitLocalization;
    return kExitIo;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"iris recognition pipeline"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string out_path, manifest_path, model_path, image_path, features_path, cache_path;
    bool dump_debug = false;

    CLI::App* synth = app.add_subcommand("synth", "generate a labeled synthetic eye dataset");
    add_common(synth, opts);
    synth->add_option("--out", out_path, "output dataset directory")->required();

    CLI::App* localize = app.add_subcommand("localize", "find pupil/iris circles for every image");
    add_common(localize, opts);
    localize->add_option("--manifest", manifest_path, "dataset manifest")->required();
    localize->add_option("--out", out_path, "artifact output directory")->required();
    localize->add_flag("--dump-debug", dump_debug, "also write edge maps, masks, and hypotheses");

    CLI::App* normalize = app.add_subcommand("normalize", "unwrap the iris annulus for every image");
    add_common(normalize, opts);
    normalize->add_option("--manifest", manifest_path, "dataset manifest")->required();
    normalize->add_option("--out", out_path, "artifact output directory")->required();

    CLI::App* extract = app.add_subcommand("extract", "compute feature vectors into a cache file");
    add_common(extract, opts);
    extract->add_option("--manifest", manifest_path, "dataset manifest")->required();
    extract->add_option("--out", out_path, "feature cache output file")->required();
    std::string split_filter = "all";
    extract->add_option("--split", split_filter, "train|test|all (default all)");

    CLI::App* train = app.add_subcommand("train", "train the classifier ensemble from a feature cache");
    add_common(train, opts);
    train->add_option("--features", cache_path, "feature cache file")->required();
    train->add_option("--out", model_path, "model output file")->required();

    CLI::App* classify = app.add_subcommand("classify", "classify one image or feature file");
    add_common(classify, opts);
    classify->add_option("--model", model_path, "trained model file")->required();
    classify->add_option("--image", image_path, "input image (PGM)");
    classify->add_option("--features", features_path, "input feature cache file");

    CLI::App* evaluate = app.add_subcommand("evaluate", "run the test split end to end and report");
    add_common(evaluate, opts);
    evaluate->add_option("--model", model_path, "trained model file")->required();
    evaluate->add_option("--manifest", manifest_path, "dataset manifest")->required();
    evaluate->add_option("--out", out_path, "report output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        iris::RunConfig cfg = build_config(opts);

        if (synth->parsed()) {
            iris::SynthResult result = iris::generate_dataset(cfg.synth_spec(), out_path,
                                                              cfg.train_fraction);
            std::printf("wrote %zu images in %d classes under %s\n", result.manifest.entries.size(),
                        result.manifest.class_count, out_path.c_str());
            std::printf("manifest: %s\n", result.manifest_path.string().c_str());
            return kExitOk;
        }

        if (localize->parsed()) {
            iris::Manifest manifest = iris::load_manifest(manifest_path);
            iris::LocalizeSummary sum = iris::cmd_localize(manifest, cfg, out_path, dump_debug);
            std::printf("localized %zu/%zu images (%zu failed)\n", sum.localized, sum.images, sum.failed);
            if (sum.with_truth > 0)
                std::printf("within 2 px of ground truth: %zu/%zu\n", sum.within_2px, sum.with_truth);
            return kExitOk;
        }

        if (normalize->parsed()) {
            iris::Manifest manifest = iris::load_manifest(manifest_path);
            iris::NormalizeSummary sum = iris::cmd_normalize(manifest, cfg, out_path);
            std::printf("normalized %zu/%zu images (%zu failed)\n", sum.normalized, sum.images,
                        sum.failed);
            return kExitOk;
        }

        if (extract->parsed()) {
            iris::Manifest manifest = iris::load_manifest(manifest_path);
            std::optional<iris::Split> split;
            if (split_filter == "train") split = iris::Split::Train;
            else if (split_filter == "test") split = iris::Split::Test;
            else if (split_filter != "all")
                throw iris::ConfigError("--split must be train, test, or all");
            iris::ExtractSummary sum = iris::cmd_extract(manifest, cfg, out_path, split);
            std::printf("extracted %zu/%zu feature vectors (%zu failed) -> %s\n", sum.extracted,
                        sum.images, sum.failed, out_path.c_str());
            return kExitOk;
        }

        if (train->parsed()) {
            iris::FeatureCache cache = iris::load_feature_cache(cache_path);
            iris::TrainSummary sum = iris::cmd_train(cache, cfg, model_path);
            std::fputs(sum.summary_text.c_str(), stdout);
            std::printf("model written to %s\n", model_path.c_str());
            return kExitOk;
        }

        if (classify->parsed()) {
            if (image_path.empty() == features_path.empty())
                throw iris::ConfigError("classify needs exactly one of --image or --features");
            iris::TrainedEnsemble ens = iris::load_ensemble_file(model_path);
            std::vector<std::pair<std::string, iris::ClassifyOutcome>> outcomes;
            if (!image_path.empty()) {
                outcomes.emplace_back(image_path, iris::classify_image(ens, image_path, cfg));
            } else {
                iris::FeatureCache cache = iris::load_feature_cache(features_path);
                if (cache.records.empty()) throw iris::DataError("feature file has no records");
                for (const auto& rec : cache.records)
                    outcomes.emplace_back(rec.id, iris::classify_features(ens, rec.features));
            }
            int exit_code = kExitOk;
            for (const auto& [id, oc] : outcomes) {
                switch (oc.status) {
                    case iris::ClassifyStatus::Ok: {
                        std::printf("%s: class %d (%d/%zu votes)\n", id.c_str(), oc.decision.label,
                                    oc.decision.winning_votes, oc.decision.votes.size());
                        for (size_t m = 0; m < oc.decision.votes.size(); ++m)
                            std::printf("  member %zu votes %d distance %.6f\n", m,
                                        oc.decision.votes[m].label, oc.decision.votes[m].distance);
                        break;
                    }
                    case iris::ClassifyStatus::LocalizationFailed:
                        std::fprintf(stderr, "%s: localization failed: %s\n", id.c_str(),
                                     oc.detail.c_str());
                        if (exit_code == kExitOk) exit_code = kExitLocalization;
                        break;
                    case iris::ClassifyStatus::DimensionMismatch:
                        std::fprintf(stderr, "%s: dimension mismatch: %s\n", id.c_str(),
                                     oc.detail.c_str());
                        if (exit_code == kExitOk) exit_code = kExitDimension;
                        break;
                    case iris::ClassifyStatus::DecodeFailed:
                        std::fprintf(stderr, "%s: cannot decode: %s\n", id.c_str(), oc.detail.c_str());
                        if (exit_code == kExitOk) exit_code = kExitIo;
                        break;
                }
            }
            return exit_code;
        }

        if (evaluate->parsed()) {
            iris::TrainedEnsemble ens = iris::load_ensemble_file(model_path);
            iris::Manifest manifest = iris::load_manifest(manifest_path);
            iris::EvaluateResult res = iris::cmd_evaluate(ens, manifest, cfg);
            auto out = iris::detail::open_out(out_path);
            out << res.report_text;
            std::printf("recognition rate %.2f%% (%zu/%zu correct, %zu pipeline failures)\n",
                        res.recognition_rate_pct, res.correct, res.test_samples, res.pipeline_failures);
            std::printf("report written to %s\n", out_path.c_str());
            return kExitOk;
        }
    } catch (const iris::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return map_error(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    }
    return kExitConfig;
}

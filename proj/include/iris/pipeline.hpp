#pragma once

// Batch orchestration for the CLI: per-image pipeline stages with failure
// isolation, artifact/report writing, training, classification, and
// evaluation. Reports carry the effective configuration and contain nothing
// volatile, so identical inputs produce identical bytes.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "iris/dataset.hpp"
#include "iris/features.hpp"
#include "iris/image.hpp"
#include "iris/localization.hpp"
#include "iris/lvq.hpp"
#include "iris/model_io.hpp"
#include "iris/normalization.hpp"
#include "iris/runconfig.hpp"
#include "iris/synth.hpp"

namespace iris {

struct StageOutcome {
    bool ok = false;
    std::string fail_stage;   // decode, pupil-estimate, pupil-circle, iris-circle, normalize, extract
    std::string fail_reason;
};

struct ImageArtifacts {
    StageOutcome outcome;
    GrayImage image;
    IrisGeometry geom;
    NoiseMask mask;
    NormalizedIris norm;
    FeatureVector features;
    LocateDebug debug;
};

// Runs one image through decode -> localize -> normalize -> extract,
// capturing the failing stage instead of throwing. `until` limits the run:
// 1 = localize, 2 = normalize, 3 = extract.
inline ImageArtifacts process_image(const std::filesystem::path& path, const RunConfig& cfg,
                                    int until = 3, bool keep_debug = false) {
    ImageArtifacts art;
    try {
        art.image = load_gray_file(path);
    } catch (const Error& e) {
        art.outcome.fail_stage = "decode";
        art.outcome.fail_reason = e.what();
        return art;
    }
    try {
        art.geom = locate_iris(art.image, cfg.locate, keep_debug ? &art.debug : nullptr);
    } catch (const NoPupilError& e) {
        art.outcome.fail_stage = "pupil-estimate";
        art.outcome.fail_reason = e.what();
        return art;
    } catch (const LocalizationError& e) {
        art.outcome.fail_stage =
            e.stage == LocalizationStage::PupilCircle ? "pupil-circle" : "iris-circle";
        art.outcome.fail_reason = e.what();
        return art;
    } catch (const Error& e) {
        art.outcome.fail_stage = "localize";
        art.outcome.fail_reason = e.what();
        return art;
    }
    if (until < 2) {
        art.outcome.ok = true;
        return art;
    }
    try {
        art.mask = noise_mask(art.image, art.geom, cfg.mask);
        art.norm = rubber_sheet(art.image, art.geom, art.mask, cfg.norm);
    } catch (const Error& e) {
        art.outcome.fail_stage = "normalize";
        art.outcome.fail_reason = e.what();
        return art;
    }
    if (until < 3) {
        art.outcome.ok = true;
        return art;
    }
    try {
        art.features = feature_vector(art.norm, cfg.lbp);
    } catch (const Error& e) {
        art.outcome.fail_stage = "extract";
        art.outcome.fail_reason = e.what();
        return art;
    }
    art.outcome.ok = true;
    return art;
}

namespace detail {

inline std::filesystem::path with_suffix(const std::filesystem::path& out_dir, const std::string& rel,
                                         const char* suffix) {
    std::filesystem::path p = out_dir / rel;
    p.replace_extension("");
    p += suffix;
    return p;
}

inline void ensure_parent(const std::filesystem::path& p) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw IoError(strf("cannot create %s", p.parent_path().string().c_str()));
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    ensure_parent(p);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError(strf("cannot write %s", p.string().c_str()));
    return out;
}

inline std::string circle_str(const Circle& c) {
    return strf("%s %s %s", format_double(c.cx).c_str(), format_double(c.cy).c_str(),
                format_double(c.r).c_str());
}

}  // namespace detail

// ----------------------------------------------------------------- localize

struct LocalizeSummary {
    size_t images = 0;
    size_t localized = 0;
    size_t failed = 0;
    size_t with_truth = 0;
    size_t within_2px = 0;  // of entries with ground truth
};

// Localizes every manifest entry. Writes one .geom file per success, a
// batch report, and (optionally) edge/mask debug artifacts. Per-image
// failures are recorded, not thrown.
inline LocalizeSummary cmd_localize(const Manifest& manifest, const RunConfig& cfg,
                                    const std::filesystem::path& out_dir, bool dump_debug = false) {
    LocalizeSummary sum;
    std::ostringstream body;
    for (const auto& entry : manifest.entries) {
        ++sum.images;
        ImageArtifacts art = process_image(manifest.resolve(entry), cfg, 1, dump_debug);
        if (!art.outcome.ok) {
            ++sum.failed;
            body << "entry " << entry.path << " failed " << art.outcome.fail_stage << ": "
                 << art.outcome.fail_reason << "\n";
            continue;
        }
        ++sum.localized;
        body << "entry " << entry.path << " ok pupil " << detail::circle_str(art.geom.pupil) << " iris "
             << detail::circle_str(art.geom.iris);

        std::filesystem::path truth_path = manifest.resolve(entry);
        truth_path.replace_extension(".truth");
        if (std::filesystem::exists(truth_path)) {
            GroundTruth truth = load_truth(truth_path);
            ++sum.with_truth;
            double pc = std::hypot(art.geom.pupil.cx - truth.pupil.cx, art.geom.pupil.cy - truth.pupil.cy);
            double pr = std::abs(art.geom.pupil.r - truth.pupil.r);
            double ic = std::hypot(art.geom.iris.cx - truth.iris.cx, art.geom.iris.cy - truth.iris.cy);
            double ir = std::abs(art.geom.iris.r - truth.iris.r);
            if (pc <= 2.0 && pr <= 2.0 && ic <= 2.0 && ir <= 2.0) ++sum.within_2px;
            body << strf(" err-pupil %.3f %.3f err-iris %.3f %.3f", pc, pr, ic, ir);
        }
        body << "\n";

        std::filesystem::path geom_path = detail::with_suffix(out_dir, entry.path, ".geom");
        auto out = detail::open_out(geom_path);
        out << "iris-geometry v1\n";
        out << "pupil " << detail::circle_str(art.geom.pupil) << "\n";
        out << "iris " << detail::circle_str(art.geom.iris) << "\n";

        if (dump_debug) {
            GrayImage edge_img(art.debug.edges.width, art.debug.edges.height);
            for (size_t i = 0; i < art.debug.edges.edges.size(); ++i)
                edge_img.data[i] = art.debug.edges.edges[i] ? 255 : 0;
            save_pgm_file(edge_img, detail::with_suffix(out_dir, entry.path, ".edges.pgm"));
            save_pgm_file(mask_to_image(binarize_dark(art.image, art.debug.estimate.threshold1)),
                          detail::with_suffix(out_dir, entry.path, ".mask-window.pgm"));
            save_pgm_file(mask_to_image(binarize_dark(art.image, art.debug.estimate.threshold2)),
                          detail::with_suffix(out_dir, entry.path, ".mask-full.pgm"));
            auto hyp = detail::open_out(detail::with_suffix(out_dir, entry.path, ".hypotheses.txt"));
            for (const auto& h : art.debug.pupil_hypotheses)
                hyp << h.cx << ' ' << h.cy << ' ' << h.r << ' ' << h.score << "\n";
            for (const auto& h : art.debug.iris_hypotheses)
                hyp << h.cx << ' ' << h.cy << ' ' << h.r << ' ' << h.score << "\n";
        }
    }

    auto report = detail::open_out(out_dir / "localize-report.txt");
    report << "iris-localize-report v1\n";
    report << "config:\n" << echo_config(cfg);
    report << "images " << sum.images << "\n";
    report << "localized " << sum.localized << "\n";
    report << "failed " << sum.failed << "\n";
    report << "with-truth " << sum.with_truth << "\n";
    report << "within-2px " << sum.within_2px << "\n";
    report << body.str();
    report << "end\n";
    return sum;
}

// ---------------------------------------------------------------- normalize

struct NormalizeSummary {
    size_t images = 0;
    size_t normalized = 0;
    size_t failed = 0;
};

inline NormalizeSummary cmd_normalize(const Manifest& manifest, const RunConfig& cfg,
                                      const std::filesystem::path& out_dir) {
    NormalizeSummary sum;
    std::ostringstream body;
    for (const auto& entry : manifest.entries) {
        ++sum.images;
        ImageArtifacts art = process_image(manifest.resolve(entry), cfg, 2);
        if (!art.outcome.ok) {
            ++sum.failed;
            body << "entry " << entry.path << " failed " << art.outcome.fail_stage << ": "
                 << art.outcome.fail_reason << "\n";
            continue;
        }
        ++sum.normalized;
        body << "entry " << entry.path << " ok occlusion "
             << strf("%.6f", art.norm.occlusion_fraction) << "\n";

        GrayImage tex(art.norm.angular_res, art.norm.radial_res);
        GrayImage valid(art.norm.angular_res, art.norm.radial_res);
        for (size_t i = 0; i < art.norm.texture.size(); ++i) {
            tex.data[i] = static_cast<uint8_t>(std::clamp(std::lround(art.norm.texture[i]), 0L, 255L));
            valid.data[i] = art.norm.valid[i] ? 255 : 0;
        }
        save_pgm_file(tex, detail::with_suffix(out_dir, entry.path, ".norm.pgm"));
        save_pgm_file(valid, detail::with_suffix(out_dir, entry.path, ".valid.pgm"));
    }

    auto report = detail::open_out(out_dir / "normalize-report.txt");
    report << "iris-normalize-report v1\n";
    report << "config:\n" << echo_config(cfg);
    report << "images " << sum.images << "\n";
    report << "normalized " << sum.normalized << "\n";
    report << "failed " << sum.failed << "\n";
    report << body.str();
    report << "end\n";
    return sum;
}

// ------------------------------------------------------------------ extract

struct ExtractSummary {
    size_t images = 0;
    size_t extracted = 0;
    size_t failed = 0;
};

// Feature extraction over a manifest split (or all entries). Writes the
// cache plus a sibling report naming any per-image failures.
inline ExtractSummary cmd_extract(const Manifest& manifest, const RunConfig& cfg,
                                  const std::filesystem::path& cache_path,
                                  std::optional<Split> only_split = std::nullopt) {
    ExtractSummary sum;
    FeatureCache cache;
    std::ostringstream body;
    for (const auto& entry : manifest.entries) {
        if (only_split && entry.split != *only_split) continue;
        ++sum.images;
        ImageArtifacts art = process_image(manifest.resolve(entry), cfg, 3);
        if (!art.outcome.ok) {
            ++sum.failed;
            body << "entry " << entry.path << " failed " << art.outcome.fail_stage << ": "
                 << art.outcome.fail_reason << "\n";
            continue;
        }
        ++sum.extracted;
        body << "entry " << entry.path << " ok\n";
        FeatureRecord rec;
        rec.id = entry.path;
        rec.features = std::move(art.features);
        rec.features.label = entry.class_id;
        cache.records.push_back(std::move(rec));
    }
    detail::ensure_parent(cache_path);
    save_feature_cache(cache, cache_path);

    std::filesystem::path report_path = cache_path;
    report_path += ".report.txt";
    auto report = detail::open_out(report_path);
    report << "iris-extract-report v1\n";
    report << "config:\n" << echo_config(cfg);
    report << "images " << sum.images << "\n";
    report << "extracted " << sum.extracted << "\n";
    report << "failed " << sum.failed << "\n";
    report << body.str();
    report << "end\n";
    return sum;
}

// -------------------------------------------------------------------- train

struct TrainSummary {
    TrainedEnsemble ensemble;
    std::string summary_text;
};

inline TrainSummary cmd_train(const FeatureCache& cache, const RunConfig& cfg,
                              const std::filesystem::path& model_path) {
    Dataset data = to_dataset(cache);
    if (data.empty()) throw DataError("train: feature cache is empty");
    int classes = 0;
    for (const Sample& s : data) classes = std::max(classes, s.label + 1);
    std::vector<char> seen(static_cast<size_t>(classes), 0);
    for (const Sample& s : data) seen[static_cast<size_t>(s.label)] = 1;
    int present = 0;
    for (char c : seen) present += c;
    if (present < 2) throw DataError("train: need at least two classes in the feature cache");

    TrainSummary sum;
    sum.ensemble = ensemble_train(data, cfg.member_configs());
    detail::ensure_parent(model_path);
    save_ensemble_file(sum.ensemble, model_path);

    std::ostringstream text;
    for (size_t i = 0; i < sum.ensemble.members.size(); ++i) {
        const auto& log = sum.ensemble.training_logs[i];
        text << strf("member %zu alpha0=%s final-train-accuracy=%.4f", i,
                     format_double(cfg.member_configs()[i].alpha0).c_str(), log.empty() ? 0.0 : log.back());
        text << " curve";
        size_t points[5] = {0, log.size() / 4, log.size() / 2, 3 * log.size() / 4,
                            log.empty() ? 0 : log.size() - 1};
        for (size_t p : points)
            if (p < log.size()) text << strf(" e%zu:%.4f", p + 1, log[p]);
        text << "\n";
    }
    sum.summary_text = text.str();
    return sum;
}

// ----------------------------------------------------------------- classify

enum class ClassifyStatus { Ok, LocalizationFailed, DimensionMismatch, DecodeFailed };

struct ClassifyOutcome {
    ClassifyStatus status = ClassifyStatus::Ok;
    std::string detail;
    EnsembleDecision decision;
};

inline ClassifyOutcome classify_image(const TrainedEnsemble& ens, const std::filesystem::path& image,
                                      const RunConfig& cfg) {
    ClassifyOutcome out;
    ImageArtifacts art = process_image(image, cfg, 3);
    if (!art.outcome.ok) {
        out.status = art.outcome.fail_stage == "decode" ? ClassifyStatus::DecodeFailed
                                                        : ClassifyStatus::LocalizationFailed;
        out.detail = strf("%s: %s", art.outcome.fail_stage.c_str(), art.outcome.fail_reason.c_str());
        return out;
    }
    if (art.features.dimension() != ens.dimension()) {
        out.status = ClassifyStatus::DimensionMismatch;
        out.detail = strf("feature dimension %zu, model dimension %zu", art.features.dimension(),
                          ens.dimension());
        return out;
    }
    out.decision = ensemble_classify(ens, art.features.values);
    return out;
}

inline ClassifyOutcome classify_features(const TrainedEnsemble& ens, const FeatureVector& fv) {
    ClassifyOutcome out;
    if (fv.dimension() != ens.dimension()) {
        out.status = ClassifyStatus::DimensionMismatch;
        out.detail = strf("feature dimension %zu, model dimension %zu", fv.dimension(), ens.dimension());
        return out;
    }
    out.decision = ensemble_classify(ens, fv.values);
    return out;
}

// ----------------------------------------------------------------- evaluate

struct EvaluateResult {
    size_t test_samples = 0;
    size_t correct = 0;
    size_t pipeline_failures = 0;  // counted as misclassifications
    double recognition_rate_pct = 0.0;
    int class_count = 0;
    // confusion[true] has class_count + 1 columns; the last column counts
    // pipeline (localization/extraction) failures for that class.
    std::vector<std::vector<size_t>> confusion;
    std::vector<double> per_class_accuracy;
    std::string report_text;
};

// End-to-end evaluation of the manifest's test split: every test image runs
// the full pipeline and failures score as misclassifications.
inline EvaluateResult cmd_evaluate(const TrainedEnsemble& ens, const Manifest& manifest,
                                   const RunConfig& cfg) {
    EvaluateResult res;
    res.class_count = ens.class_count();
    if (manifest.class_count > res.class_count)
        throw DataError(strf("evaluate: manifest has %d classes, model knows %d", manifest.class_count,
                             res.class_count));
    res.confusion.assign(static_cast<size_t>(res.class_count),
                         std::vector<size_t>(static_cast<size_t>(res.class_count) + 1, 0));

    std::ostringstream body;
    for (const auto& entry : manifest.entries) {
        if (entry.split != Split::Test) continue;
        ++res.test_samples;
        ClassifyOutcome oc = classify_image(ens, manifest.resolve(entry), cfg);
        if (oc.status != ClassifyStatus::Ok) {
            ++res.pipeline_failures;
            ++res.confusion[static_cast<size_t>(entry.class_id)][static_cast<size_t>(res.class_count)];
            body << "entry " << entry.path << " true " << entry.class_id << " failed " << oc.detail
                 << "\n";
            continue;
        }
        ++res.confusion[static_cast<size_t>(entry.class_id)][static_cast<size_t>(oc.decision.label)];
        if (oc.decision.label == entry.class_id) ++res.correct;
        body << "entry " << entry.path << " true " << entry.class_id << " predicted "
             << oc.decision.label << " votes " << oc.decision.winning_votes << "\n";
    }
    if (res.test_samples == 0) throw DataError("evaluate: manifest has no test entries");
    res.recognition_rate_pct = 100.0 * static_cast<double>(res.correct) / static_cast<double>(res.test_samples);

    res.per_class_accuracy.assign(static_cast<size_t>(res.class_count), 0.0);
    std::ostringstream report;
    report << "iris-evaluation-report v1\n";
    report << "config:\n" << echo_config(cfg);
    report << "classes " << res.class_count << "\n";
    report << "test-samples " << res.test_samples << "\n";
    report << "pipeline-failures " << res.pipeline_failures << "\n";
    report << "correct " << res.correct << "\n";
    report << strf("recognition-rate %.2f\n", res.recognition_rate_pct);
    report << "confusion-matrix rows " << res.class_count << " cols " << res.class_count + 1
           << " (last column = pipeline failure)\n";
    for (int c = 0; c < res.class_count; ++c) {
        size_t row_total = 0;
        report << "row " << c;
        for (size_t v : res.confusion[static_cast<size_t>(c)]) {
            report << ' ' << v;
            row_total += v;
        }
        report << "\n";
        if (row_total > 0)
            res.per_class_accuracy[static_cast<size_t>(c)] =
                static_cast<double>(res.confusion[static_cast<size_t>(c)][static_cast<size_t>(c)]) /
                static_cast<double>(row_total);
    }
    report << "per-class-accuracy\n";
    for (int c = 0; c < res.class_count; ++c)
        report << strf("class %d %.4f\n", c, res.per_class_accuracy[static_cast<size_t>(c)]);
    report << body.str();
    report << "end\n";
    res.report_text = report.str();
    return res;
}

}  // namespace iris

#pragma once

// Pipeline commands behind the `tempora` executable. Each run_* function
// throws tempora::Error (or std::exception) on failure; the executable maps
// that to a nonzero exit code.
//
// Seed derivation from the single top-level seed:
//   composer   derive_seed(seed, "compose")  then per class (…, "composer", class)
//   cv folds   derive_seed(seed, "cv")       then per class (…, "kfold", class)
//                                             and per fold  (…, "fold", fold)
//   train      derive_seed(seed, "train")    then per class (…, "svm", class)

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tempora/analysis.hpp"
#include "tempora/composer.hpp"
#include "tempora/corpus.hpp"
#include "tempora/eval.hpp"
#include "tempora/features.hpp"
#include "tempora/model_file.hpp"
#include "tempora/models.hpp"
#include "tempora/random.hpp"

namespace tempora {

struct RunConfig {
    // inputs
    std::string manifest;
    std::string data_dir;
    std::string composites_dir;
    std::vector<std::string> inputs;
    std::string model_path;
    std::string out_dir = "out";
    std::string boundary_tag = "SENT";

    // time binning: century | century:A-B | years:N | years:N:ORIGIN | edges:Y0,Y1,...
    std::string binning = "century";

    // composites
    bool compose = false;
    std::size_t target_tokens = 330;
    std::size_t docs_per_class = 1500;

    // features
    std::string features = "word1";
    std::size_t min_doc_freq = 1;
    std::string weighting = "raw-count";

    // model
    std::string model = "svm";
    double C = 1.0;
    double tol = 0.1;
    std::size_t max_iter = 1000;
    double alpha = 1.0;

    std::size_t k = 10;
    std::uint64_t seed = 0;

    // features command
    std::size_t top = 20;
    bool negative = false;
};

// ---------------------------------------------------------------------------

namespace detail {

inline int parse_int(std::string_view s, const std::string& what) {
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw ConfigError("invalid " + what + " '" + std::string(s) + "'");
    return v;
}

} // namespace detail

/// Builds a binning from its textual spec. Ranges not given explicitly are
/// derived from the years present: `century` spans the centuries of the
/// earliest and latest year; `years:N` starts at the first year of the
/// earliest year's century.
inline TimeBinning parse_binning(std::string_view spec, std::span<const int> years) {
    const auto need_years = [&] {
        if (years.empty()) throw ConfigError("binning '" + std::string(spec) + "' needs document years to set its range");
        return std::pair{*std::min_element(years.begin(), years.end()), *std::max_element(years.begin(), years.end())};
    };
    if (spec == "century") {
        const auto [lo, hi] = need_years();
        return TimeBinning::century(century_of(lo), century_of(hi));
    }
    if (spec.starts_with("century:")) {
        const auto range = spec.substr(8);
        const auto dash = range.find('-');
        if (dash == std::string_view::npos) throw ConfigError("expected century:FIRST-LAST");
        return TimeBinning::century(detail::parse_int(range.substr(0, dash), "century"),
                                    detail::parse_int(range.substr(dash + 1), "century"));
    }
    if (spec.starts_with("years:")) {
        const auto parts = detail::split(spec.substr(6), ':');
        const int width = detail::parse_int(parts[0], "bin width");
        const auto [lo, hi] = need_years();
        const int origin = parts.size() > 1 ? detail::parse_int(parts[1], "origin") : 100 * (century_of(lo) - 1) + 1;
        if (parts.size() > 2) throw ConfigError("expected years:WIDTH[:ORIGIN]");
        return TimeBinning::fixed_width(width, origin, hi);
    }
    if (spec.starts_with("edges:")) {
        std::vector<int> edges;
        for (auto e : detail::split(spec.substr(6), ',')) edges.push_back(detail::parse_int(e, "edge"));
        return TimeBinning::custom(edges);
    }
    throw ConfigError("unknown binning '" + std::string(spec) + "' (century | years:N | edges:...)");
}

inline FeaturizerConfig featurizer_config(const RunConfig& cfg) {
    FeaturizerConfig f;
    f.specs = parse_feature_specs(cfg.features);
    f.min_doc_freq = cfg.min_doc_freq;
    if (cfg.weighting == "raw-count")
        f.weighting = Weighting::raw_count;
    else if (cfg.weighting == "l2-normalized" || cfg.weighting == "l2")
        f.weighting = Weighting::l2_normalized;
    else
        throw ConfigError("unknown weighting '" + cfg.weighting + "' (raw-count | l2-normalized)");
    f.validate();
    return f;
}

inline TrainConfig train_config(const RunConfig& cfg) {
    TrainConfig t;
    t.C = cfg.C;
    t.tol = cfg.tol;
    t.max_iter = cfg.max_iter;
    t.alpha = cfg.alpha;
    t.seed = derive_seed(cfg.seed, "train");
    t.validate();
    return t;
}

inline ComposerConfig composer_config(const RunConfig& cfg) {
    return ComposerConfig{cfg.target_tokens, cfg.docs_per_class, derive_seed(cfg.seed, "compose")};
}

/// Labeled documents from either a composite directory or a manifest (raw
/// source documents, or composites generated in memory with `compose`).
struct LabeledCorpus {
    std::vector<std::string> class_labels;
    std::optional<TimeBinning> binning;
    std::vector<std::string> ids;
    std::vector<std::vector<Sentence>> documents;
    std::vector<std::size_t> labels;
    bool composite = false;

    std::vector<DocumentView> views() const {
        std::vector<DocumentView> v;
        v.reserve(documents.size());
        for (const auto& d : documents) v.emplace_back(d);
        return v;
    }
};

namespace detail {

inline void require_path(const std::string& p, const std::string& flag) {
    if (p.empty()) throw ConfigError("missing required " + flag);
    if (!std::filesystem::exists(p)) throw ConfigError(flag + " path does not exist: " + p);
}

inline std::vector<SourceDocument> load_sources(const RunConfig& cfg) {
    require_path(cfg.manifest, "--manifest");
    const auto data_dir = cfg.data_dir.empty() ? std::filesystem::path(cfg.manifest).parent_path().string() : cfg.data_dir;
    if (!cfg.data_dir.empty()) require_path(cfg.data_dir, "--data");
    return load_corpus(cfg.manifest, data_dir, VerticalOptions{cfg.boundary_tag});
}

inline std::vector<int> years_of(const std::vector<SourceDocument>& docs) {
    std::vector<int> y;
    for (const auto& d : docs) y.push_back(d.year);
    return y;
}

inline std::ofstream open_out(const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) throw Error("cannot write " + (dir / name).string());
    return out;
}

inline std::string shortest(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

} // namespace detail

inline LabeledCorpus load_labeled(const RunConfig& cfg) {
    LabeledCorpus lc;
    const VerticalOptions vopts{cfg.boundary_tag};
    if (!cfg.composites_dir.empty()) {
        detail::require_path(cfg.composites_dir, "--composites");
        auto cc = read_composites(cfg.composites_dir, vopts);
        lc.class_labels = std::move(cc.labels);
        lc.composite = true;
        for (auto& d : cc.documents) {
            lc.ids.push_back(d.id);
            lc.labels.push_back(d.cls);
            lc.documents.push_back(std::move(d.sentences));
        }
        return lc;
    }

    const auto sources = detail::load_sources(cfg);
    const auto years = detail::years_of(sources);
    auto binning = parse_binning(cfg.binning, years);
    lc.class_labels = binning.labels();
    if (cfg.compose) {
        const auto pool = pool_by_class(sources, binning);
        auto composites = generate_composites(pool, composer_config(cfg));
        lc.composite = true;
        for (auto& d : composites) {
            lc.ids.push_back(d.id);
            lc.labels.push_back(d.cls);
            lc.documents.push_back(std::move(d.sentences));
        }
    } else {
        for (const auto& d : sources) {
            lc.ids.push_back(d.id);
            lc.labels.push_back(binning.assign(d.year));
            lc.documents.push_back(d.sentences);
        }
    }
    lc.binning = std::move(binning);
    return lc;
}

// ---------------------------------------------------------------------------

/// Per-class document/sentence/token counts of a source corpus.
inline nlohmann::json run_ingest(const RunConfig& cfg, std::ostream& log) {
    const auto sources = detail::load_sources(cfg);
    const auto binning = parse_binning(cfg.binning, detail::years_of(sources));
    const auto pool = pool_by_class(sources, binning);

    std::vector<std::size_t> docs(binning.size(), 0);
    for (const auto& d : sources) ++docs[binning.assign(d.year)];

    nlohmann::json classes = nlohmann::json::array();
    log << std::left << std::setw(12) << "class" << std::right << std::setw(8) << "texts" << std::setw(12)
        << "sentences" << std::setw(12) << "tokens" << '\n';
    for (std::size_t c = 0; c < binning.size(); ++c) {
        const auto& r = binning.bins()[c];
        classes.push_back({{"class", c},
                           {"label", binning.label(c)},
                           {"first_year", r.first},
                           {"last_year", r.last},
                           {"documents", docs[c]},
                           {"sentences", pool.sentences(c).size()},
                           {"tokens", pool.token_count(c)}});
        log << std::left << std::setw(12) << binning.label(c) << std::right << std::setw(8) << docs[c] << std::setw(12)
            << pool.sentences(c).size() << std::setw(12) << pool.token_count(c) << '\n';
    }
    std::size_t tokens = 0;
    for (const auto& d : sources) tokens += d.token_count();
    log << std::left << std::setw(12) << "total" << std::right << std::setw(8) << sources.size() << std::setw(12)
        << pool.sentence_count() << std::setw(12) << tokens << '\n';

    nlohmann::json summary = {{"documents", sources.size()},
                              {"sentences", pool.sentence_count()},
                              {"tokens", tokens},
                              {"binning", cfg.binning},
                              {"classes", classes}};
    detail::open_out(cfg.out_dir, "ingest.json") << summary.dump(2) << '\n';
    return summary;
}

inline CompositeStats run_compose(const RunConfig& cfg, std::ostream& log) {
    const auto sources = detail::load_sources(cfg);
    const auto binning = parse_binning(cfg.binning, detail::years_of(sources));
    const auto pool = pool_by_class(sources, binning);
    const auto composites = generate_composites(pool, composer_config(cfg));
    write_composites(cfg.out_dir, composites, binning.labels());

    const auto stats = composite_stats(composites, binning.size());
    nlohmann::json per_class = nlohmann::json::array();
    log << std::left << std::setw(12) << "class" << std::right << std::setw(8) << "texts" << std::setw(12) << "tokens"
        << std::setw(10) << "mean" << '\n';
    for (std::size_t c = 0; c < stats.per_class.size(); ++c) {
        const auto& s = stats.per_class[c];
        per_class.push_back({{"class", c},
                             {"label", binning.label(c)},
                             {"documents", s.docs},
                             {"tokens", s.tokens},
                             {"mean_tokens", s.mean_tokens}});
        log << std::left << std::setw(12) << binning.label(c) << std::right << std::setw(8) << s.docs << std::setw(12)
            << s.tokens << std::setw(10) << std::fixed << std::setprecision(1) << s.mean_tokens << '\n';
    }
    log << std::left << std::setw(12) << "total" << std::right << std::setw(8) << stats.docs << std::setw(12)
        << stats.tokens << '\n';
    nlohmann::json j = {{"documents", stats.docs},
                        {"tokens", stats.tokens},
                        {"target_tokens", cfg.target_tokens},
                        {"docs_per_class", cfg.docs_per_class},
                        {"seed", cfg.seed},
                        {"classes", per_class}};
    detail::open_out(cfg.out_dir, "stats.json") << j.dump(2) << '\n';
    return stats;
}

inline constexpr const char* kSharedSentenceWarning =
    "composite documents were generated from the full sentence pool before splitting; a source sentence can occur in "
    "both training and test folds, so accuracy is optimistic compared with evaluation held out by source document";

inline EvalReport run_cv(const RunConfig& cfg, std::ostream& log) {
    const auto corpus = load_labeled(cfg);
    CrossValidationSetup setup;
    setup.features = featurizer_config(cfg);
    setup.model = parse_model_kind(cfg.model);
    setup.train = train_config(cfg);
    setup.k = cfg.k;
    setup.seed = derive_seed(cfg.seed, "cv");

    const auto views = corpus.views();
    auto report = cross_validate(views, corpus.labels, corpus.class_labels, setup);
    report.config["seed"] = cfg.seed;
    report.config["binning"] = corpus.binning ? nlohmann::json(cfg.binning) : nlohmann::json(nullptr);
    report.config["documents"] = corpus.documents.size();
    report.config["composite"] = corpus.composite;
    if (corpus.composite) report.warnings.emplace_back(kSharedSentenceWarning);

    detail::open_out(cfg.out_dir, "report.json") << to_json(report).dump(2) << '\n';
    {
        auto txt = detail::open_out(cfg.out_dir, "report.txt");
        render_text(txt, report);
    }
    {
        auto csv = detail::open_out(cfg.out_dir, "confusion.csv");
        write_confusion_csv(csv, report.confusion, report.labels);
    }
    render_text(log, report);
    return report;
}

inline std::filesystem::path model_output_path(const RunConfig& cfg) {
    return cfg.model_path.empty() ? std::filesystem::path(cfg.out_dir) / "model.json"
                                  : std::filesystem::path(cfg.model_path);
}

inline ModelFile run_train(const RunConfig& cfg, std::ostream& log) {
    const auto corpus = load_labeled(cfg);
    const auto views = corpus.views();
    const auto fcfg = featurizer_config(cfg);
    const auto tcfg = train_config(cfg);

    ModelFile mf;
    mf.kind = parse_model_kind(cfg.model);
    mf.vocabulary = build_vocabulary(views, fcfg);
    Dataset data;
    data.n_classes = corpus.class_labels.size();
    data.n_features = mf.vocabulary.size();
    for (std::size_t i = 0; i < views.size(); ++i) {
        data.vectors.push_back(vectorize(views[i], mf.vocabulary));
        data.labels.push_back(corpus.labels[i]);
    }
    mf.model = train(mf.kind, data, tcfg);
    mf.labels = corpus.class_labels;
    mf.binning = corpus.binning;
    mf.config = {{"features", cfg.features},  {"min_doc_freq", cfg.min_doc_freq}, {"weighting", cfg.weighting},
                 {"model", cfg.model},        {"C", cfg.C},                       {"tol", cfg.tol},
                 {"max_iter", cfg.max_iter},  {"alpha", cfg.alpha},               {"seed", cfg.seed},
                 {"documents", views.size()}, {"composite", corpus.composite}};

    const auto path = model_output_path(cfg);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    save_model(path, mf);
    log << "trained " << to_string(mf.kind) << " on " << views.size() << " documents, " << mf.vocabulary.size()
        << " features, " << mf.labels.size() << " classes -> " << path.string() << '\n';
    return mf;
}

struct Prediction {
    std::string id;
    std::size_t label = 0;
    std::vector<double> scores;
};

inline std::vector<Prediction> predict_documents(const ModelFile& mf, std::span<const std::string> ids,
                                                 std::span<const DocumentView> docs) {
    std::vector<Prediction> out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        auto s = scores(mf.model, vectorize(docs[i], mf.vocabulary));
        const auto label = predict(s);
        out.push_back({ids[i], label, std::move(s)});
    }
    return out;
}

/// Writes `doc_id,predicted_label,score_<label>...` rows to predictions.csv.
inline std::vector<Prediction> run_predict(const RunConfig& cfg, std::ostream& log) {
    detail::require_path(cfg.model_path, "--model-file");
    const auto mf = load_model(cfg.model_path);

    std::vector<std::string> ids;
    std::vector<std::vector<Sentence>> docs;
    if (!cfg.inputs.empty()) {
        for (const auto& p : cfg.inputs) {
            detail::require_path(p, "--input");
            ids.push_back(std::filesystem::path(p).stem().string());
            docs.push_back(read_vertical_file(p, VerticalOptions{cfg.boundary_tag}));
        }
    } else if (!cfg.composites_dir.empty()) {
        detail::require_path(cfg.composites_dir, "--composites");
        for (auto& d : read_composites(cfg.composites_dir, VerticalOptions{cfg.boundary_tag}).documents) {
            ids.push_back(d.id);
            docs.push_back(std::move(d.sentences));
        }
    } else {
        for (auto& d : detail::load_sources(cfg)) {
            ids.push_back(d.id);
            docs.push_back(std::move(d.sentences));
        }
    }
    std::vector<DocumentView> views(docs.begin(), docs.end());
    const auto preds = predict_documents(mf, ids, views);

    auto csv = detail::open_out(cfg.out_dir, "predictions.csv");
    csv << "doc_id,predicted_label";
    for (const auto& l : mf.labels) csv << ",score_" << l;
    csv << '\n';
    for (const auto& p : preds) {
        csv << p.id << ',' << mf.labels[p.label];
        for (double s : p.scores) csv << ',' << detail::shortest(s);
        csv << '\n';
    }
    log << "predicted " << preds.size() << " documents -> " << (std::filesystem::path(cfg.out_dir) / "predictions.csv").string()
        << '\n';
    return preds;
}

inline FeatureReport run_features(const RunConfig& cfg, std::ostream& log) {
    detail::require_path(cfg.model_path, "--model-file");
    const auto mf = load_model(cfg.model_path);
    if (mf.kind != ModelKind::svm) throw ConfigError("feature ranking needs an svm model");
    const auto report = feature_report(std::get<LinearModel>(mf.model), mf.vocabulary, mf.labels, cfg.top, cfg.negative);
    detail::open_out(cfg.out_dir, "features.json") << to_json(report).dump(2) << '\n';
    {
        auto txt = detail::open_out(cfg.out_dir, "features.txt");
        render_text(txt, report);
    }
    render_text(log, report);
    return report;
}

} // namespace tempora

#pragma once

// Versioned JSON model files with a CRC-32 content checksum.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/crc.hpp>
#include <nlohmann/json.hpp>

#include "tempora/corpus.hpp"
#include "tempora/error.hpp"
#include "tempora/features.hpp"
#include "tempora/models.hpp"

namespace tempora {

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kModelFormatName = "tempora-model";

struct ModelFile {
    ModelKind kind = ModelKind::svm;
    Vocabulary vocabulary;
    TrainedModel model;
    std::vector<std::string> labels;
    std::optional<TimeBinning> binning;
    nlohmann::json config = nlohmann::json::object();
};

namespace detail {

inline std::string crc32_hex(const std::string& text) {
    boost::crc_32_type crc;
    crc.process_bytes(text.data(), text.size());
    std::ostringstream s;
    s << std::hex << std::setw(8) << std::setfill('0') << crc.checksum();
    return s.str();
}

inline std::string_view scheme_name(BinningScheme s) {
    switch (s) {
    case BinningScheme::century: return "century";
    case BinningScheme::fixed_width: return "fixed-width";
    case BinningScheme::custom: return "custom";
    }
    return "custom";
}

inline BinningScheme parse_scheme(std::string_view s) {
    if (s == "century") return BinningScheme::century;
    if (s == "fixed-width") return BinningScheme::fixed_width;
    if (s == "custom") return BinningScheme::custom;
    throw ModelFormatError("unknown binning scheme '" + std::string(s) + "'");
}

inline nlohmann::json vocabulary_to_json(const Vocabulary& v) {
    nlohmann::json keys = nlohmann::json::array();
    for (const auto& k : v.keys()) keys.push_back({k.channel == Channel::word ? "w" : "p", k.order, k.items});
    return {{"features", format_feature_specs(v.config().specs)},
            {"min_doc_freq", v.config().min_doc_freq},
            {"weighting", v.config().weighting == Weighting::raw_count ? "raw-count" : "l2-normalized"},
            {"keys", keys}};
}

inline Vocabulary vocabulary_from_json(const nlohmann::json& j) {
    FeaturizerConfig cfg;
    cfg.specs = parse_feature_specs(j.at("features").get<std::string>());
    cfg.min_doc_freq = j.at("min_doc_freq").get<std::size_t>();
    const auto weighting = j.at("weighting").get<std::string>();
    if (weighting == "raw-count")
        cfg.weighting = Weighting::raw_count;
    else if (weighting == "l2-normalized")
        cfg.weighting = Weighting::l2_normalized;
    else
        throw ModelFormatError("unknown weighting '" + weighting + "'");
    std::vector<NgramKey> keys;
    for (const auto& k : j.at("keys")) {
        NgramKey key;
        key.channel = k.at(0).get<std::string>() == "w" ? Channel::word : Channel::pos;
        key.order = k.at(1).get<int>();
        key.items = k.at(2).get<std::vector<std::string>>();
        if (key.items.size() != static_cast<std::size_t>(key.order)) throw ModelFormatError("n-gram key length mismatch");
        keys.push_back(std::move(key));
    }
    return Vocabulary(std::move(cfg), std::move(keys));
}

inline nlohmann::json linear_to_json(const LinearModel& m) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& w : m.weights) {
        nlohmann::json entries = nlohmann::json::array();
        for (std::size_t i = 0; i < m.n_features; ++i)
            if (w[i] != 0.0) entries.push_back({i, w[i]});
        classes.push_back({{"bias", w[m.n_features]}, {"entries", entries}});
    }
    return {{"n_features", m.n_features},
            {"C", m.config.C},
            {"tol", m.config.tol},
            {"max_iter", m.config.max_iter},
            {"seed", m.config.seed},
            {"iterations", m.iterations},
            {"converged", m.converged},
            {"weights", classes}};
}

inline LinearModel linear_from_json(const nlohmann::json& j) {
    LinearModel m;
    m.n_features = j.at("n_features").get<std::size_t>();
    m.config.C = j.at("C").get<double>();
    m.config.tol = j.at("tol").get<double>();
    m.config.max_iter = j.at("max_iter").get<std::size_t>();
    m.config.seed = j.at("seed").get<std::uint64_t>();
    m.iterations = j.at("iterations").get<std::vector<std::size_t>>();
    m.converged = j.at("converged").get<std::vector<bool>>();
    for (const auto& cls : j.at("weights")) {
        std::vector<double> w(m.n_features + 1, 0.0);
        for (const auto& e : cls.at("entries")) {
            const auto i = e.at(0).get<std::size_t>();
            if (i >= m.n_features) throw ModelFormatError("weight index out of range");
            w[i] = e.at(1).get<double>();
        }
        w[m.n_features] = cls.at("bias").get<double>();
        m.weights.push_back(std::move(w));
    }
    return m;
}

inline nlohmann::json mnb_to_json(const MnbModel& m) {
    return {{"alpha", m.alpha}, {"log_priors", m.log_priors}, {"log_likelihoods", m.log_likelihoods}};
}

inline MnbModel mnb_from_json(const nlohmann::json& j) {
    MnbModel m;
    m.alpha = j.at("alpha").get<double>();
    m.log_priors = j.at("log_priors").get<std::vector<double>>();
    m.log_likelihoods = j.at("log_likelihoods").get<std::vector<std::vector<double>>>();
    return m;
}

} // namespace detail

inline nlohmann::json to_json(const ModelFile& mf) {
    nlohmann::json j;
    j["format"] = kModelFormatName;
    j["version"] = kModelFormatVersion;
    j["kind"] = to_string(mf.kind);
    j["labels"] = mf.labels;
    if (mf.binning) {
        nlohmann::json bins = nlohmann::json::array();
        for (const auto& b : mf.binning->bins()) bins.push_back({b.first, b.last});
        j["binning"] = {{"scheme", detail::scheme_name(mf.binning->scheme())},
                        {"bins", bins},
                        {"labels", mf.binning->labels()}};
    } else {
        j["binning"] = nullptr;
    }
    j["config"] = mf.config;
    j["vocabulary"] = detail::vocabulary_to_json(mf.vocabulary);
    j["model"] = mf.kind == ModelKind::svm ? detail::linear_to_json(std::get<LinearModel>(mf.model))
                                           : detail::mnb_to_json(std::get<MnbModel>(mf.model));
    j["checksum"] = "crc32:" + detail::crc32_hex(j.dump());
    return j;
}

inline ModelFile model_from_json(nlohmann::json j) {
    if (!j.is_object() || j.value("format", "") != kModelFormatName) throw ModelFormatError("not a tempora model file");
    const auto version = j.value("version", -1);
    if (version != kModelFormatVersion)
        throw ModelFormatError("unsupported model format version " + std::to_string(version) + " (this build reads " +
                               std::to_string(kModelFormatVersion) + ")");
    const auto stored = j.value("checksum", "");
    j.erase("checksum");
    if (stored != "crc32:" + detail::crc32_hex(j.dump())) throw ModelFormatError("model file checksum mismatch");

    try {
        ModelFile mf;
        mf.kind = parse_model_kind(j.at("kind").get<std::string>());
        mf.labels = j.at("labels").get<std::vector<std::string>>();
        if (!j.at("binning").is_null()) {
            const auto& b = j.at("binning");
            std::vector<YearRange> bins;
            for (const auto& r : b.at("bins")) bins.push_back({r.at(0).get<int>(), r.at(1).get<int>()});
            mf.binning = TimeBinning::from_bins(detail::parse_scheme(b.at("scheme").get<std::string>()), std::move(bins),
                                                b.at("labels").get<std::vector<std::string>>());
        }
        mf.config = j.at("config");
        mf.vocabulary = detail::vocabulary_from_json(j.at("vocabulary"));
        if (mf.kind == ModelKind::svm)
            mf.model = detail::linear_from_json(j.at("model"));
        else
            mf.model = detail::mnb_from_json(j.at("model"));

        const auto n_classes = std::visit([](const auto& m) { return m.n_classes(); }, mf.model);
        if (n_classes != mf.labels.size()) throw ModelFormatError("label count does not match model classes");
        return mf;
    } catch (const nlohmann::json::exception& e) {
        throw ModelFormatError(std::string("malformed model file: ") + e.what());
    }
}

inline void save_model(const std::filesystem::path& path, const ModelFile& mf) {
    std::ofstream out(path);
    out << to_json(mf).dump(1) << '\n';
    if (!out) throw Error("failed writing model file " + path.string());
}

inline ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open model file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ModelFormatError(path.string() + ": " + e.what());
    }
    return model_from_json(std::move(j));
}

} // namespace tempora

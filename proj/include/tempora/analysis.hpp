#pragma once

// Ranking of n-gram features by their one-vs-rest SVM weight.

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tempora/error.hpp"
#include "tempora/features.hpp"
#include "tempora/models.hpp"

namespace tempora {

struct RankedFeature {
    NgramKey key;
    double weight = 0.0;
    std::size_t rank = 0; // 1-based
    std::size_t cls = 0;
    std::uint32_t index = 0;
};

enum class Polarity { indicative, contra_indicative };

/// The k features most indicative of `cls`: largest non-negative weights
/// first, ties by ascending feature index, bias excluded. With
/// contra_indicative, the k most negative weights instead (most negative
/// first).
inline std::vector<RankedFeature> top_features(const LinearModel& model, const Vocabulary& vocab, std::size_t cls,
                                               std::size_t k, Polarity polarity = Polarity::indicative) {
    if (cls >= model.n_classes())
        throw RangeError("class index " + std::to_string(cls) + " out of range (" + std::to_string(model.n_classes()) +
                         " classes)");
    if (model.n_features != vocab.size()) throw Error("model and vocabulary sizes differ");
    if (k < 1) throw ConfigError("k must be >= 1");

    const auto& w = model.weights[cls];
    std::vector<std::uint32_t> candidates;
    for (std::uint32_t i = 0; i < model.n_features; ++i) {
        const bool keep = polarity == Polarity::indicative ? w[i] >= 0.0 : w[i] < 0.0;
        if (keep) candidates.push_back(i);
    }
    const auto better = [&](std::uint32_t a, std::uint32_t b) {
        const double wa = polarity == Polarity::indicative ? w[a] : -w[a];
        const double wb = polarity == Polarity::indicative ? w[b] : -w[b];
        return wa != wb ? wa > wb : a < b;
    };
    const auto n = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n), candidates.end(), better);

    std::vector<RankedFeature> out;
    out.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto i = candidates[r];
        out.push_back({vocab.key(i), w[i], r + 1, cls, i});
    }
    return out;
}

struct FeatureReport {
    std::vector<std::string> labels;
    std::vector<std::vector<RankedFeature>> indicative;        // per class
    std::vector<std::vector<RankedFeature>> contra_indicative; // per class, empty unless requested
};

inline FeatureReport feature_report(const LinearModel& model, const Vocabulary& vocab,
                                    const std::vector<std::string>& labels, std::size_t k,
                                    bool include_negative = false) {
    FeatureReport report;
    report.labels = labels;
    for (std::size_t c = 0; c < model.n_classes(); ++c) {
        report.indicative.push_back(top_features(model, vocab, c, k));
        report.contra_indicative.push_back(include_negative
                                               ? top_features(model, vocab, c, k, Polarity::contra_indicative)
                                               : std::vector<RankedFeature>{});
    }
    return report;
}

namespace detail {

inline nlohmann::json ranked_to_json(const std::vector<RankedFeature>& list) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : list)
        arr.push_back({{"rank", f.rank},
                       {"weight", f.weight},
                       {"channel", to_string(f.key.channel)},
                       {"order", f.key.order},
                       {"ngram", f.key.items},
                       {"index", f.index}});
    return arr;
}

inline void ranked_to_text(std::ostream& out, const std::vector<RankedFeature>& list) {
    for (const auto& f : list) {
        std::ostringstream weight;
        weight << std::fixed << std::setprecision(6) << f.weight;
        out << std::setw(4) << f.rank << "  " << std::setw(11) << weight.str() << "  " << std::left << std::setw(5)
            << to_string(f.key.channel) << std::right << ' ' << f.key.order << "  " << join_items(f.key) << '\n';
    }
}

} // namespace detail

inline nlohmann::json to_json(const FeatureReport& r) {
    nlohmann::json classes = nlohmann::json::array();
    for (std::size_t c = 0; c < r.indicative.size(); ++c) {
        nlohmann::json entry = {{"class", c},
                                {"label", c < r.labels.size() ? r.labels[c] : std::to_string(c)},
                                {"features", detail::ranked_to_json(r.indicative[c])}};
        if (!r.contra_indicative[c].empty()) entry["negative_features"] = detail::ranked_to_json(r.contra_indicative[c]);
        classes.push_back(std::move(entry));
    }
    return {{"classes", classes}};
}

/// One block per class with `rank weight channel order n-gram` columns.
inline void render_text(std::ostream& out, const FeatureReport& r) {
    for (std::size_t c = 0; c < r.indicative.size(); ++c) {
        if (c) out << '\n';
        out << "== " << (c < r.labels.size() ? r.labels[c] : std::to_string(c)) << '\n';
        out << "rank       weight  chan  n  n-gram\n";
        detail::ranked_to_text(out, r.indicative[c]);
        if (!r.contra_indicative[c].empty()) {
            out << "-- negative\n";
            detail::ranked_to_text(out, r.contra_indicative[c]);
        }
    }
}

} // namespace tempora

#pragma once

// Composite documents: artificial texts assembled from sentences sampled
// within one time-period class.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tempora/corpus.hpp"
#include "tempora/random.hpp"

namespace tempora {

struct ComposerConfig {
    std::size_t target_tokens = 330;
    std::size_t docs_per_class = 1500;
    std::uint64_t seed = 0;
};

struct CompositeDocument {
    std::string id;
    std::size_t cls = 0;
    std::vector<Sentence> sentences;
    std::vector<std::string> provenance; // source document id per sentence

    std::size_t token_count() const noexcept { return tempora::token_count(sentences); }
};

namespace detail {

inline std::string composite_id(std::size_t cls, std::size_t index) {
    std::string n = std::to_string(index);
    if (n.size() < 5) n.insert(0, 5 - n.size(), '0');
    return "c" + std::to_string(cls) + "_" + n;
}

inline std::vector<CompositeDocument> compose_class(const LabeledPool& pool, std::size_t cls,
                                                    const ComposerConfig& config) {
    const auto sentences = pool.sentences(cls);
    const std::size_t n = sentences.size();
    Rng rng(derive_seed(config.seed, "composer", cls));

    // Partial Fisher-Yates over a persistent permutation: positions [0, drawn)
    // hold this composite's picks, so draws are without replacement until the
    // pool runs out, then with replacement.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    std::vector<CompositeDocument> out;
    out.reserve(config.docs_per_class);
    for (std::size_t j = 0; j < config.docs_per_class; ++j) {
        CompositeDocument doc;
        doc.id = composite_id(cls, j);
        doc.cls = cls;
        std::size_t tokens = 0;
        std::size_t drawn = 0;
        while (tokens < config.target_tokens) {
            std::size_t pick;
            if (drawn < n) {
                const auto k = drawn + static_cast<std::size_t>(rng.below(n - drawn));
                std::swap(perm[drawn], perm[k]);
                pick = perm[drawn++];
            } else {
                pick = static_cast<std::size_t>(rng.below(n));
            }
            const auto& ps = sentences[pick];
            doc.sentences.push_back(*ps.sentence);
            doc.provenance.push_back(*ps.source_id);
            tokens += ps.sentence->size();
        }
        out.push_back(std::move(doc));
    }
    return out;
}

} // namespace detail

/// docs_per_class composites for every class, class 0 first. Each class
/// draws from its own stream derived from (seed, class), so output does not
/// depend on scheduling.
inline std::vector<CompositeDocument> generate_composites(const LabeledPool& pool, const ComposerConfig& config) {
    if (config.target_tokens < 1) throw ConfigError("target_tokens must be >= 1");
    if (config.docs_per_class < 1) throw ConfigError("docs_per_class must be >= 1");
    for (std::size_t c = 0; c < pool.n_classes(); ++c)
        if (pool.sentences(c).empty())
            throw GenerationError("class " + std::to_string(c) + " has an empty sentence pool");

    std::vector<std::future<std::vector<CompositeDocument>>> jobs;
    for (std::size_t c = 0; c < pool.n_classes(); ++c)
        jobs.push_back(std::async(std::launch::async, [&pool, c, &config] {
            return detail::compose_class(pool, c, config);
        }));

    std::vector<CompositeDocument> all;
    all.reserve(pool.n_classes() * config.docs_per_class);
    for (auto& job : jobs)
        for (auto& d : job.get()) all.push_back(std::move(d));
    return all;
}

struct ClassCompositeStats {
    std::size_t docs = 0;
    std::size_t tokens = 0;
    double mean_tokens = 0.0;
};

struct CompositeStats {
    std::vector<ClassCompositeStats> per_class;
    std::size_t docs = 0;
    std::size_t tokens = 0;
};

/// Per-class document and token counts. n_classes == 0 infers the class
/// count from the largest class index present.
inline CompositeStats composite_stats(std::span<const CompositeDocument> composites, std::size_t n_classes = 0) {
    CompositeStats stats;
    for (const auto& d : composites) n_classes = std::max(n_classes, d.cls + 1);
    stats.per_class.resize(n_classes);
    for (const auto& d : composites) {
        auto& cs = stats.per_class[d.cls];
        const auto t = d.token_count();
        ++cs.docs;
        cs.tokens += t;
        ++stats.docs;
        stats.tokens += t;
    }
    for (auto& cs : stats.per_class)
        cs.mean_tokens = cs.docs ? static_cast<double>(cs.tokens) / static_cast<double>(cs.docs) : 0.0;
    return stats;
}

// ---------------------------------------------------------------------------
// On-disk layout of a composite corpus:
//   classes.csv     class,label
//   composites.csv  id,class,label,path
//   provenance.csv  id,sentence,source_id
//   docs/<id>.vrt   vertical text

struct CompositeCorpus {
    std::vector<std::string> labels;
    std::vector<CompositeDocument> documents;
};

inline void write_composites(const std::filesystem::path& dir, std::span<const CompositeDocument> composites,
                             const std::vector<std::string>& labels) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "docs");

    std::ofstream classes(dir / "classes.csv");
    classes << "class,label\n";
    for (std::size_t c = 0; c < labels.size(); ++c) classes << c << ',' << labels[c] << '\n';

    std::ofstream manifest(dir / "composites.csv");
    std::ofstream prov(dir / "provenance.csv");
    manifest << "id,class,label,path\n";
    prov << "id,sentence,source_id\n";
    for (const auto& d : composites) {
        const auto rel = "docs/" + d.id + ".vrt";
        manifest << d.id << ',' << d.cls << ',' << labels.at(d.cls) << ',' << rel << '\n';
        for (std::size_t i = 0; i < d.provenance.size(); ++i) prov << d.id << ',' << i << ',' << d.provenance[i] << '\n';
        std::ofstream vrt(dir / rel);
        write_vertical(vrt, d.sentences);
        if (!vrt) throw Error("failed writing " + (dir / rel).string());
    }
    if (!classes || !manifest || !prov) throw Error("failed writing composite manifests in " + dir.string());
}

inline CompositeCorpus read_composites(const std::filesystem::path& dir, const VerticalOptions& opts = {}) {
    CompositeCorpus corpus;
    std::string raw;

    std::ifstream classes(dir / "classes.csv");
    if (!classes) throw LoadError("cannot open " + (dir / "classes.csv").string());
    std::getline(classes, raw);
    while (std::getline(classes, raw)) {
        const auto line = detail::trim_cr(raw);
        if (line.empty()) continue;
        const auto f = detail::split(line, ',');
        if (f.size() != 2 || std::stoul(std::string(f[0])) != corpus.labels.size())
            throw LoadError("malformed classes.csv row '" + std::string(line) + "'");
        corpus.labels.emplace_back(f[1]);
    }

    std::ifstream manifest(dir / "composites.csv");
    if (!manifest) throw LoadError("cannot open " + (dir / "composites.csv").string());
    std::getline(manifest, raw);
    std::size_t line_no = 1;
    while (std::getline(manifest, raw)) {
        ++line_no;
        const auto line = detail::trim_cr(raw);
        if (line.empty()) continue;
        const auto f = detail::split(line, ',');
        const auto where = "composites.csv line " + std::to_string(line_no);
        if (f.size() != 4) throw LoadError(where + ": expected 4 fields");
        CompositeDocument d;
        d.id = std::string(f[0]);
        std::size_t cls = 0;
        const auto [p, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), cls);
        if (ec != std::errc{} || cls >= corpus.labels.size()) throw LoadError(where + ": bad class index");
        d.cls = cls;
        d.sentences = read_vertical_file(dir / std::string(f[3]), opts);
        corpus.documents.push_back(std::move(d));
    }

    std::ifstream prov(dir / "provenance.csv");
    if (prov) {
        std::unordered_map<std::string, std::size_t> by_id;
        for (std::size_t i = 0; i < corpus.documents.size(); ++i) by_id.emplace(corpus.documents[i].id, i);
        std::getline(prov, raw);
        while (std::getline(prov, raw)) {
            const auto f = detail::split(detail::trim_cr(raw), ',');
            if (f.size() != 3) continue;
            const auto it = by_id.find(std::string(f[0]));
            if (it != by_id.end()) corpus.documents[it->second].provenance.emplace_back(f[2]);
        }
    }
    return corpus;
}

} // namespace tempora

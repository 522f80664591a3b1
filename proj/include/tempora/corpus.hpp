#pragma once

// Annotated corpus ingestion: vertical-format parsing, CSV manifests,
// time binning and per-class sentence pools.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <future>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tempora/error.hpp"

namespace tempora {

struct AnnotatedToken {
    std::string form;
    std::string pos;
    std::string lemma;

    friend bool operator==(const AnnotatedToken&, const AnnotatedToken&) = default;
};

struct Sentence {
    std::vector<AnnotatedToken> tokens;

    std::size_t size() const noexcept { return tokens.size(); }
    friend bool operator==(const Sentence&, const Sentence&) = default;
};

inline std::size_t token_count(std::span<const Sentence> sentences) noexcept {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
}

struct SourceDocument {
    std::string id;
    int year = 0;
    std::vector<Sentence> sentences;

    std::size_t token_count() const noexcept { return tempora::token_count(sentences); }
};

struct VerticalOptions {
    std::string boundary_tag = "SENT";
};

namespace detail {

inline std::string_view trim_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

inline bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; });
}

} // namespace detail

/// Parse one-token-per-line `form<TAB>pos[<TAB>lemma]` text into sentences.
/// A token tagged with the boundary tag closes its sentence (and belongs to
/// it); a blank line closes the pending sentence, if any. Trailing tokens
/// without a boundary form a final sentence.
inline std::vector<Sentence> parse_vertical(std::istream& in, const VerticalOptions& opts = {}) {
    std::vector<Sentence> sentences;
    Sentence current;
    std::string raw;
    std::size_t line_no = 0;

    auto flush = [&] {
        if (!current.tokens.empty()) {
            sentences.push_back(std::move(current));
            current = Sentence{};
        }
    };

    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = detail::trim_cr(raw);
        if (detail::is_blank(line)) {
            flush();
            continue;
        }
        const auto fields = detail::split(line, '\t');
        if (fields.size() < 2)
            throw ParseError(line_no, "expected form<TAB>pos[<TAB>lemma], got '" + std::string(line) + "'");
        if (fields[0].empty() || fields[1].empty())
            throw ParseError(line_no, "empty form or POS field");
        AnnotatedToken tok{std::string(fields[0]), std::string(fields[1]),
                           fields.size() > 2 ? std::string(fields[2]) : std::string()};
        const bool boundary = tok.pos == opts.boundary_tag;
        current.tokens.push_back(std::move(tok));
        if (boundary) flush();
    }
    flush();
    return sentences;
}

inline std::vector<Sentence> parse_vertical(std::string_view text, const VerticalOptions& opts = {}) {
    std::istringstream in{std::string(text)};
    return parse_vertical(in, opts);
}

inline std::vector<Sentence> read_vertical_file(const std::filesystem::path& path,
                                                const VerticalOptions& opts = {}) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open vertical file " + path.string());
    try {
        return parse_vertical(in, opts);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.detail(), path.string());
    }
}

/// Writes sentences in vertical format, one blank line after each sentence.
inline void write_vertical(std::ostream& out, std::span<const Sentence> sentences) {
    for (const auto& s : sentences) {
        for (const auto& t : s.tokens) out << t.form << '\t' << t.pos << '\t' << t.lemma << '\n';
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Manifest

struct ManifestRow {
    std::size_t line = 0;
    std::string id;
    int year = 0;
    std::string path;
};

/// Reads a `id,year,path` CSV manifest. Fields are plain (no quoting).
inline std::vector<ManifestRow> read_manifest(std::istream& in, const std::string& name = "manifest") {
    std::vector<ManifestRow> rows;
    std::string raw;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::unordered_set<std::string> ids;

    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = detail::trim_cr(raw);
        if (detail::is_blank(line)) continue;
        const auto fields = detail::split(line, ',');
        if (!header_seen) {
            if (fields.size() != 3 || fields[0] != "id" || fields[1] != "year" || fields[2] != "path")
                throw LoadError(name + " line " + std::to_string(line_no) + ": expected header 'id,year,path'");
            header_seen = true;
            continue;
        }
        const auto where = name + " line " + std::to_string(line_no);
        if (fields.size() != 3) throw LoadError(where + ": expected 3 fields, got " + std::to_string(fields.size()));
        ManifestRow row;
        row.line = line_no;
        row.id = std::string(fields[0]);
        row.path = std::string(fields[2]);
        if (row.id.empty()) throw LoadError(where + ": empty id");
        const auto year_text = fields[1];
        const auto [ptr, ec] = std::from_chars(year_text.data(), year_text.data() + year_text.size(), row.year);
        if (ec != std::errc{} || ptr != year_text.data() + year_text.size() || row.year <= 0)
            throw LoadError(where + " (id '" + row.id + "'): unparsable year '" + std::string(year_text) + "'");
        if (!ids.insert(row.id).second) throw LoadError(where + ": duplicate id '" + row.id + "'");
        rows.push_back(std::move(row));
    }
    return rows;
}

/// One document per manifest row, in manifest order. Relative paths resolve
/// against `data_dir`. Files are parsed concurrently.
inline std::vector<SourceDocument> load_corpus(const std::filesystem::path& manifest,
                                               const std::filesystem::path& data_dir,
                                               const VerticalOptions& opts = {}) {
    std::ifstream in(manifest);
    if (!in) throw LoadError("cannot open manifest " + manifest.string());
    const auto rows = read_manifest(in, manifest.string());

    std::vector<std::filesystem::path> paths;
    paths.reserve(rows.size());
    for (const auto& row : rows) {
        std::filesystem::path p(row.path);
        if (p.is_relative()) p = data_dir / p;
        if (!std::filesystem::is_regular_file(p))
            throw LoadError(manifest.string() + " line " + std::to_string(row.line) + " (id '" + row.id +
                            "'): file not found: " + p.string());
        paths.push_back(std::move(p));
    }

    std::vector<std::future<std::vector<Sentence>>> parsed;
    parsed.reserve(rows.size());
    for (const auto& p : paths)
        parsed.push_back(std::async(std::launch::async, [&p, &opts] { return read_vertical_file(p, opts); }));

    std::vector<SourceDocument> docs;
    docs.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto where = manifest.string() + " line " + std::to_string(rows[i].line) + " (id '" + rows[i].id + "')";
        std::vector<Sentence> sentences;
        try {
            sentences = parsed[i].get();
        } catch (const Error& e) {
            throw LoadError(where + ": " + e.what());
        }
        if (sentences.empty()) throw LoadError(where + ": document has no tokens");
        docs.push_back(SourceDocument{rows[i].id, rows[i].year, std::move(sentences)});
    }
    return docs;
}

// ---------------------------------------------------------------------------
// Time binning

struct YearRange {
    int first = 0;
    int last = 0; // inclusive

    bool contains(int year) const noexcept { return year >= first && year <= last; }
    friend bool operator==(const YearRange&, const YearRange&) = default;
};

enum class BinningScheme { century, fixed_width, custom };

/// Century c covers [100(c-1)+1, 100c].
constexpr int century_of(int year) noexcept { return (year - 1) / 100 + 1; }

inline std::string ordinal(int n) {
    const int mod100 = n % 100;
    const char* suffix = "th";
    if (mod100 < 11 || mod100 > 13) {
        switch (n % 10) {
        case 1: suffix = "st"; break;
        case 2: suffix = "nd"; break;
        case 3: suffix = "rd"; break;
        default: break;
        }
    }
    return std::to_string(n) + suffix;
}

/// Partition of a contiguous year range into disjoint bins. Bin 0 is the
/// earliest period.
class TimeBinning {
public:
    /// Centuries first_century..last_century inclusive, labelled "16th" etc.
    static TimeBinning century(int first_century, int last_century) {
        if (first_century < 1 || last_century < first_century)
            throw ConfigError("invalid century range " + std::to_string(first_century) + ".." +
                              std::to_string(last_century));
        std::vector<YearRange> bins;
        std::vector<std::string> labels;
        for (int c = first_century; c <= last_century; ++c) {
            bins.push_back({100 * (c - 1) + 1, 100 * c});
            labels.push_back(ordinal(c));
        }
        return TimeBinning(BinningScheme::century, std::move(bins), std::move(labels));
    }

    /// Bins [origin, origin+width-1], ... until `last_year` is covered.
    static TimeBinning fixed_width(int width, int origin, int last_year) {
        if (width < 1) throw ConfigError("bin width must be >= 1");
        if (origin < 1 || last_year < origin)
            throw ConfigError("invalid fixed-width range starting at " + std::to_string(origin));
        std::vector<YearRange> bins;
        for (int start = origin; start <= last_year; start += width) bins.push_back({start, start + width - 1});
        return TimeBinning(BinningScheme::fixed_width, bins, range_labels(bins));
    }

    /// n+1 ascending edges give n bins [e_i, e_{i+1}-1].
    static TimeBinning custom(const std::vector<int>& edges) {
        if (edges.size() < 2) throw ConfigError("custom binning needs at least two edges");
        std::vector<YearRange> bins;
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            if (edges[i + 1] <= edges[i]) throw ConfigError("custom binning edges must be strictly ascending");
            bins.push_back({edges[i], edges[i + 1] - 1});
        }
        if (bins.front().first < 1) throw ConfigError("years must be positive");
        return TimeBinning(BinningScheme::custom, bins, range_labels(bins));
    }

    /// Rebuild from explicit bins and labels (used when loading models).
    static TimeBinning from_bins(BinningScheme scheme, std::vector<YearRange> bins, std::vector<std::string> labels) {
        if (bins.empty() || bins.size() != labels.size())
            throw ConfigError("binning needs one label per bin and at least one bin");
        for (std::size_t i = 0; i < bins.size(); ++i) {
            if (bins[i].last < bins[i].first) throw ConfigError("empty bin");
            if (i > 0 && bins[i].first != bins[i - 1].last + 1) throw ConfigError("bins must be contiguous");
        }
        return TimeBinning(scheme, std::move(bins), std::move(labels));
    }

    BinningScheme scheme() const noexcept { return scheme_; }
    std::size_t size() const noexcept { return bins_.size(); }
    const std::vector<YearRange>& bins() const noexcept { return bins_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::string& label(std::size_t i) const { return labels_.at(i); }
    int first_year() const noexcept { return bins_.front().first; }
    int last_year() const noexcept { return bins_.back().last; }

    std::size_t assign(int year) const {
        if (year < first_year() || year > last_year())
            throw RangeError("year " + std::to_string(year) + " outside binning range [" +
                             std::to_string(first_year()) + ", " + std::to_string(last_year()) + "]");
        const auto it = std::partition_point(bins_.begin(), bins_.end(),
                                             [year](const YearRange& r) { return r.last < year; });
        return static_cast<std::size_t>(it - bins_.begin());
    }

private:
    TimeBinning(BinningScheme scheme, std::vector<YearRange> bins, std::vector<std::string> labels)
        : scheme_(scheme), bins_(std::move(bins)), labels_(std::move(labels)) {}

    static std::vector<std::string> range_labels(const std::vector<YearRange>& bins) {
        std::vector<std::string> labels;
        for (const auto& b : bins) labels.push_back(std::to_string(b.first) + "-" + std::to_string(b.last));
        return labels;
    }

    BinningScheme scheme_;
    std::vector<YearRange> bins_;
    std::vector<std::string> labels_;
};

inline std::size_t assign_class(int year, const TimeBinning& binning) { return binning.assign(year); }

// ---------------------------------------------------------------------------
// Pools

struct PooledSentence {
    const Sentence* sentence = nullptr;
    const std::string* source_id = nullptr;
};

/// Sentences grouped by class. Borrows from the documents it was built
/// from; those must outlive the pool.
class LabeledPool {
public:
    explicit LabeledPool(std::size_t n_classes) : pools_(n_classes), tokens_(n_classes, 0) {}

    std::size_t n_classes() const noexcept { return pools_.size(); }
    std::span<const PooledSentence> sentences(std::size_t cls) const { return pools_.at(cls); }
    std::size_t token_count(std::size_t cls) const { return tokens_.at(cls); }

    std::size_t sentence_count() const noexcept {
        std::size_t n = 0;
        for (const auto& p : pools_) n += p.size();
        return n;
    }

    std::size_t longest_sentence(std::size_t cls) const {
        std::size_t m = 0;
        for (const auto& ps : pools_.at(cls)) m = std::max(m, ps.sentence->size());
        return m;
    }

    void add(std::size_t cls, const Sentence& s, const std::string& source_id) {
        pools_.at(cls).push_back({&s, &source_id});
        tokens_[cls] += s.size();
    }

private:
    std::vector<std::vector<PooledSentence>> pools_;
    std::vector<std::size_t> tokens_;
};

inline LabeledPool pool_by_class(std::span<const SourceDocument> docs, const TimeBinning& binning) {
    LabeledPool pool(binning.size());
    for (const auto& doc : docs) {
        std::size_t cls = 0;
        try {
            cls = binning.assign(doc.year);
        } catch (const RangeError& e) {
            throw RangeError("document '" + doc.id + "': " + e.what());
        }
        for (const auto& s : doc.sentences) pool.add(cls, s, doc.id);
    }
    return pool;
}

} // namespace tempora

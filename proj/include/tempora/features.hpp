#pragma once

// Word and POS n-gram features: extraction, vocabularies, sparse vectors.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tempora/corpus.hpp"
#include "tempora/error.hpp"

namespace tempora {

enum class Channel : std::uint8_t { word, pos };

inline std::string_view to_string(Channel c) { return c == Channel::word ? "word" : "pos"; }

struct NgramKey {
    Channel channel = Channel::word;
    int order = 1;
    std::vector<std::string> items;

    friend auto operator<=>(const NgramKey&, const NgramKey&) = default;
    friend bool operator==(const NgramKey&, const NgramKey&) = default;
};

/// Space-joined items, e.g. "V V V".
inline std::string join_items(const NgramKey& key) {
    std::string s;
    for (const auto& it : key.items) {
        if (!s.empty()) s += ' ';
        s += it;
    }
    return s;
}

struct FeatureSpec {
    Channel channel = Channel::word;
    int order = 1;

    friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

inline std::string to_string(const FeatureSpec& f) { return std::string(to_string(f.channel)) + std::to_string(f.order); }

enum class Weighting : std::uint8_t { raw_count, l2_normalized };

struct FeaturizerConfig {
    std::vector<FeatureSpec> specs{{Channel::word, 1}};
    std::size_t min_doc_freq = 1;
    Weighting weighting = Weighting::raw_count;

    void validate() const {
        if (specs.empty()) throw ConfigError("feature set is empty");
        for (std::size_t i = 0; i < specs.size(); ++i) {
            if (specs[i].order < 1 || specs[i].order > 3)
                throw ConfigError("n-gram order must be in [1,3], got " + std::to_string(specs[i].order));
            for (std::size_t j = 0; j < i; ++j)
                if (specs[j] == specs[i]) throw ConfigError("duplicate feature spec " + to_string(specs[i]));
        }
        if (min_doc_freq < 1) throw ConfigError("min_doc_freq must be >= 1");
    }

    friend bool operator==(const FeaturizerConfig&, const FeaturizerConfig&) = default;
};

/// Parses "word1", "pos3", "word1+pos1" (also comma-separated).
inline std::vector<FeatureSpec> parse_feature_specs(std::string_view text) {
    std::vector<FeatureSpec> specs;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find_first_of("+,", start);
        if (end == std::string_view::npos) end = text.size();
        const auto item = text.substr(start, end - start);
        FeatureSpec spec;
        std::string_view rest;
        if (item.starts_with("word")) {
            spec.channel = Channel::word;
            rest = item.substr(4);
        } else if (item.starts_with("pos")) {
            spec.channel = Channel::pos;
            rest = item.substr(3);
        } else {
            throw ConfigError("unknown feature channel in '" + std::string(item) + "' (expected word<N> or pos<N>)");
        }
        if (rest.size() != 1 || rest[0] < '1' || rest[0] > '3')
            throw ConfigError("feature '" + std::string(item) + "' needs an order 1, 2 or 3");
        spec.order = rest[0] - '0';
        specs.push_back(spec);
        start = end + 1;
    }
    return specs;
}

inline std::string format_feature_specs(const std::vector<FeatureSpec>& specs) {
    std::string s;
    for (const auto& f : specs) {
        if (!s.empty()) s += '+';
        s += to_string(f);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Lowercasing. Covers ASCII, Latin-1 Supplement and Latin Extended-A, which
// is what European historical orthography needs; other code points pass
// through unchanged. Fixed tables keep results independent of the C locale.

namespace detail {

inline char32_t lower_code_point(char32_t c) {
    if (c >= U'A' && c <= U'Z') return c + 0x20;
    if (c < 0xC0) return c;
    if (c <= 0xDE) return c == 0xD7 ? c : c + 0x20;
    if (c >= 0x100 && c <= 0x137) return (c % 2 == 0) ? c + 1 : c;
    if (c >= 0x139 && c <= 0x148) return (c % 2 == 1) ? c + 1 : c;
    if (c >= 0x14A && c <= 0x177) return (c % 2 == 0) ? c + 1 : c;
    if (c == 0x178) return 0xFF;
    if (c >= 0x179 && c <= 0x17E) return (c % 2 == 1) ? c + 1 : c;
    return c;
}

inline void append_utf8(std::string& out, char32_t c) {
    if (c < 0x80) {
        out += static_cast<char>(c);
    } else if (c < 0x800) {
        out += static_cast<char>(0xC0 | (c >> 6));
        out += static_cast<char>(0x80 | (c & 0x3F));
    } else if (c < 0x10000) {
        out += static_cast<char>(0xE0 | (c >> 12));
        out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (c & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (c >> 18));
        out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (c & 0x3F));
    }
}

} // namespace detail

/// Lowercases a UTF-8 string. Invalid sequences are copied byte for byte.
inline std::string lowercase(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        if (b0 < 0x80) {
            out += (b0 >= 'A' && b0 <= 'Z') ? static_cast<char>(b0 + 0x20) : static_cast<char>(b0);
            ++i;
            continue;
        }
        // Only 2-byte sequences can fall in the mapped ranges.
        if ((b0 & 0xE0) == 0xC0 && i + 1 < s.size() && (static_cast<unsigned char>(s[i + 1]) & 0xC0) == 0x80) {
            const char32_t cp = ((b0 & 0x1F) << 6) | (static_cast<unsigned char>(s[i + 1]) & 0x3F);
            detail::append_utf8(out, detail::lower_code_point(cp));
            i += 2;
            continue;
        }
        out += s[i++];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Extraction

/// A document for feature purposes is its sentence sequence.
using DocumentView = std::span<const Sentence>;

namespace detail {

constexpr char kItemSep = '\x1f';

inline std::string encode_key(Channel channel, int order, std::span<const std::string> items) {
    std::string k;
    k += channel == Channel::word ? 'w' : 'p';
    k += static_cast<char>('0' + order);
    for (const auto& it : items) {
        k += kItemSep;
        k += it;
    }
    return k;
}

inline std::string encode_key(const NgramKey& key) { return encode_key(key.channel, key.order, key.items); }

inline NgramKey decode_key(std::string_view k) {
    NgramKey key;
    key.channel = k[0] == 'w' ? Channel::word : Channel::pos;
    key.order = k[1] - '0';
    std::size_t pos = 2;
    while (pos < k.size()) {
        const auto next = k.find(kItemSep, pos + 1);
        const auto end = next == std::string_view::npos ? k.size() : next;
        key.items.emplace_back(k.substr(pos + 1, end - pos - 1));
        pos = end;
    }
    return key;
}

/// Calls fn(encoded_key) for every n-gram occurrence, sentence by sentence,
/// in text order. N-grams never span two sentences.
template <typename Fn>
void for_each_ngram(DocumentView doc, Channel channel, int order, Fn&& fn) {
    std::vector<std::string> symbols;
    for (const auto& sentence : doc) {
        const auto len = sentence.size();
        if (len < static_cast<std::size_t>(order)) continue;
        symbols.clear();
        for (const auto& t : sentence.tokens) symbols.push_back(channel == Channel::word ? lowercase(t.form) : t.pos);
        for (std::size_t i = 0; i + order <= len; ++i)
            fn(encode_key(channel, order, std::span<const std::string>(symbols).subspan(i, order)));
    }
}

} // namespace detail

inline std::map<NgramKey, std::size_t> extract_ngrams(DocumentView doc, Channel channel, int order) {
    if (order < 1 || order > 3) throw ConfigError("n-gram order must be in [1,3]");
    std::unordered_map<std::string, std::size_t> counts;
    detail::for_each_ngram(doc, channel, order, [&](std::string&& k) { ++counts[std::move(k)]; });
    std::map<NgramKey, std::size_t> out;
    for (auto& [k, n] : counts) out.emplace(detail::decode_key(k), n);
    return out;
}

// ---------------------------------------------------------------------------
// Sparse vectors

struct SparseEntry {
    std::uint32_t index = 0;
    double value = 0.0;

    friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Sorted (index, value) pairs with strictly increasing indices.
struct SparseVector {
    std::vector<SparseEntry> entries;

    std::size_t size() const noexcept { return entries.size(); }
    bool empty() const noexcept { return entries.empty(); }
    auto begin() const noexcept { return entries.begin(); }
    auto end() const noexcept { return entries.end(); }

    double squared_norm() const noexcept {
        double s = 0.0;
        for (const auto& e : entries) s += e.value * e.value;
        return s;
    }

    double dot(std::span<const double> dense) const noexcept {
        double s = 0.0;
        for (const auto& e : entries) s += e.value * dense[e.index];
        return s;
    }

    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

// ---------------------------------------------------------------------------
// Vocabulary

class Vocabulary;
inline Vocabulary build_vocabulary(std::span<const DocumentView> train_docs, const FeaturizerConfig& config);

/// Bijection between n-gram keys and [0, size). Features of the first spec
/// come first, then the second spec's, and so on; within a spec, indices
/// follow first occurrence in the training documents.
class Vocabulary {
public:
    Vocabulary() = default;

    Vocabulary(FeaturizerConfig config, std::vector<NgramKey> keys) : config_(std::move(config)) {
        config_.validate();
        for (auto& k : keys) add(std::move(k));
    }

    const FeaturizerConfig& config() const noexcept { return config_; }
    std::size_t size() const noexcept { return keys_.size(); }
    const NgramKey& key(std::size_t i) const { return keys_.at(i); }
    const std::vector<NgramKey>& keys() const noexcept { return keys_; }

    std::optional<std::uint32_t> find(const NgramKey& key) const { return find_encoded(detail::encode_key(key)); }

    std::optional<std::uint32_t> find_encoded(const std::string& encoded) const {
        const auto it = index_.find(encoded);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

private:
    friend Vocabulary build_vocabulary(std::span<const DocumentView> train_docs, const FeaturizerConfig& config);

    void add(NgramKey key) {
        auto enc = detail::encode_key(key);
        const auto idx = static_cast<std::uint32_t>(keys_.size());
        if (!index_.emplace(std::move(enc), idx).second) throw ConfigError("duplicate vocabulary key");
        keys_.push_back(std::move(key));
    }

    FeaturizerConfig config_;
    std::vector<NgramKey> keys_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

inline Vocabulary build_vocabulary(std::span<const DocumentView> train_docs, const FeaturizerConfig& config) {
    config.validate();
    if (train_docs.empty()) throw ConfigError("cannot build a vocabulary from an empty training set");

    Vocabulary vocab;
    vocab.config_ = config;
    for (const auto& spec : config.specs) {
        struct Seen {
            std::size_t doc_freq = 0;
            std::size_t last_doc = 0;
        };
        std::unordered_map<std::string, Seen> seen;
        std::vector<std::string> order;
        for (std::size_t d = 0; d < train_docs.size(); ++d) {
            detail::for_each_ngram(train_docs[d], spec.channel, spec.order, [&](std::string&& k) {
                auto [it, inserted] = seen.try_emplace(k);
                if (inserted) order.push_back(std::move(k));
                if (inserted || it->second.last_doc != d + 1) {
                    ++it->second.doc_freq;
                    it->second.last_doc = d + 1;
                }
            });
        }
        for (const auto& k : order)
            if (seen[k].doc_freq >= config.min_doc_freq) vocab.add(detail::decode_key(k));
    }
    return vocab;
}

/// Counts of the document's n-grams that are in the vocabulary, optionally
/// L2-normalized. Out-of-vocabulary n-grams are dropped.
inline SparseVector vectorize(DocumentView doc, const Vocabulary& vocab) {
    std::unordered_map<std::uint32_t, double> counts;
    for (const auto& spec : vocab.config().specs)
        detail::for_each_ngram(doc, spec.channel, spec.order, [&](std::string&& k) {
            if (const auto idx = vocab.find_encoded(k)) counts[*idx] += 1.0;
        });
    SparseVector v;
    v.entries.reserve(counts.size());
    for (const auto& [i, c] : counts) v.entries.push_back({i, c});
    std::sort(v.entries.begin(), v.entries.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    if (vocab.config().weighting == Weighting::l2_normalized && !v.empty()) {
        const double norm = std::sqrt(v.squared_norm());
        for (auto& e : v.entries) e.value /= norm;
    }
    return v;
}

} // namespace tempora

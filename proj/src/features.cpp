#include "revex/features.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace revex {

std::optional<std::uint32_t> Vocabulary::find(const std::string& token) const {
    auto it = index.find(token);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

double FeatureVector::value_at(std::uint32_t idx) const {
    auto it = std::lower_bound(values.begin(), values.end(), idx,
                               [](const auto& pair, std::uint32_t i) {
                                   return pair.first < i;
                               });
    if (it == values.end() || it->first != idx) return 0.0;
    return it->second;
}

Vocabulary build_vocabulary(const std::vector<const Document*>& training_docs,
                            std::size_t max_features) {
    if (training_docs.empty()) {
        throw std::invalid_argument("build_vocabulary: no training documents");
    }
    // Document frequency per token.
    std::unordered_map<std::string, std::size_t> df;
    for (const auto* doc : training_docs) {
        std::unordered_set<std::string_view> seen;
        seen.reserve(doc->tokens.size());
        for (const auto& token : doc->tokens) {
            if (seen.insert(token).second) ++df[token];
        }
    }
    if (df.empty()) {
        throw std::runtime_error("build_vocabulary: empty token universe");
    }

    std::vector<std::pair<std::string, std::size_t>> ranked;
    ranked.reserve(df.size());
    for (auto& [token, count] : df) ranked.emplace_back(token, count);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > max_features) ranked.resize(max_features);

    Vocabulary vocab;
    vocab.tokens.reserve(ranked.size());
    vocab.index.reserve(ranked.size());
    for (auto& [token, count] : ranked) {
        vocab.index.emplace(token, static_cast<std::uint32_t>(vocab.tokens.size()));
        vocab.tokens.push_back(std::move(token));
    }
    return vocab;
}

namespace {

FeatureVector from_counts(std::unordered_map<std::uint32_t, std::uint32_t>& counts,
                          std::size_t total_tokens) {
    FeatureVector v;
    v.source_token_count = total_tokens;
    if (total_tokens == 0) return v;
    v.values.reserve(counts.size());
    for (const auto& [idx, count] : counts) {
        v.values.emplace_back(idx, static_cast<double>(count) /
                                       static_cast<double>(total_tokens));
    }
    std::sort(v.values.begin(), v.values.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return v;
}

}  // namespace

FeatureVector vectorize(std::span<const std::string> tokens, const Vocabulary& vocab) {
    std::unordered_map<std::uint32_t, std::uint32_t> counts;
    for (const auto& token : tokens) {
        auto it = vocab.index.find(token);
        if (it != vocab.index.end()) ++counts[it->second];
    }
    return from_counts(counts, tokens.size());
}

FeatureVector vectorize_complement(const Document& doc, TokenSpan removed,
                                   const Vocabulary& vocab) {
    if (removed.start >= removed.end || removed.end > doc.tokens.size()) {
        throw std::invalid_argument("vectorize_complement: span out of bounds");
    }
    std::unordered_map<std::uint32_t, std::uint32_t> counts;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
        if (i >= removed.start && i < removed.end) continue;
        ++kept;
        auto it = vocab.index.find(doc.tokens[i]);
        if (it != vocab.index.end()) ++counts[it->second];
    }
    return from_counts(counts, kept);
}

}  // namespace revex

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "revex/corpus.hpp"

namespace revex {

// Token -> contiguous feature index, capped at max_features. Tokens are
// ranked by document frequency, ties broken lexicographically.
struct Vocabulary {
    std::vector<std::string> tokens;
    std::unordered_map<std::string, std::uint32_t> index;

    std::size_t size() const { return tokens.size(); }
    std::optional<std::uint32_t> find(const std::string& token) const;
};

// Sparse normalized-frequency vector. Stored values are strictly positive
// and each equals count(token) / source_token_count, where the denominator
// counts every token including out-of-vocabulary ones.
struct FeatureVector {
    std::vector<std::pair<std::uint32_t, double>> values;  // sorted by index
    std::size_t source_token_count = 0;

    double value_at(std::uint32_t index) const;
};

Vocabulary build_vocabulary(const std::vector<const Document*>& training_docs,
                            std::size_t max_features);

FeatureVector vectorize(std::span<const std::string> tokens, const Vocabulary& vocab);

// Vector of the document with token positions [removed.start, removed.end)
// deleted; exactly vectorize() of the remaining tokens.
FeatureVector vectorize_complement(const Document& doc, TokenSpan removed,
                                   const Vocabulary& vocab);

}  // namespace revex

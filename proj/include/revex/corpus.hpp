#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace revex {

enum class Label { Responsive, NotResponsive, Unlabeled };

const char* label_name(Label label);
std::optional<Label> label_from_name(const std::string& name);

// Token index range, end exclusive.
struct TokenSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - start; }
    bool operator==(const TokenSpan&) const = default;
};

// One reviewable document. tokens is always tokenize(raw_text); rationale
// spans are token ranges and only appear on responsive documents.
struct Document {
    std::string id;
    std::string raw_text;
    std::vector<std::string> tokens;
    Label label = Label::Unlabeled;
    std::vector<TokenSpan> rationale_spans;
};

struct Corpus {
    std::vector<Document> documents;
    std::string source_path;

    const Document* find(const std::string& id) const;
};

// document id -> fold index in [0, k)
struct FoldAssignment {
    std::unordered_map<std::string, int> fold_of;
    int k = 0;
    std::uint64_t seed = 0;
};

// Lowercase word tokens: maximal runs of ASCII alphanumerics. Everything
// else splits; empty fragments are dropped, digits are kept. All span and
// window arithmetic downstream counts these tokens, so the rule is fixed.
std::vector<std::string> tokenize(const std::string& text);

// Byte range of each token inside the original text, parallel to tokenize().
struct TokenOffset {
    std::size_t begin = 0;
    std::size_t end = 0;
};
std::vector<TokenOffset> token_offsets(const std::string& text);

std::string join_tokens(const std::vector<std::string>& tokens,
                        std::size_t start, std::size_t end);

// Span of the first exact contiguous token-subsequence match of
// rationale_text inside doc_tokens; nullopt when absent.
std::optional<TokenSpan> locate_rationale(const std::vector<std::string>& doc_tokens,
                                          const std::string& rationale_text);

struct IngestSummary {
    std::size_t documents = 0;
    std::size_t responsive = 0;
    std::size_t not_responsive = 0;
    std::size_t unlabeled = 0;
    std::size_t rationales_located = 0;
    std::size_t rationales_unlocated = 0;
    std::size_t spans_dropped = 0;        // removed by the length filter
    std::size_t annotated_documents = 0;  // responsive docs with >= 1 kept span
};

// Drops rationale spans shorter than min_len or longer than max_len tokens.
// Documents themselves are all retained; only spans go away.
Corpus filter_annotated(const Corpus& corpus, std::size_t min_len = 10,
                        std::size_t max_len = 249, IngestSummary* summary = nullptr);

// Stratified k-fold assignment, deterministic per seed. Every label class
// present in the corpus must have at least k documents.
FoldAssignment make_folds(const Corpus& corpus, int k, std::uint64_t seed);
FoldAssignment make_folds(const std::vector<const Document*>& docs, int k,
                          std::uint64_t seed);

// JSON-lines corpus file, one object per document:
//   {"id": ..., "text": ..., "label": "responsive"|"not_responsive"|null,
//    "rationales": [string, ...], "rationale_spans": [[start,end], ...]}
// Explicit spans win over rationale strings when both are present.
Corpus load_corpus_jsonl(const std::string& path, IngestSummary* summary = nullptr);
void save_corpus_jsonl(const Corpus& corpus, const std::string& path);

}  // namespace revex

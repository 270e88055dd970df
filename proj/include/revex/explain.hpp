#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "revex/corpus.hpp"
#include "revex/features.hpp"
#include "revex/model.hpp"

namespace revex {

// One candidate rationale: a token window of up to `window` tokens. Shorter
// only for documents shorter than the window or for the final window
// truncated at document end.
struct Snippet {
    TokenSpan span;
    std::size_t window = 0;
};

// Positive-weight tokens with the highest model weights, capped at top_n.
struct KeywordLexicon {
    std::vector<std::pair<std::string, double>> entries;  // weight descending
    std::unordered_map<std::string, double> weight_of;
    std::size_t top_n = 100;
    double min_weight = 0.0;

    bool contains(const std::string& token) const {
        return weight_of.count(token) != 0;
    }
};

enum class FusionMode { ScoreBased, RankBased };

struct FusionConfig {
    double snippet_weight = 0.7;
    double complement_weight = 0.2;
    double token_weight = 0.1;
    FusionMode mode = FusionMode::ScoreBased;
    int rrf_k = 60;
};

// A snippet with its three component scores, per-component ranks within its
// document (1 = best, ties broken by earlier span start), and fused score.
struct ScoredSnippet {
    Snippet snippet;
    double snippet_score = 0.0;
    double complement_score = 0.0;
    double token_score = 0.0;
    int snippet_rank = 0;
    int complement_rank = 0;
    int token_rank = 0;
    double fused_score = 0.0;
};

enum class Method { Snippet, Complement, Keyword, ScoreFusion, RankFusion };

const char* method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

// Overlapping windows at starts 0, n/2, n, ...; window i covers
// [i*n/2, min(i*n/2 + n, token_count)). Interior neighbors share exactly
// n/2 tokens and every token is covered.
std::vector<Snippet> generate_snippets(std::size_t token_count, std::size_t window);

// The snippet treated as a standalone document under the document model.
double snippet_score(const LinearModel& model, std::span<const std::string> snippet_tokens);

// Normalized score reduction from removing the snippet: 0 when removal
// raises the score, else (ds_full - ds_removed) / ds_full.
double complement_reduction(double ds_full, double ds_removed);
double complement_score(const LinearModel& model, const Document& doc, TokenSpan snippet);

KeywordLexicon build_keyword_lexicon(const LinearModel& model, std::size_t top_n = 100,
                                     double min_weight = 0.0);

// weight(t) * value(t) with the document-level value; 0 when the token is
// missing from the lexicon or the document.
double cscore(const std::string& token, const KeywordLexicon& lexicon,
              const FeatureVector& doc_vector, const Vocabulary& vocab);

// Share of the document's keyword contribution hit by the snippet: the sum
// of cscores over distinct lexicon tokens occurring inside the snippet,
// divided by the same sum over the whole document; 0 when the document has
// no keyword evidence at all.
double snippet_token_score(std::span<const std::string> doc_tokens, TokenSpan snippet,
                           const KeywordLexicon& lexicon);

// Reciprocal-rank score 1 / (k + rank), rank >= 1.
double rrf_score(int rank, int k = 60);

double fuse(const ScoredSnippet& s, const FusionConfig& config);

// Index order of snippets under the given method, best first; ties broken
// by earlier span start. Fusion methods use config's weights with the mode
// forced by the method.
std::vector<std::size_t> order_snippets(const std::vector<ScoredSnippet>& scored,
                                        Method method, const FusionConfig& config);

struct TopK {
    std::size_t k = 1;
};
struct Threshold {
    double theta = 0.0;
};
using SelectionPolicy = std::variant<TopK, Threshold>;

// TopK: the K highest fused scores (clamped to the list size);
// Threshold: every snippet with fused_score > theta, possibly empty.
std::vector<ScoredSnippet> select_rationales(const std::vector<ScoredSnippet>& scored,
                                             const SelectionPolicy& policy);

// Greedy minimal token set whose deletion (all occurrences, renormalized)
// flips the classification below 0.5. Candidates are the document's
// positive-weight tokens in descending contribution order. Returns an empty
// set when the document is already below 0.5 and nullopt when exhausting
// every candidate never flips the class.
std::optional<std::vector<std::string>> minimal_flip_set(const LinearModel& model,
                                                         const Document& doc);

struct KeywordContribution {
    std::string token;
    double weight = 0.0;
    double cscore = 0.0;
};

struct ExplanationReport {
    std::string doc_id;
    double doc_score = 0.0;
    bool classified_responsive = false;
    std::vector<ScoredSnippet> snippets;        // ordering method, best first
    std::vector<KeywordContribution> keywords;  // cscore descending
    std::optional<std::vector<std::string>> flip_set;  // nullopt = not flippable
};

struct ExplainConfig {
    std::size_t keyword_top_n = 100;
    double keyword_min_weight = 0.0;
    FusionConfig fusion;
};

// Binds a trained model to its keyword lexicon and fusion config. All
// scoring is pure; one Explainer may serve any number of threads, each
// explaining its own documents.
class Explainer {
public:
    Explainer(const LinearModel& model, const ExplainConfig& config);

    const KeywordLexicon& lexicon() const { return lexicon_; }
    const FusionConfig& fusion() const { return fusion_; }

    // All three component scores, ranks, and fused score for every window
    // of the document.
    std::vector<ScoredSnippet> score_snippets(const Document& doc,
                                              std::size_t window) const;

    ExplanationReport explain(const Document& doc, std::size_t window, double cutoff,
                              Method ordering = Method::ScoreFusion) const;

private:
    const LinearModel& model_;
    KeywordLexicon lexicon_;
    FusionConfig fusion_;
};

}  // namespace revex

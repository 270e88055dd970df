#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "revex/corpus.hpp"
#include "revex/explain.hpp"
#include "revex/model.hpp"

namespace revex {

// Overlap criterion for counting a snippet as a true rationale. MinHalf
// requires overlap > min(n, m)/2 tokens, MaxHalf overlap > max(n, m)/2,
// where n is the snippet length and m the annotated rationale length.
enum class MatchMode { MinHalf, MaxHalf };

const char* match_mode_name(MatchMode mode);

bool is_true_rationale(TokenSpan snippet, TokenSpan rationale, MatchMode mode);

// Fraction of documents whose top-K selected spans contain a true rationale
// for at least one annotated span. Every document must carry >= 1 annotation.
double rationale_recall(const std::vector<std::vector<TokenSpan>>& selected_per_doc,
                        const std::vector<std::vector<TokenSpan>>& annotations_per_doc,
                        std::size_t k, MatchMode mode);

// |A intersect B| / |A union B|; 1 when both sets are empty.
double jaccard(const std::unordered_set<std::string>& a,
               const std::unordered_set<std::string>& b);

enum class Population { Cutoff75, All };

const char* population_name(Population p);

struct RecallCell {
    std::size_t snippet_size = 0;
    std::size_t k = 0;
    Method method = Method::Snippet;
    Population population = Population::All;
    double recall = 0.0;          // mean of per-fold recalls
    std::size_t numerator = 0;    // pooled successes across folds
    std::size_t denominator = 0;  // pooled evaluated documents
};

struct JaccardCell {
    std::size_t snippet_size = 0;
    std::size_t k = 0;
    Method method_a = Method::Snippet;
    Method method_b = Method::Complement;
    double value = 0.0;
};

struct FoldInfo {
    int fold = 0;
    double cutoff = 0.0;
    std::size_t heldout_documents = 0;
    std::size_t heldout_responsive = 0;
    std::size_t annotated = 0;
    std::size_t annotated_above_cutoff = 0;
    double heldout_accuracy = 0.0;  // at the 0.5 probability threshold
};

struct ExperimentConfig {
    std::vector<std::size_t> snippet_sizes{50, 100, 200};
    std::size_t top_k = 5;
    int folds = 5;
    std::uint64_t seed = 0;
    double target_recall = 0.75;
    MatchMode match_mode = MatchMode::MinHalf;
    FusionConfig fusion;
    std::size_t vocab_cap = 20000;
    std::size_t keyword_top_n = 100;
    TrainConfig train;
    bool grid_search = false;
    double grid_step = 0.1;
    std::size_t grid_objective_k = 1;
    std::size_t grid_objective_size = 50;
    FusionMode grid_objective_mode = FusionMode::ScoreBased;
};

struct GridOutcome {
    bool enabled = false;
    double snippet_weight = 0.0;
    double complement_weight = 0.0;
    double token_weight = 0.0;
    double objective_recall = 0.0;
};

struct ExperimentResult {
    std::vector<RecallCell> recall;
    std::vector<JaccardCell> jaccard;
    std::vector<FoldInfo> folds;
    std::vector<LinearModel> fold_models;
    GridOutcome grid;
    ExperimentConfig config;

    const RecallCell* find(std::size_t snippet_size, std::size_t k, Method method,
                           Population population) const;
};

// The full cross-validation protocol: per fold, train on the other folds,
// score the held-out fold, fix the recall cutoff on held-out responsive
// scores, then run all five rationale-detection methods over each snippet
// size and accumulate recall@1..top_k for both populations. Jaccard cells
// compare success sets of the three individual methods on the cutoff
// population, pooled across folds.
ExperimentResult run_experiment(const Corpus& corpus, const ExperimentConfig& config);

struct WeightTriple {
    double snippet_weight = 0.0;
    double complement_weight = 0.0;
    double token_weight = 0.0;
};

// All nonnegative weight triples summing to 1 on the step lattice,
// enumerated with w1 descending, then w2 descending.
std::vector<WeightTriple> simplex_lattice(double step);

struct GridObjective {
    std::size_t k = 1;
    MatchMode match_mode = MatchMode::MinHalf;
    FusionMode fusion_mode = FusionMode::ScoreBased;
    int rrf_k = 60;
};

// Component scores plus annotations for one validation document.
struct DocComponentScores {
    std::vector<ScoredSnippet> snippets;
    std::vector<TokenSpan> annotations;
};

// Argmax of fused recall@k over the simplex lattice; ties broken by larger
// w1, then larger w2.
WeightTriple grid_search_weights(const std::vector<DocComponentScores>& validation,
                                 const GridObjective& objective, double grid_step = 0.1);

struct RescueRule {
    enum class Kind { Threshold, TopM };
    Kind kind = Kind::Threshold;
    double theta = 0.8;
    std::size_t m = 0;
};

struct RescueCandidate {
    std::string doc_id;
    double doc_score = 0.0;
    TokenSpan best_span;
    double best_snippet_score = 0.0;
};

// Documents scored below the cutoff whose best snippet score passes the
// rule, sorted by best snippet score descending. These are the likely
// false negatives: buried responsive passages in low-scoring documents.
std::vector<RescueCandidate> rescue_false_negatives(const LinearModel& model,
                                                    const std::vector<const Document*>& docs,
                                                    double cutoff, std::size_t snippet_size,
                                                    const RescueRule& rule);

}  // namespace revex

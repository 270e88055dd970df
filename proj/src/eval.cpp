#include "revex/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace revex {

const char* match_mode_name(MatchMode mode) {
    return mode == MatchMode::MinHalf ? "min" : "max";
}

const char* population_name(Population p) {
    return p == Population::Cutoff75 ? "cutoff75" : "all";
}

bool is_true_rationale(TokenSpan snippet, TokenSpan rationale, MatchMode mode) {
    std::size_t lo = std::max(snippet.start, rationale.start);
    std::size_t hi = std::min(snippet.end, rationale.end);
    double overlap = hi > lo ? static_cast<double>(hi - lo) : 0.0;
    double n = static_cast<double>(snippet.length());
    double m = static_cast<double>(rationale.length());
    double threshold = (mode == MatchMode::MinHalf ? std::min(n, m) : std::max(n, m)) / 2.0;
    return overlap > threshold;
}

namespace {

bool matches_any(const std::vector<TokenSpan>& selected, std::size_t k,
                 const std::vector<TokenSpan>& annotations, MatchMode mode) {
    std::size_t limit = std::min(k, selected.size());
    for (std::size_t i = 0; i < limit; ++i) {
        for (const auto& annotation : annotations) {
            if (is_true_rationale(selected[i], annotation, mode)) return true;
        }
    }
    return false;
}

}  // namespace

double rationale_recall(const std::vector<std::vector<TokenSpan>>& selected_per_doc,
                        const std::vector<std::vector<TokenSpan>>& annotations_per_doc,
                        std::size_t k, MatchMode mode) {
    if (selected_per_doc.size() != annotations_per_doc.size()) {
        throw std::invalid_argument("rationale_recall: per-document lists differ in size");
    }
    if (selected_per_doc.empty()) {
        throw std::invalid_argument("rationale_recall: no documents to evaluate");
    }
    std::size_t successes = 0;
    for (std::size_t i = 0; i < selected_per_doc.size(); ++i) {
        if (annotations_per_doc[i].empty()) {
            throw std::invalid_argument(
                "rationale_recall: every evaluated document needs an annotation");
        }
        if (matches_any(selected_per_doc[i], k, annotations_per_doc[i], mode)) {
            ++successes;
        }
    }
    return static_cast<double>(successes) / static_cast<double>(selected_per_doc.size());
}

double jaccard(const std::unordered_set<std::string>& a,
               const std::unordered_set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t intersection = 0;
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    for (const auto& id : small) {
        if (large.count(id)) ++intersection;
    }
    std::size_t unions = a.size() + b.size() - intersection;
    return static_cast<double>(intersection) / static_cast<double>(unions);
}

std::vector<WeightTriple> simplex_lattice(double step) {
    if (step <= 0.0 || step > 1.0) {
        throw std::invalid_argument("simplex_lattice: step must be in (0, 1]");
    }
    auto divisions = static_cast<long long>(std::llround(1.0 / step));
    if (std::abs(static_cast<double>(divisions) * step - 1.0) > 1e-9) {
        throw std::invalid_argument("simplex_lattice: step must divide 1 evenly");
    }
    std::vector<WeightTriple> points;
    // w1 descending, then w2 descending, so earlier points win grid ties.
    for (long long a = divisions; a >= 0; --a) {
        for (long long b = divisions - a; b >= 0; --b) {
            long long c = divisions - a - b;
            points.push_back({static_cast<double>(a) / static_cast<double>(divisions),
                              static_cast<double>(b) / static_cast<double>(divisions),
                              static_cast<double>(c) / static_cast<double>(divisions)});
        }
    }
    return points;
}

namespace {

double fused_recall(const std::vector<DocComponentScores>& docs, const FusionConfig& config,
                    std::size_t k, MatchMode mode) {
    if (docs.empty()) return 0.0;
    std::size_t successes = 0;
    for (const auto& doc : docs) {
        std::vector<std::size_t> order =
            order_snippets(doc.snippets,
                           config.mode == FusionMode::ScoreBased ? Method::ScoreFusion
                                                                 : Method::RankFusion,
                           config);
        std::vector<TokenSpan> top;
        for (std::size_t i = 0; i < std::min(k, order.size()); ++i) {
            top.push_back(doc.snippets[order[i]].snippet.span);
        }
        if (matches_any(top, k, doc.annotations, mode)) ++successes;
    }
    return static_cast<double>(successes) / static_cast<double>(docs.size());
}

}  // namespace

WeightTriple grid_search_weights(const std::vector<DocComponentScores>& validation,
                                 const GridObjective& objective, double grid_step) {
    std::vector<WeightTriple> lattice = simplex_lattice(grid_step);
    WeightTriple best = lattice.front();
    double best_recall = -1.0;
    for (const auto& point : lattice) {
        if (point.snippet_weight + point.complement_weight + point.token_weight <= 0.0) {
            continue;
        }
        FusionConfig config;
        config.snippet_weight = point.snippet_weight;
        config.complement_weight = point.complement_weight;
        config.token_weight = point.token_weight;
        config.mode = objective.fusion_mode;
        config.rrf_k = objective.rrf_k;
        double recall = fused_recall(validation, config, objective.k, objective.match_mode);
        if (recall > best_recall) {  // strict: first (largest w1, then w2) wins ties
            best_recall = recall;
            best = point;
        }
    }
    return best;
}

const RecallCell* ExperimentResult::find(std::size_t snippet_size, std::size_t k,
                                         Method method, Population population) const {
    for (const auto& cell : recall) {
        if (cell.snippet_size == snippet_size && cell.k == k && cell.method == method &&
            cell.population == population) {
            return &cell;
        }
    }
    return nullptr;
}

namespace {

constexpr Method kAllMethods[] = {Method::Snippet, Method::Complement, Method::Keyword,
                                  Method::ScoreFusion, Method::RankFusion};
constexpr Method kIndividualMethods[] = {Method::Snippet, Method::Complement,
                                         Method::Keyword};

// Everything run_experiment needs to re-score one evaluated document under
// any method or fusion weights without touching the model again.
struct DocEval {
    std::string id;
    int fold = 0;
    double ds = 0.0;
    bool above_cutoff = false;
    std::vector<TokenSpan> annotations;
    std::vector<std::vector<ScoredSnippet>> per_size;  // parallel to snippet_sizes
};

}  // namespace

ExperimentResult run_experiment(const Corpus& corpus, const ExperimentConfig& config) {
    ExperimentResult result;
    result.config = config;

    std::vector<const Document*> labeled;
    for (const auto& doc : corpus.documents) {
        if (doc.label != Label::Unlabeled) labeled.push_back(&doc);
    }
    if (labeled.empty()) throw std::invalid_argument("run_experiment: no labeled documents");

    FoldAssignment folds = make_folds(labeled, config.folds, config.seed);

    ExplainConfig explain_config;
    explain_config.keyword_top_n = config.keyword_top_n;
    explain_config.fusion = config.fusion;

    std::vector<DocEval> evaluated;
    for (int fold = 0; fold < config.folds; ++fold) {
        std::vector<const Document*> train_docs;
        std::vector<const Document*> heldout;
        for (const auto* doc : labeled) {
            (folds.fold_of.at(doc->id) == fold ? heldout : train_docs).push_back(doc);
        }

        Vocabulary vocab = build_vocabulary(train_docs, config.vocab_cap);
        std::vector<FeatureVector> xs;
        std::vector<Label> ys;
        xs.reserve(train_docs.size());
        ys.reserve(train_docs.size());
        for (const auto* doc : train_docs) {
            xs.push_back(vectorize(doc->tokens, vocab));
            ys.push_back(doc->label);
        }
        LinearModel model = train(xs, ys, vocab, config.train);
        Explainer explainer(model, explain_config);

        FoldInfo info;
        info.fold = fold;
        info.heldout_documents = heldout.size();

        std::vector<double> responsive_scores;
        std::vector<double> heldout_ds(heldout.size());
        std::size_t correct = 0;
        for (std::size_t i = 0; i < heldout.size(); ++i) {
            heldout_ds[i] = score(model, vectorize(heldout[i]->tokens, vocab));
            bool predicted = heldout_ds[i] >= 0.5;
            bool actual = heldout[i]->label == Label::Responsive;
            if (predicted == actual) ++correct;
            if (actual) responsive_scores.push_back(heldout_ds[i]);
        }
        info.heldout_responsive = responsive_scores.size();
        info.heldout_accuracy = heldout.empty()
                                    ? 0.0
                                    : static_cast<double>(correct) /
                                          static_cast<double>(heldout.size());
        info.cutoff = select_cutoff(responsive_scores, config.target_recall);

        for (std::size_t i = 0; i < heldout.size(); ++i) {
            const Document* doc = heldout[i];
            if (doc->label != Label::Responsive || doc->rationale_spans.empty()) continue;
            DocEval eval;
            eval.id = doc->id;
            eval.fold = fold;
            eval.ds = heldout_ds[i];
            eval.above_cutoff = heldout_ds[i] >= info.cutoff;
            eval.annotations = doc->rationale_spans;
            eval.per_size.reserve(config.snippet_sizes.size());
            for (std::size_t n : config.snippet_sizes) {
                eval.per_size.push_back(explainer.score_snippets(*doc, n));
            }
            ++info.annotated;
            if (eval.above_cutoff) ++info.annotated_above_cutoff;
            evaluated.push_back(std::move(eval));
        }

        result.folds.push_back(info);
        result.fold_models.push_back(std::move(model));
    }

    // Optional grid search over fusion weights; the chosen triple then feeds
    // both fusion methods below.
    FusionConfig fusion = config.fusion;
    if (config.grid_search) {
        std::size_t size_index = 0;
        bool found = false;
        for (std::size_t i = 0; i < config.snippet_sizes.size(); ++i) {
            if (config.snippet_sizes[i] == config.grid_objective_size) {
                size_index = i;
                found = true;
                break;
            }
        }
        if (!found) {
            throw std::invalid_argument(
                "run_experiment: grid objective snippet size is not evaluated");
        }
        std::vector<DocComponentScores> validation;
        validation.reserve(evaluated.size());
        for (const auto& eval : evaluated) {
            validation.push_back({eval.per_size[size_index], eval.annotations});
        }
        GridObjective objective{config.grid_objective_k, config.match_mode,
                                config.grid_objective_mode, config.fusion.rrf_k};
        WeightTriple best = grid_search_weights(validation, objective, config.grid_step);
        fusion.snippet_weight = best.snippet_weight;
        fusion.complement_weight = best.complement_weight;
        fusion.token_weight = best.token_weight;

        result.grid.enabled = true;
        result.grid.snippet_weight = best.snippet_weight;
        result.grid.complement_weight = best.complement_weight;
        result.grid.token_weight = best.token_weight;
        FusionConfig chosen = fusion;
        chosen.mode = config.grid_objective_mode;
        result.grid.objective_recall =
            fused_recall(validation, chosen, config.grid_objective_k, config.match_mode);
    }

    // success[size][method][k][population] -> per-fold counts
    const std::size_t n_sizes = config.snippet_sizes.size();
    const std::size_t n_methods = std::size(kAllMethods);
    const std::size_t n_k = config.top_k;
    auto cell_index = [&](std::size_t size_i, std::size_t method_i, std::size_t k_i,
                          std::size_t pop_i) {
        return ((size_i * n_methods + method_i) * n_k + k_i) * 2 + pop_i;
    };
    std::vector<std::vector<std::size_t>> numerators(
        n_sizes * n_methods * n_k * 2,
        std::vector<std::size_t>(static_cast<std::size_t>(config.folds), 0));
    std::vector<std::vector<std::size_t>> denominators = numerators;

    // Jaccard success sets on the cutoff population, pooled across folds.
    std::vector<std::unordered_set<std::string>> success_sets(n_sizes * 3 * n_k);
    auto success_index = [&](std::size_t size_i, std::size_t method_i, std::size_t k_i) {
        return (size_i * 3 + method_i) * n_k + k_i;
    };

    for (const auto& eval : evaluated) {
        auto fold = static_cast<std::size_t>(eval.fold);
        for (std::size_t size_i = 0; size_i < n_sizes; ++size_i) {
            const auto& scored = eval.per_size[size_i];
            for (std::size_t method_i = 0; method_i < n_methods; ++method_i) {
                std::vector<std::size_t> order =
                    order_snippets(scored, kAllMethods[method_i], fusion);
                std::vector<TokenSpan> top;
                top.reserve(std::min<std::size_t>(config.top_k, order.size()));
                for (std::size_t i = 0; i < std::min<std::size_t>(config.top_k, order.size());
                     ++i) {
                    top.push_back(scored[order[i]].snippet.span);
                }
                for (std::size_t k_i = 0; k_i < n_k; ++k_i) {
                    bool success =
                        matches_any(top, k_i + 1, eval.annotations, config.match_mode);
                    for (std::size_t pop_i = 0; pop_i < 2; ++pop_i) {
                        if (pop_i == 0 && !eval.above_cutoff) continue;
                        std::size_t idx = cell_index(size_i, method_i, k_i, pop_i);
                        ++denominators[idx][fold];
                        if (success) ++numerators[idx][fold];
                    }
                    if (success && eval.above_cutoff && method_i < 3) {
                        success_sets[success_index(size_i, method_i, k_i)].insert(eval.id);
                    }
                }
            }
        }
    }

    for (std::size_t size_i = 0; size_i < n_sizes; ++size_i) {
        for (std::size_t k_i = 0; k_i < n_k; ++k_i) {
            for (std::size_t method_i = 0; method_i < n_methods; ++method_i) {
                for (std::size_t pop_i = 0; pop_i < 2; ++pop_i) {
                    std::size_t idx = cell_index(size_i, method_i, k_i, pop_i);
                    RecallCell cell;
                    cell.snippet_size = config.snippet_sizes[size_i];
                    cell.k = k_i + 1;
                    cell.method = kAllMethods[method_i];
                    cell.population = pop_i == 0 ? Population::Cutoff75 : Population::All;
                    double sum = 0.0;
                    std::size_t folds_counted = 0;
                    for (int fold = 0; fold < config.folds; ++fold) {
                        auto f = static_cast<std::size_t>(fold);
                        cell.numerator += numerators[idx][f];
                        cell.denominator += denominators[idx][f];
                        if (denominators[idx][f] > 0) {
                            sum += static_cast<double>(numerators[idx][f]) /
                                   static_cast<double>(denominators[idx][f]);
                            ++folds_counted;
                        }
                    }
                    cell.recall = folds_counted == 0 ? 0.0 : sum / folds_counted;
                    result.recall.push_back(cell);
                }
            }
            for (std::size_t a = 0; a < 3; ++a) {
                for (std::size_t b = a + 1; b < 3; ++b) {
                    JaccardCell cell;
                    cell.snippet_size = config.snippet_sizes[size_i];
                    cell.k = k_i + 1;
                    cell.method_a = kIndividualMethods[a];
                    cell.method_b = kIndividualMethods[b];
                    cell.value = jaccard(success_sets[success_index(size_i, a, k_i)],
                                         success_sets[success_index(size_i, b, k_i)]);
                    result.jaccard.push_back(cell);
                }
            }
        }
    }
    return result;
}

std::vector<RescueCandidate> rescue_false_negatives(const LinearModel& model,
                                                    const std::vector<const Document*>& docs,
                                                    double cutoff, std::size_t snippet_size,
                                                    const RescueRule& rule) {
    std::vector<RescueCandidate> candidates;
    for (const auto* doc : docs) {
        double ds = score(model, vectorize(doc->tokens, model.vocab));
        if (ds >= cutoff) continue;  // predicted responsive documents never qualify
        std::vector<Snippet> snippets = generate_snippets(doc->tokens.size(), snippet_size);
        if (snippets.empty()) continue;
        std::span<const std::string> tokens(doc->tokens);
        RescueCandidate candidate;
        candidate.doc_id = doc->id;
        candidate.doc_score = ds;
        candidate.best_snippet_score = -1.0;
        for (const auto& snippet : snippets) {
            double s = snippet_score(
                model, tokens.subspan(snippet.span.start, snippet.span.length()));
            if (s > candidate.best_snippet_score) {
                candidate.best_snippet_score = s;
                candidate.best_span = snippet.span;
            }
        }
        candidates.push_back(candidate);
    }

    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.best_snippet_score != b.best_snippet_score) {
            return a.best_snippet_score > b.best_snippet_score;
        }
        return a.doc_id < b.doc_id;
    });

    if (rule.kind == RescueRule::Kind::Threshold) {
        std::vector<RescueCandidate> flagged;
        for (const auto& c : candidates) {
            if (c.best_snippet_score > rule.theta) flagged.push_back(c);
        }
        return flagged;
    }
    if (candidates.size() > rule.m) candidates.resize(rule.m);
    return candidates;
}

}  // namespace revex

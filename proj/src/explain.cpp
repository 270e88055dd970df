#include "revex/explain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string_view>
#include <unordered_set>

namespace revex {

const char* method_name(Method m) {
    switch (m) {
        case Method::Snippet: return "snippet";
        case Method::Complement: return "complement";
        case Method::Keyword: return "keyword";
        case Method::ScoreFusion: return "score-fusion";
        case Method::RankFusion: return "rank-fusion";
    }
    return "snippet";
}

std::optional<Method> method_from_name(const std::string& name) {
    if (name == "snippet") return Method::Snippet;
    if (name == "complement") return Method::Complement;
    if (name == "keyword") return Method::Keyword;
    if (name == "score-fusion") return Method::ScoreFusion;
    if (name == "rank-fusion") return Method::RankFusion;
    return std::nullopt;
}

std::vector<Snippet> generate_snippets(std::size_t token_count, std::size_t window) {
    if (window < 2 || window % 2 != 0) {
        throw std::invalid_argument("generate_snippets: window must be even and >= 2");
    }
    std::vector<Snippet> out;
    if (token_count == 0) return out;
    const std::size_t stride = window / 2;
    // ceil((W - n/2) / (n/2)) windows, at least one.
    std::size_t count = std::max<std::size_t>(1, (token_count - 1) / stride);
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t start = i * stride;
        std::size_t end = std::min(start + window, token_count);
        out.push_back({TokenSpan{start, end}, window});
    }
    return out;
}

double snippet_score(const LinearModel& model, std::span<const std::string> snippet_tokens) {
    return score(model, vectorize(snippet_tokens, model.vocab));
}

double complement_reduction(double ds_full, double ds_removed) {
    if (ds_full < ds_removed) return 0.0;
    return (ds_full - ds_removed) / ds_full;
}

double complement_score(const LinearModel& model, const Document& doc, TokenSpan snippet) {
    double ds_full = score(model, vectorize(doc.tokens, model.vocab));
    double ds_removed = score(model, vectorize_complement(doc, snippet, model.vocab));
    return complement_reduction(ds_full, ds_removed);
}

KeywordLexicon build_keyword_lexicon(const LinearModel& model, std::size_t top_n,
                                     double min_weight) {
    KeywordLexicon lexicon;
    lexicon.top_n = top_n;
    lexicon.min_weight = min_weight;
    for (std::size_t i = 0; i < model.vocab.tokens.size(); ++i) {
        double w = model.weights[i];
        if (w > 0.0 && w > min_weight) {
            lexicon.entries.emplace_back(model.vocab.tokens[i], w);
        }
    }
    std::sort(lexicon.entries.begin(), lexicon.entries.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second > b.second;
                  return a.first < b.first;
              });
    if (lexicon.entries.size() > top_n) lexicon.entries.resize(top_n);
    lexicon.weight_of.reserve(lexicon.entries.size());
    for (const auto& [token, w] : lexicon.entries) lexicon.weight_of.emplace(token, w);
    return lexicon;
}

double cscore(const std::string& token, const KeywordLexicon& lexicon,
              const FeatureVector& doc_vector, const Vocabulary& vocab) {
    auto it = lexicon.weight_of.find(token);
    if (it == lexicon.weight_of.end()) return 0.0;
    auto idx = vocab.find(token);
    if (!idx) return 0.0;
    return it->second * doc_vector.value_at(*idx);
}

double snippet_token_score(std::span<const std::string> doc_tokens, TokenSpan snippet,
                           const KeywordLexicon& lexicon) {
    if (snippet.end > doc_tokens.size() || snippet.start >= snippet.end) {
        throw std::invalid_argument("snippet_token_score: span out of bounds");
    }
    // Document-level contribution per distinct lexicon token. A token hit by
    // the snippet contributes its full document-level cscore once.
    struct Hit {
        double weight = 0.0;
        std::size_t count = 0;
    };
    std::unordered_map<std::string_view, Hit> hits;
    for (const auto& token : doc_tokens) {
        auto it = lexicon.weight_of.find(token);
        if (it == lexicon.weight_of.end()) continue;
        ++hits.try_emplace(token, Hit{it->second, 0}).first->second.count;
    }
    if (hits.empty()) return 0.0;
    const double total_tokens = static_cast<double>(doc_tokens.size());
    double denominator = 0.0;
    for (const auto& [token, hit] : hits) {
        denominator += hit.weight * (static_cast<double>(hit.count) / total_tokens);
    }
    if (denominator <= 0.0) return 0.0;

    std::unordered_set<std::string_view> seen;
    double numerator = 0.0;
    for (std::size_t i = snippet.start; i < snippet.end; ++i) {
        auto it = hits.find(std::string_view(doc_tokens[i]));
        if (it != hits.end() && seen.insert(it->first).second) {
            numerator +=
                it->second.weight * (static_cast<double>(it->second.count) / total_tokens);
        }
    }
    return numerator / denominator;
}

double rrf_score(int rank, int k) {
    if (rank < 1) throw std::invalid_argument("rrf_score: rank must be >= 1");
    if (k < 0) throw std::invalid_argument("rrf_score: k must be >= 0");
    return 1.0 / (static_cast<double>(k) + static_cast<double>(rank));
}

double fuse(const ScoredSnippet& s, const FusionConfig& config) {
    if (config.mode == FusionMode::ScoreBased) {
        return config.snippet_weight * s.snippet_score +
               config.complement_weight * s.complement_score +
               config.token_weight * s.token_score;
    }
    return config.snippet_weight * rrf_score(s.snippet_rank, config.rrf_k) +
           config.complement_weight * rrf_score(s.complement_rank, config.rrf_k) +
           config.token_weight * rrf_score(s.token_rank, config.rrf_k);
}

namespace {

void check_fusion_config(const FusionConfig& config) {
    if (config.snippet_weight < 0.0 || config.complement_weight < 0.0 ||
        config.token_weight < 0.0) {
        throw std::invalid_argument("fusion weights must be nonnegative");
    }
    if (config.snippet_weight + config.complement_weight + config.token_weight <= 0.0) {
        throw std::invalid_argument("at least one fusion weight must be positive");
    }
}

// rank 1 = best; ties broken by earlier span start
template <typename ScoreFn>
void assign_ranks(std::vector<ScoredSnippet>& scored, ScoreFn&& score_of,
                  int ScoredSnippet::* rank_member) {
    std::vector<std::size_t> order(scored.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double sa = score_of(scored[a]);
        double sb = score_of(scored[b]);
        if (sa != sb) return sa > sb;
        return scored[a].snippet.span.start < scored[b].snippet.span.start;
    });
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        scored[order[pos]].*rank_member = static_cast<int>(pos + 1);
    }
}

double method_score(const ScoredSnippet& s, Method method, const FusionConfig& config) {
    switch (method) {
        case Method::Snippet: return s.snippet_score;
        case Method::Complement: return s.complement_score;
        case Method::Keyword: return s.token_score;
        case Method::ScoreFusion: {
            FusionConfig c = config;
            c.mode = FusionMode::ScoreBased;
            return fuse(s, c);
        }
        case Method::RankFusion: {
            FusionConfig c = config;
            c.mode = FusionMode::RankBased;
            return fuse(s, c);
        }
    }
    return s.snippet_score;
}

}  // namespace

std::vector<std::size_t> order_snippets(const std::vector<ScoredSnippet>& scored,
                                        Method method, const FusionConfig& config) {
    std::vector<std::size_t> order(scored.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double sa = method_score(scored[a], method, config);
        double sb = method_score(scored[b], method, config);
        if (sa != sb) return sa > sb;
        return scored[a].snippet.span.start < scored[b].snippet.span.start;
    });
    return order;
}

std::vector<ScoredSnippet> select_rationales(const std::vector<ScoredSnippet>& scored,
                                             const SelectionPolicy& policy) {
    std::vector<ScoredSnippet> sorted = scored;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.fused_score != b.fused_score) return a.fused_score > b.fused_score;
        return a.snippet.span.start < b.snippet.span.start;
    });
    if (const auto* top = std::get_if<TopK>(&policy)) {
        if (sorted.size() > top->k) sorted.resize(top->k);
        return sorted;
    }
    const auto& threshold = std::get<Threshold>(policy);
    std::vector<ScoredSnippet> kept;
    for (const auto& s : sorted) {
        if (s.fused_score > threshold.theta) kept.push_back(s);
    }
    return kept;
}

std::optional<std::vector<std::string>> minimal_flip_set(const LinearModel& model,
                                                         const Document& doc) {
    const std::size_t total = doc.tokens.size();

    // Distinct token counts, plus the weighted contribution of each
    // positive-weight token present in the document.
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& token : doc.tokens) ++counts[token];

    struct Candidate {
        std::string token;
        double weight = 0.0;
        std::size_t count = 0;
        double contribution = 0.0;  // weight * count / total
    };
    std::vector<Candidate> candidates;
    double weighted_sum = 0.0;  // sum of weight * count over all in-vocab tokens
    for (const auto& [token, count] : counts) {
        auto idx = model.vocab.find(token);
        if (!idx) continue;
        double w = model.weights[*idx];
        weighted_sum += w * static_cast<double>(count);
        if (w > 0.0) {
            candidates.push_back({token, w, count,
                                  w * static_cast<double>(count) /
                                      static_cast<double>(total)});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.contribution != b.contribution) return a.contribution > b.contribution;
        return a.token < b.token;
    });

    auto ds_of = [&](double numerator, std::size_t remaining) {
        double m = remaining == 0 ? model.bias
                                  : numerator / static_cast<double>(remaining) + model.bias;
        return sigmoid(m);
    };

    std::size_t remaining = total;
    double numerator = weighted_sum;
    if (ds_of(numerator, remaining) < 0.5) return std::vector<std::string>{};

    std::vector<std::string> selected;
    for (const auto& c : candidates) {
        selected.push_back(c.token);
        numerator -= c.weight * static_cast<double>(c.count);
        remaining -= c.count;
        if (ds_of(numerator, remaining) < 0.5) return selected;
    }
    return std::nullopt;  // bias alone keeps the document responsive
}

Explainer::Explainer(const LinearModel& model, const ExplainConfig& config)
    : model_(model),
      lexicon_(build_keyword_lexicon(model, config.keyword_top_n,
                                     config.keyword_min_weight)),
      fusion_(config.fusion) {
    check_fusion_config(fusion_);
}

std::vector<ScoredSnippet> Explainer::score_snippets(const Document& doc,
                                                     std::size_t window) const {
    std::vector<Snippet> snippets = generate_snippets(doc.tokens.size(), window);
    std::vector<ScoredSnippet> scored;
    scored.reserve(snippets.size());
    if (snippets.empty()) return scored;

    FeatureVector doc_vector = vectorize(doc.tokens, model_.vocab);
    double ds_full = score(model_, doc_vector);

    std::span<const std::string> tokens(doc.tokens);
    for (const auto& snippet : snippets) {
        ScoredSnippet s;
        s.snippet = snippet;
        s.snippet_score = snippet_score(
            model_, tokens.subspan(snippet.span.start, snippet.span.length()));
        double ds_removed =
            score(model_, vectorize_complement(doc, snippet.span, model_.vocab));
        s.complement_score = complement_reduction(ds_full, ds_removed);
        s.token_score = snippet_token_score(tokens, snippet.span, lexicon_);
        scored.push_back(s);
    }

    // Component ranks must cover the document's full snippet list before any
    // fused score exists.
    assign_ranks(scored, [](const ScoredSnippet& s) { return s.snippet_score; },
                 &ScoredSnippet::snippet_rank);
    assign_ranks(scored, [](const ScoredSnippet& s) { return s.complement_score; },
                 &ScoredSnippet::complement_rank);
    assign_ranks(scored, [](const ScoredSnippet& s) { return s.token_score; },
                 &ScoredSnippet::token_rank);
    for (auto& s : scored) s.fused_score = fuse(s, fusion_);
    return scored;
}

ExplanationReport Explainer::explain(const Document& doc, std::size_t window,
                                     double cutoff, Method ordering) const {
    ExplanationReport report;
    report.doc_id = doc.id;
    FeatureVector doc_vector = vectorize(doc.tokens, model_.vocab);
    report.doc_score = score(model_, doc_vector);
    report.classified_responsive = report.doc_score >= cutoff;

    std::vector<ScoredSnippet> scored = score_snippets(doc, window);
    std::vector<std::size_t> order = order_snippets(scored, ordering, fusion_);
    report.snippets.reserve(order.size());
    for (std::size_t idx : order) report.snippets.push_back(scored[idx]);

    for (const auto& [token, weight] : lexicon_.entries) {
        double c = cscore(token, lexicon_, doc_vector, model_.vocab);
        if (c > 0.0) report.keywords.push_back({token, weight, c});
    }
    std::sort(report.keywords.begin(), report.keywords.end(),
              [](const auto& a, const auto& b) {
                  if (a.cscore != b.cscore) return a.cscore > b.cscore;
                  return a.token < b.token;
              });

    report.flip_set = minimal_flip_set(model_, doc);
    return report;
}

}  // namespace revex

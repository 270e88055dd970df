#include "revex/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace revex {

using nlohmann::json;

namespace {

std::string escape_html(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

// 0-100 scale with two decimals, the presentation used in reports
std::string display_score(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value * 100.0);
    return buf;
}

}  // namespace

json report_to_json(const ExplanationReport& report) {
    json snippets = json::array();
    for (std::size_t i = 0; i < report.snippets.size(); ++i) {
        const auto& s = report.snippets[i];
        snippets.push_back({{"start", s.snippet.span.start},
                            {"end", s.snippet.span.end},
                            {"snippet_score", s.snippet_score},
                            {"complement_score", s.complement_score},
                            {"token_score", s.token_score},
                            {"fused_score", s.fused_score},
                            {"rank", i + 1}});
    }
    json keywords = json::array();
    for (const auto& k : report.keywords) {
        keywords.push_back({{"token", k.token}, {"weight", k.weight}, {"cscore", k.cscore}});
    }
    json flip_set;
    if (report.flip_set) {
        flip_set = *report.flip_set;
    } else {
        flip_set = nullptr;
    }
    return json{{"id", report.doc_id},
                {"doc_score", report.doc_score},
                {"classified_responsive", report.classified_responsive},
                {"snippets", std::move(snippets)},
                {"keywords", std::move(keywords)},
                {"flip_set", std::move(flip_set)}};
}

std::string render_html(const ExplanationReport& report, const Document& doc,
                        std::size_t top_k) {
    std::vector<TokenOffset> offsets = token_offsets(doc.raw_text);

    // Union of the top-k spans as highlighted token indices, then merged
    // into maximal runs so overlapping snippets become one region.
    struct Region {
        std::size_t begin = 0;  // byte offsets
        std::size_t end = 0;
        double best_score = 0.0;
        std::size_t best_rank = 0;
    };
    std::vector<char> highlighted(offsets.size(), 0);
    std::vector<double> token_score(offsets.size(), 0.0);
    std::vector<std::size_t> token_rank(offsets.size(), 0);
    std::size_t limit = std::min(top_k, report.snippets.size());
    for (std::size_t i = 0; i < limit; ++i) {
        const auto& span = report.snippets[i].snippet.span;
        for (std::size_t t = span.start; t < span.end && t < offsets.size(); ++t) {
            if (!highlighted[t] || report.snippets[i].fused_score > token_score[t]) {
                token_score[t] = report.snippets[i].fused_score;
                token_rank[t] = i + 1;
            }
            highlighted[t] = 1;
        }
    }
    std::vector<Region> regions;
    for (std::size_t t = 0; t < offsets.size(); ++t) {
        if (!highlighted[t]) continue;
        if (t > 0 && highlighted[t - 1]) {
            regions.back().end = offsets[t].end;
            if (token_score[t] > regions.back().best_score) {
                regions.back().best_score = token_score[t];
                regions.back().best_rank = token_rank[t];
            }
        } else {
            regions.push_back({offsets[t].begin, offsets[t].end, token_score[t],
                               token_rank[t]});
        }
    }

    std::ostringstream out;
    out << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Document "
        << escape_html(report.doc_id) << "</title>\n"
        << "<style>\n"
        << "body { font-family: sans-serif; margin: 2em; }\n"
        << "pre#doc { white-space: pre-wrap; line-height: 1.5; }\n"
        << "mark { background: #ffd54d; }\n"
        << "</style>\n</head>\n<body>\n"
        << "<h1>Document " << escape_html(report.doc_id) << "</h1>\n"
        << "<p>score " << display_score(report.doc_score) << " &mdash; "
        << (report.classified_responsive ? "responsive" : "not responsive") << "</p>\n"
        << "<pre id=\"doc\">";

    std::size_t cursor = 0;
    for (const auto& region : regions) {
        out << escape_html(doc.raw_text.substr(cursor, region.begin - cursor));
        out << "<mark title=\"snippet " << region.best_rank << ": "
            << display_score(region.best_score) << "\">";
        out << escape_html(doc.raw_text.substr(region.begin, region.end - region.begin));
        out << "</mark>";
        cursor = region.end;
    }
    out << escape_html(doc.raw_text.substr(cursor));
    out << "</pre>\n</body>\n</html>\n";
    return out.str();
}

json summary_to_json(const IngestSummary& summary) {
    return json{{"documents", summary.documents},
                {"responsive", summary.responsive},
                {"not_responsive", summary.not_responsive},
                {"unlabeled", summary.unlabeled},
                {"rationales_located", summary.rationales_located},
                {"rationales_unlocated", summary.rationales_unlocated},
                {"spans_dropped", summary.spans_dropped},
                {"annotated_documents", summary.annotated_documents}};
}

json experiment_to_json(const ExperimentResult& result) {
    json recall = json::array();
    for (const auto& cell : result.recall) {
        recall.push_back({{"n", cell.snippet_size},
                          {"k", cell.k},
                          {"method", method_name(cell.method)},
                          {"population", population_name(cell.population)},
                          {"recall", cell.recall},
                          {"numerator", cell.numerator},
                          {"denominator", cell.denominator}});
    }
    json jaccard_cells = json::array();
    for (const auto& cell : result.jaccard) {
        jaccard_cells.push_back({{"n", cell.snippet_size},
                                 {"k", cell.k},
                                 {"method_a", method_name(cell.method_a)},
                                 {"method_b", method_name(cell.method_b)},
                                 {"value", cell.value}});
    }
    json cutoffs = json::array();
    for (const auto& fold : result.folds) {
        cutoffs.push_back({{"fold", fold.fold},
                           {"cutoff", fold.cutoff},
                           {"heldout_documents", fold.heldout_documents},
                           {"heldout_responsive", fold.heldout_responsive},
                           {"annotated", fold.annotated},
                           {"annotated_above_cutoff", fold.annotated_above_cutoff},
                           {"heldout_accuracy", fold.heldout_accuracy}});
    }

    const auto& cfg = result.config;
    json config{{"snippet_sizes", cfg.snippet_sizes},
                {"top_k", cfg.top_k},
                {"folds", cfg.folds},
                {"seed", cfg.seed},
                {"target_recall", cfg.target_recall},
                {"match_mode", match_mode_name(cfg.match_mode)},
                {"weights",
                 {cfg.fusion.snippet_weight, cfg.fusion.complement_weight,
                  cfg.fusion.token_weight}},
                {"rrf_k", cfg.fusion.rrf_k},
                {"vocab_cap", cfg.vocab_cap},
                {"keyword_top_n", cfg.keyword_top_n},
                {"train",
                 {{"l2_lambda", cfg.train.l2_lambda},
                  {"max_epochs", cfg.train.max_epochs},
                  {"convergence_tol", cfg.train.convergence_tol},
                  {"learning_rate", cfg.train.learning_rate},
                  {"seed", cfg.train.seed}}}};

    json grid{{"enabled", result.grid.enabled}};
    if (result.grid.enabled) {
        grid["weights"] = {result.grid.snippet_weight, result.grid.complement_weight,
                           result.grid.token_weight};
        grid["objective_recall"] = result.grid.objective_recall;
    }

    return json{{"recall", std::move(recall)},
                {"jaccard", std::move(jaccard_cells)},
                {"cutoffs", std::move(cutoffs)},
                {"grid", std::move(grid)},
                {"config", std::move(config)}};
}

std::string experiment_to_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "n,k,method,population,recall,numerator,denominator\n";
    for (const auto& cell : result.recall) {
        out << cell.snippet_size << ',' << cell.k << ',' << method_name(cell.method) << ','
            << population_name(cell.population) << ',' << cell.recall << ','
            << cell.numerator << ',' << cell.denominator << '\n';
    }
    return out.str();
}

json rescue_to_json(const std::vector<RescueCandidate>& candidates, double cutoff,
                    const RescueRule& rule) {
    json rule_json;
    if (rule.kind == RescueRule::Kind::Threshold) {
        rule_json = {{"kind", "threshold"}, {"theta", rule.theta}};
    } else {
        rule_json = {{"kind", "top_m"}, {"m", rule.m}};
    }
    json list = json::array();
    for (const auto& c : candidates) {
        list.push_back({{"id", c.doc_id},
                        {"doc_score", c.doc_score},
                        {"best_start", c.best_span.start},
                        {"best_end", c.best_span.end},
                        {"best_snippet_score", c.best_snippet_score}});
    }
    return json{{"cutoff", cutoff}, {"rule", std::move(rule_json)},
                {"candidates", std::move(list)}};
}

}  // namespace revex

#pragma once

#include <string>

#include "json.hpp"
#include "revex/corpus.hpp"
#include "revex/eval.hpp"
#include "revex/explain.hpp"

namespace revex {

// All stored scores stay in [0, 1]; the 0-100 two-decimal presentation is a
// display scaling applied only when rendering for humans (HTML).

nlohmann::json report_to_json(const ExplanationReport& report);

// Standalone HTML page with the top_k snippet spans highlighted in the
// original text. Overlapping spans merge into one highlighted region and the
// text content survives markup-stripping byte-for-byte.
std::string render_html(const ExplanationReport& report, const Document& doc,
                        std::size_t top_k);

nlohmann::json summary_to_json(const IngestSummary& summary);

nlohmann::json experiment_to_json(const ExperimentResult& result);
std::string experiment_to_csv(const ExperimentResult& result);

nlohmann::json rescue_to_json(const std::vector<RescueCandidate>& candidates,
                              double cutoff, const RescueRule& rule);

}  // namespace revex

#include "revex/synth.hpp"

#include <algorithm>
#include <stdexcept>

#include "revex/rng.hpp"

namespace revex {

namespace {

std::string padded_id(const char* prefix, std::size_t i) {
    std::string num = std::to_string(i + 1);
    std::string out = prefix;
    for (std::size_t p = num.size(); p < 5; ++p) out.push_back('0');
    return out + num;
}

}  // namespace

Corpus synth_corpus(const SyntheticSpec& spec) {
    if (spec.filler_vocab == 0 || spec.responsive_vocab == 0) {
        throw std::invalid_argument("synth_corpus: vocabularies must be non-empty");
    }
    if (spec.filler_min == 0 || spec.filler_min > spec.filler_max ||
        spec.span_min == 0 || spec.span_min > spec.span_max) {
        throw std::invalid_argument("synth_corpus: invalid length ranges");
    }
    if (spec.shared_fraction < 0.0 || spec.shared_fraction > 1.0) {
        throw std::invalid_argument("synth_corpus: shared fraction must be in [0, 1]");
    }
    auto shared = static_cast<std::size_t>(
        std::llround(spec.shared_fraction * static_cast<double>(spec.responsive_vocab)));
    shared = std::min({shared, spec.responsive_vocab, spec.filler_vocab});

    // Token universes depend only on the sizes, never the seed, so corpora
    // drawn with different seeds share one vocabulary.
    std::vector<std::string> filler_tokens(spec.filler_vocab);
    for (std::size_t i = 0; i < spec.filler_vocab; ++i) {
        filler_tokens[i] = "fill" + std::to_string(i);
    }
    std::vector<std::string> responsive_tokens;
    responsive_tokens.reserve(spec.responsive_vocab);
    for (std::size_t i = 0; i < shared; ++i) responsive_tokens.push_back(filler_tokens[i]);
    for (std::size_t i = 0; i < spec.responsive_vocab - shared; ++i) {
        responsive_tokens.push_back("resp" + std::to_string(i));
    }

    Rng rng(spec.seed);
    Corpus corpus;
    corpus.source_path = "synthetic";
    corpus.documents.reserve(spec.responsive_docs + spec.not_responsive_docs);

    for (std::size_t d = 0; d < spec.responsive_docs; ++d) {
        std::size_t filler_len = rng.range(spec.filler_min, spec.filler_max);

        std::vector<std::size_t> insert_at(spec.spans_per_doc);
        for (auto& p : insert_at) p = rng.bounded(filler_len + 1);
        std::sort(insert_at.begin(), insert_at.end());
        std::vector<std::vector<std::string>> spans(spec.spans_per_doc);
        for (auto& span : spans) {
            span.resize(rng.range(spec.span_min, spec.span_max));
            for (auto& token : span) {
                token = responsive_tokens[rng.bounded(responsive_tokens.size())];
            }
        }

        Document doc;
        doc.id = padded_id("resp-", d);
        doc.label = Label::Responsive;
        std::size_t next_span = 0;
        for (std::size_t pos = 0; pos <= filler_len; ++pos) {
            while (next_span < spans.size() && insert_at[next_span] == pos) {
                std::size_t start = doc.tokens.size();
                doc.tokens.insert(doc.tokens.end(), spans[next_span].begin(),
                                  spans[next_span].end());
                doc.rationale_spans.push_back({start, doc.tokens.size()});
                ++next_span;
            }
            if (pos < filler_len) {
                doc.tokens.push_back(filler_tokens[rng.bounded(filler_tokens.size())]);
            }
        }
        doc.raw_text = join_tokens(doc.tokens, 0, doc.tokens.size());
        corpus.documents.push_back(std::move(doc));
    }

    for (std::size_t d = 0; d < spec.not_responsive_docs; ++d) {
        Document doc;
        doc.id = padded_id("nonr-", d);
        doc.label = Label::NotResponsive;
        std::size_t filler_len = rng.range(spec.filler_min, spec.filler_max);
        doc.tokens.reserve(filler_len);
        for (std::size_t i = 0; i < filler_len; ++i) {
            doc.tokens.push_back(filler_tokens[rng.bounded(filler_tokens.size())]);
        }
        doc.raw_text = join_tokens(doc.tokens, 0, doc.tokens.size());
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

}  // namespace revex

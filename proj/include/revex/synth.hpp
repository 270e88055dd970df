#pragma once

#include <cstddef>
#include <cstdint>

#include "revex/corpus.hpp"

namespace revex {

// Synthetic planted-rationale corpus. Responsive documents are filler token
// streams with one or more contiguous spans drawn from a separate responsive
// vocabulary; the planted spans are recorded as ground-truth rationales.
// Vocabularies are deterministic in the sizes alone, so corpora generated
// with different seeds share the same token universe.
struct SyntheticSpec {
    std::size_t responsive_docs = 500;
    std::size_t not_responsive_docs = 500;
    std::size_t filler_min = 400;  // filler tokens per document
    std::size_t filler_max = 1000;
    std::size_t span_min = 30;  // planted span length in tokens
    std::size_t span_max = 60;
    std::size_t responsive_vocab = 50;
    std::size_t filler_vocab = 1000;
    double shared_fraction = 0.1;  // share of responsive vocab drawn from filler vocab
    std::size_t spans_per_doc = 1;
    std::uint64_t seed = 0;
};

Corpus synth_corpus(const SyntheticSpec& spec);

}  // namespace revex

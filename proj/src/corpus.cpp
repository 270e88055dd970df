#include "revex/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "revex/rng.hpp"

namespace revex {

using nlohmann::json;

const char* label_name(Label label) {
    switch (label) {
        case Label::Responsive: return "responsive";
        case Label::NotResponsive: return "not_responsive";
        case Label::Unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

std::optional<Label> label_from_name(const std::string& name) {
    if (name == "responsive") return Label::Responsive;
    if (name == "not_responsive") return Label::NotResponsive;
    if (name == "unlabeled") return Label::Unlabeled;
    return std::nullopt;
}

const Document* Corpus::find(const std::string& id) const {
    for (const auto& doc : documents) {
        if (doc.id == id) return &doc;
    }
    return nullptr;
}

namespace {

bool is_word_char(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char to_lower_ascii(unsigned char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                  : static_cast<char>(c);
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (is_word_char(c)) {
            current.push_back(to_lower_ascii(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<TokenOffset> token_offsets(const std::string& text) {
    std::vector<TokenOffset> offsets;
    std::size_t start = 0;
    bool in_token = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        bool word = is_word_char(static_cast<unsigned char>(text[i]));
        if (word && !in_token) {
            start = i;
            in_token = true;
        } else if (!word && in_token) {
            offsets.push_back({start, i});
            in_token = false;
        }
    }
    if (in_token) offsets.push_back({start, text.size()});
    return offsets;
}

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t start,
                        std::size_t end) {
    std::string out;
    for (std::size_t i = start; i < end && i < tokens.size(); ++i) {
        if (i > start) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

std::optional<TokenSpan> locate_rationale(const std::vector<std::string>& doc_tokens,
                                          const std::string& rationale_text) {
    std::vector<std::string> needle = tokenize(rationale_text);
    if (needle.empty() || needle.size() > doc_tokens.size()) return std::nullopt;
    auto it = std::search(doc_tokens.begin(), doc_tokens.end(), needle.begin(),
                          needle.end());
    if (it == doc_tokens.end()) return std::nullopt;
    auto start = static_cast<std::size_t>(it - doc_tokens.begin());
    return TokenSpan{start, start + needle.size()};
}

Corpus filter_annotated(const Corpus& corpus, std::size_t min_len, std::size_t max_len,
                        IngestSummary* summary) {
    Corpus out;
    out.source_path = corpus.source_path;
    out.documents.reserve(corpus.documents.size());
    for (const auto& doc : corpus.documents) {
        Document copy = doc;
        copy.rationale_spans.clear();
        for (const auto& span : doc.rationale_spans) {
            if (span.length() >= min_len && span.length() <= max_len) {
                copy.rationale_spans.push_back(span);
            } else if (summary) {
                ++summary->spans_dropped;
            }
        }
        if (summary && copy.label == Label::Responsive && !copy.rationale_spans.empty()) {
            ++summary->annotated_documents;
        }
        out.documents.push_back(std::move(copy));
    }
    return out;
}

FoldAssignment make_folds(const Corpus& corpus, int k, std::uint64_t seed) {
    std::vector<const Document*> docs;
    docs.reserve(corpus.documents.size());
    for (const auto& d : corpus.documents) docs.push_back(&d);
    return make_folds(docs, k, seed);
}

FoldAssignment make_folds(const std::vector<const Document*>& docs, int k,
                          std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("make_folds: fold count must be >= 2");
    if (docs.empty()) throw std::invalid_argument("make_folds: empty corpus");

    // Group ids by label in a fixed class order, then shuffle each class and
    // deal round-robin so per-class fold sizes differ by at most one.
    std::map<Label, std::vector<std::string>> by_label;
    for (const auto* doc : docs) by_label[doc->label].push_back(doc->id);

    FoldAssignment folds;
    folds.k = k;
    folds.seed = seed;
    Rng rng(seed);
    for (Label label : {Label::Responsive, Label::NotResponsive, Label::Unlabeled}) {
        auto it = by_label.find(label);
        if (it == by_label.end()) continue;
        auto& ids = it->second;
        if (ids.size() < static_cast<std::size_t>(k)) {
            throw std::invalid_argument(std::string("make_folds: class ") +
                                        label_name(label) + " has " +
                                        std::to_string(ids.size()) +
                                        " documents, fewer than " + std::to_string(k) +
                                        " folds");
        }
        std::sort(ids.begin(), ids.end());
        shuffle(ids, rng);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            auto [pos, inserted] = folds.fold_of.emplace(ids[i], static_cast<int>(i % k));
            if (!inserted) {
                throw std::invalid_argument("make_folds: duplicate document id " + ids[i]);
            }
        }
    }
    return folds;
}

namespace {

TokenSpan parse_span(const json& value, std::size_t token_count, const std::string& id) {
    if (!value.is_array() || value.size() != 2 || !value[0].is_number_integer() ||
        !value[1].is_number_integer()) {
        throw std::runtime_error("corpus: document " + id +
                                 " has a malformed rationale span");
    }
    auto start = value[0].get<std::int64_t>();
    auto end = value[1].get<std::int64_t>();
    if (start < 0 || end <= start || static_cast<std::size_t>(end) > token_count) {
        throw std::runtime_error("corpus: document " + id +
                                 " rationale span out of bounds");
    }
    return TokenSpan{static_cast<std::size_t>(start), static_cast<std::size_t>(end)};
}

}  // namespace

Corpus load_corpus_jsonl(const std::string& path, IngestSummary* summary) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("corpus: cannot open " + path);

    Corpus corpus;
    corpus.source_path = path;
    std::unordered_map<std::string, bool> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error("corpus: " + path + " line " +
                                     std::to_string(line_no) + ": " + e.what());
        }
        if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string() ||
            !obj.contains("text") || !obj["text"].is_string()) {
            throw std::runtime_error("corpus: " + path + " line " +
                                     std::to_string(line_no) +
                                     ": each record needs string id and text");
        }
        Document doc;
        doc.id = obj["id"].get<std::string>();
        if (!seen_ids.emplace(doc.id, true).second) {
            throw std::runtime_error("corpus: duplicate document id " + doc.id);
        }
        doc.raw_text = obj["text"].get<std::string>();
        doc.tokens = tokenize(doc.raw_text);

        if (obj.contains("label") && !obj["label"].is_null()) {
            if (!obj["label"].is_string()) {
                throw std::runtime_error("corpus: document " + doc.id +
                                         " label must be a string or null");
            }
            auto label = label_from_name(obj["label"].get<std::string>());
            if (!label) {
                throw std::runtime_error("corpus: document " + doc.id +
                                         " has unknown label \"" +
                                         obj["label"].get<std::string>() + "\"");
            }
            doc.label = *label;
        }

        bool has_spans = obj.contains("rationale_spans") && !obj["rationale_spans"].is_null();
        bool has_texts = obj.contains("rationales") && !obj["rationales"].is_null();
        if (has_spans) {
            // Explicit spans win over rationale strings.
            for (const auto& value : obj["rationale_spans"]) {
                doc.rationale_spans.push_back(parse_span(value, doc.tokens.size(), doc.id));
                if (summary) ++summary->rationales_located;
            }
        } else if (has_texts) {
            for (const auto& value : obj["rationales"]) {
                if (!value.is_string()) {
                    throw std::runtime_error("corpus: document " + doc.id +
                                             " rationales must be strings");
                }
                auto span = locate_rationale(doc.tokens, value.get<std::string>());
                if (span) {
                    doc.rationale_spans.push_back(*span);
                    if (summary) ++summary->rationales_located;
                } else if (summary) {
                    ++summary->rationales_unlocated;
                }
            }
        }
        if (!doc.rationale_spans.empty() && doc.label != Label::Responsive) {
            throw std::runtime_error("corpus: document " + doc.id +
                                     " carries rationales but is not responsive");
        }

        if (summary) {
            ++summary->documents;
            switch (doc.label) {
                case Label::Responsive: ++summary->responsive; break;
                case Label::NotResponsive: ++summary->not_responsive; break;
                case Label::Unlabeled: ++summary->unlabeled; break;
            }
        }
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

void save_corpus_jsonl(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("corpus: cannot write " + path);
    for (const auto& doc : corpus.documents) {
        json obj;
        obj["id"] = doc.id;
        obj["text"] = doc.raw_text;
        if (doc.label == Label::Unlabeled) {
            obj["label"] = nullptr;
        } else {
            obj["label"] = label_name(doc.label);
        }
        if (!doc.rationale_spans.empty()) {
            json spans = json::array();
            for (const auto& span : doc.rationale_spans) {
                spans.push_back({span.start, span.end});
            }
            obj["rationale_spans"] = std::move(spans);
        }
        out << obj.dump() << '\n';
    }
    if (!out) throw std::runtime_error("corpus: failed writing " + path);
}

}  // namespace revex

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "revex/corpus.hpp"
#include "revex/features.hpp"
#include "revex/model.hpp"

namespace testutil {

using namespace revex;

inline Document make_doc(std::string id, std::vector<std::string> tokens,
                         Label label = Label::Unlabeled,
                         std::vector<TokenSpan> spans = {}) {
    Document d;
    d.id = std::move(id);
    d.tokens = std::move(tokens);
    d.raw_text = join_tokens(d.tokens, 0, d.tokens.size());
    d.label = label;
    d.rationale_spans = std::move(spans);
    return d;
}

inline Vocabulary make_vocab(const std::vector<std::string>& tokens) {
    Vocabulary v;
    v.tokens = tokens;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        v.index.emplace(tokens[i], static_cast<std::uint32_t>(i));
    }
    return v;
}

inline LinearModel make_model(const std::vector<std::string>& vocab_tokens,
                              const std::vector<double>& weights, double bias) {
    LinearModel m;
    m.vocab = make_vocab(vocab_tokens);
    m.weights = weights;
    m.bias = bias;
    return m;
}

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("revex_test_" + std::to_string(stamp) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("test: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("test: cannot write " + path);
    out << content;
}

// ---- HTML verification helpers ----------------------------------------

inline std::string extract_pre(const std::string& html) {
    const std::string open = "<pre id=\"doc\">";
    auto start = html.find(open);
    auto end = html.rfind("</pre>");
    if (start == std::string::npos || end == std::string::npos || end < start) {
        throw std::runtime_error("test: html missing document block");
    }
    return html.substr(start + open.size(), end - start - open.size());
}

inline std::string strip_tags(const std::string& html) {
    std::string out;
    bool in_tag = false;
    for (char c : html) {
        if (c == '<') {
            in_tag = true;
        } else if (c == '>') {
            in_tag = false;
        } else if (!in_tag) {
            out.push_back(c);
        }
    }
    return out;
}

inline std::string unescape_entities(const std::string& text) {
    std::string out;
    for (std::size_t i = 0; i < text.size();) {
        if (text.compare(i, 5, "&amp;") == 0) {
            out.push_back('&');
            i += 5;
        } else if (text.compare(i, 4, "&lt;") == 0) {
            out.push_back('<');
            i += 4;
        } else if (text.compare(i, 4, "&gt;") == 0) {
            out.push_back('>');
            i += 4;
        } else {
            out.push_back(text[i]);
            ++i;
        }
    }
    return out;
}

inline std::string html_text_content(const std::string& html) {
    return unescape_entities(strip_tags(extract_pre(html)));
}

}  // namespace testutil

#include "revex/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "revex/corpus.hpp"
#include "revex/eval.hpp"
#include "revex/explain.hpp"
#include "revex/model.hpp"
#include "revex/parallel.hpp"
#include "revex/report.hpp"
#include "revex/synth.hpp"

namespace revex {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string even_window(const std::string& value) {
    long long n = 0;
    try {
        n = std::stoll(value);
    } catch (...) {
        return "snippet size must be an integer";
    }
    if (n < 2 || n % 2 != 0) return "snippet size must be even and >= 2";
    return {};
}

std::vector<double> parse_weights(const std::string& text) {
    std::vector<double> weights;
    std::stringstream stream(text);
    std::string part;
    while (std::getline(stream, part, ',')) {
        weights.push_back(std::stod(part));
    }
    if (weights.size() != 3) {
        throw std::runtime_error("expected three comma-separated weights");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::runtime_error("weights must be nonnegative");
        sum += w;
    }
    if (sum <= 0.0) throw std::runtime_error("at least one weight must be positive");
    return weights;
}

std::string check_weights(const std::string& text) {
    try {
        parse_weights(text);
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> sizes;
    std::stringstream stream(text);
    std::string part;
    while (std::getline(stream, part, ',')) {
        long long n = std::stoll(part);
        if (n < 2 || n % 2 != 0) {
            throw std::runtime_error("snippet sizes must be even and >= 2");
        }
        sizes.push_back(static_cast<std::size_t>(n));
    }
    if (sizes.empty()) throw std::runtime_error("need at least one snippet size");
    return sizes;
}

std::string check_sizes(const std::string& text) {
    try {
        parse_sizes(text);
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path);
}

std::string safe_filename(const std::string& id) {
    std::string out;
    for (char c : id) {
        bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
                  (c >= 'A' && c <= 'Z') || c == '.' || c == '_' || c == '-';
        out.push_back(ok ? c : '_');
    }
    return out;
}

struct CommonTrainOpts {
    double l2_lambda = -1.0;
    int epochs = 500;
    double learning_rate = 1.0;
    double tol = 1e-6;
    std::uint64_t seed = 0;

    TrainConfig to_config() const {
        TrainConfig cfg;
        cfg.l2_lambda = l2_lambda;
        cfg.max_epochs = epochs;
        cfg.learning_rate = learning_rate;
        cfg.convergence_tol = tol;
        cfg.seed = seed;
        return cfg;
    }
};

void add_train_opts(CLI::App* cmd, CommonTrainOpts& opts) {
    cmd->add_option("--lambda", opts.l2_lambda,
                    "L2 strength; negative selects 1/N automatically");
    cmd->add_option("--epochs", opts.epochs, "maximum training epochs")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--lr", opts.learning_rate, "gradient-descent step size")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tol", opts.tol, "gradient max-norm convergence tolerance")
        ->check(CLI::PositiveNumber);
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"revex: explainable responsiveness classification for document review"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "config file (same keys as the flags; flags win)");

    // ---- synth ----------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate a planted-rationale corpus");
    std::string synth_out;
    SyntheticSpec spec;
    synth->add_option("--out", synth_out, "corpus JSONL path")->required();
    synth->add_option("--responsive", spec.responsive_docs, "responsive documents");
    synth->add_option("--not-responsive", spec.not_responsive_docs,
                      "not-responsive documents");
    synth->add_option("--filler-min", spec.filler_min, "minimum filler tokens");
    synth->add_option("--filler-max", spec.filler_max, "maximum filler tokens");
    synth->add_option("--span-min", spec.span_min, "minimum planted span length");
    synth->add_option("--span-max", spec.span_max, "maximum planted span length");
    synth->add_option("--resp-vocab", spec.responsive_vocab, "responsive vocabulary size");
    synth->add_option("--filler-vocab", spec.filler_vocab, "filler vocabulary size");
    synth->add_option("--shared", spec.shared_fraction,
                      "fraction of responsive vocabulary shared with filler")
        ->check(CLI::Range(0.0, 1.0));
    synth->add_option("--spans-per-doc", spec.spans_per_doc, "planted spans per document")
        ->check(CLI::PositiveNumber);
    synth->add_option("--seed", spec.seed, "generator seed");

    // ---- ingest ---------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest",
                                      "load a corpus, locate and filter rationales");
    std::string ingest_corpus, ingest_out;
    std::size_t min_rationale = 10, max_rationale = 249;
    ingest->add_option("--corpus", ingest_corpus, "input corpus JSONL")->required();
    ingest->add_option("--out", ingest_out, "normalized corpus JSONL")->required();
    ingest->add_option("--min-rationale", min_rationale,
                       "minimum rationale length in tokens");
    ingest->add_option("--max-rationale", max_rationale,
                       "maximum rationale length in tokens");

    // ---- train ----------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "train the document model");
    std::string train_corpus, train_out;
    std::size_t vocab_cap = 20000;
    CommonTrainOpts train_opts;
    train_cmd->add_option("--corpus", train_corpus, "labeled corpus JSONL")->required();
    train_cmd->add_option("--out", train_out, "model JSON path")->required();
    train_cmd->add_option("--vocab-cap", vocab_cap, "vocabulary size cap")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", train_opts.seed, "training seed");
    add_train_opts(train_cmd, train_opts);

    // ---- score ----------------------------------------------------------
    auto* score_cmd = app.add_subcommand("score", "score documents with a model");
    std::string score_model, score_corpus, score_out, score_format = "json";
    unsigned score_jobs = 1;
    score_cmd->add_option("--model", score_model, "model JSON")->required();
    score_cmd->add_option("--corpus", score_corpus, "corpus JSONL")->required();
    score_cmd->add_option("--out", score_out, "output path")->required();
    score_cmd->add_option("--format", score_format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    score_cmd->add_option("--jobs", score_jobs, "worker threads")
        ->check(CLI::PositiveNumber);

    // ---- explain --------------------------------------------------------
    auto* explain_cmd = app.add_subcommand("explain", "emit per-document explanations");
    std::string explain_model, explain_corpus, explain_out, explain_format = "json";
    std::string explain_weights = "0.7,0.2,0.1", explain_mode = "score";
    std::string explain_method = "score-fusion";
    std::size_t snippet_size = 50, explain_top_k = 5, keyword_top_n = 100;
    int rrf_k = 60;
    double explain_cutoff = 0.5;
    bool explain_all = false;
    unsigned explain_jobs = 1;
    explain_cmd->add_option("--model", explain_model, "model JSON")->required();
    explain_cmd->add_option("--corpus", explain_corpus, "corpus JSONL")->required();
    explain_cmd->add_option("--out", explain_out,
                            "output path (a directory for --format html)")
        ->required();
    explain_cmd->add_option("--snippet-size", snippet_size, "window size in tokens")
        ->check(even_window);
    explain_cmd->add_option("--top-k", explain_top_k, "snippets highlighted per document")
        ->check(CLI::PositiveNumber);
    explain_cmd->add_option("--weights", explain_weights, "fusion weights w1,w2,w3")
        ->check(check_weights);
    explain_cmd->add_option("--mode", explain_mode, "fusion mode")
        ->check(CLI::IsMember({"score", "rank"}));
    explain_cmd->add_option("--rrf-k", rrf_k, "reciprocal-rank constant")
        ->check(CLI::NonNegativeNumber);
    auto* method_opt =
        explain_cmd->add_option("--method", explain_method,
                                "snippet ordering method (default follows --mode)")
            ->check(CLI::IsMember({"snippet", "complement", "keyword", "score-fusion",
                                   "rank-fusion"}));
    explain_cmd->add_option("--keywords", keyword_top_n, "keyword lexicon size")
        ->check(CLI::PositiveNumber);
    explain_cmd->add_option("--cutoff", explain_cutoff,
                            "responsive classification cutoff")
        ->check(CLI::Range(0.0, 1.0));
    explain_cmd->add_flag("--all", explain_all,
                          "explain every document, not only responsive-classified ones");
    explain_cmd->add_option("--format", explain_format, "json or html")
        ->check(CLI::IsMember({"json", "html"}));
    explain_cmd->add_option("--jobs", explain_jobs, "worker threads")
        ->check(CLI::PositiveNumber);

    // ---- evaluate -------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("evaluate",
                                        "cross-validated rationale-detection experiment");
    std::string eval_corpus, eval_out, eval_csv;
    std::string eval_sizes = "50,100,200", eval_weights = "0.7,0.2,0.1";
    std::string eval_match = "min", grid_mode = "score";
    std::size_t eval_top_k = 5, eval_vocab_cap = 20000, eval_keywords = 100;
    int eval_folds = 5, eval_rrf_k = 60;
    std::uint64_t eval_seed = 0;
    double cutoff_recall = 0.75, grid_step = 0.1;
    std::size_t grid_k = 1, grid_size = 50;
    bool grid_search = false;
    CommonTrainOpts eval_train;
    eval_cmd->add_option("--corpus", eval_corpus, "labeled, annotated corpus JSONL")
        ->required();
    eval_cmd->add_option("--out", eval_out, "results JSON path")->required();
    eval_cmd->add_option("--csv", eval_csv, "companion CSV path");
    eval_cmd->add_option("--snippet-sizes", eval_sizes, "comma-separated window sizes")
        ->check(check_sizes);
    eval_cmd->add_option("--top-k", eval_top_k, "recall@K upper bound")
        ->check(CLI::PositiveNumber);
    eval_cmd->add_option("--folds", eval_folds, "cross-validation folds")
        ->check(CLI::Range(2, 1000));
    eval_cmd->add_option("--seed", eval_seed, "fold assignment seed");
    eval_cmd->add_option("--cutoff-recall", cutoff_recall,
                         "target recall for the score cutoff")
        ->check(CLI::Range(0.0, 1.0));
    eval_cmd->add_option("--match-mode", eval_match, "true-rationale overlap criterion")
        ->check(CLI::IsMember({"min", "max"}));
    eval_cmd->add_option("--weights", eval_weights, "fusion weights w1,w2,w3")
        ->check(check_weights);
    eval_cmd->add_option("--rrf-k", eval_rrf_k, "reciprocal-rank constant")
        ->check(CLI::NonNegativeNumber);
    eval_cmd->add_option("--keywords", eval_keywords, "keyword lexicon size")
        ->check(CLI::PositiveNumber);
    eval_cmd->add_option("--vocab-cap", eval_vocab_cap, "vocabulary size cap")
        ->check(CLI::PositiveNumber);
    eval_cmd->add_flag("--grid-search", grid_search,
                       "grid-search fusion weights before scoring the tables");
    eval_cmd->add_option("--grid-step", grid_step, "weight lattice step");
    eval_cmd->add_option("--grid-k", grid_k, "grid objective recall@K")
        ->check(CLI::PositiveNumber);
    eval_cmd->add_option("--grid-size", grid_size, "grid objective snippet size")
        ->check(even_window);
    eval_cmd->add_option("--grid-mode", grid_mode, "grid objective fusion mode")
        ->check(CLI::IsMember({"score", "rank"}));
    add_train_opts(eval_cmd, eval_train);

    // ---- rescue ---------------------------------------------------------
    auto* rescue_cmd = app.add_subcommand("rescue",
                                          "surface likely false negatives below the cutoff");
    std::string rescue_model, rescue_corpus, rescue_out;
    std::size_t rescue_size = 50, rescue_top_m = 0;
    double rescue_cutoff = 0.5, rescue_theta = 0.8;
    rescue_cmd->add_option("--model", rescue_model, "model JSON")->required();
    rescue_cmd->add_option("--corpus", rescue_corpus, "corpus JSONL")->required();
    rescue_cmd->add_option("--out", rescue_out, "output JSON path")->required();
    rescue_cmd->add_option("--snippet-size", rescue_size, "window size in tokens")
        ->check(even_window);
    rescue_cmd->add_option("--cutoff", rescue_cutoff, "responsive cutoff score")
        ->check(CLI::Range(0.0, 1.0));
    auto* theta_opt = rescue_cmd->add_option("--theta", rescue_theta,
                                             "flag documents with best snippet score > theta")
                          ->check(CLI::Range(0.0, 1.0));
    auto* topm_opt =
        rescue_cmd->add_option("--top-m", rescue_top_m, "flag the top M documents instead")
            ->check(CLI::PositiveNumber);
    theta_opt->excludes(topm_opt);

    try {
        std::vector<const char*> argv;
        argv.reserve(args.size() + 1);
        argv.push_back("revex");
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (synth->parsed()) {
            Corpus corpus = synth_corpus(spec);
            save_corpus_jsonl(corpus, synth_out);
            std::cout << json{{"documents", corpus.documents.size()},
                              {"out", synth_out}}
                             .dump()
                      << '\n';
            return 0;
        }

        if (ingest->parsed()) {
            IngestSummary summary;
            Corpus corpus = load_corpus_jsonl(ingest_corpus, &summary);
            Corpus filtered = filter_annotated(corpus, min_rationale, max_rationale,
                                               &summary);
            save_corpus_jsonl(filtered, ingest_out);
            std::cout << summary_to_json(summary).dump() << '\n';
            return 0;
        }

        if (train_cmd->parsed()) {
            IngestSummary summary;
            Corpus corpus = load_corpus_jsonl(train_corpus, &summary);
            std::vector<const Document*> labeled;
            for (const auto& doc : corpus.documents) {
                if (doc.label != Label::Unlabeled) labeled.push_back(&doc);
            }
            if (labeled.empty()) throw std::runtime_error("train: corpus has no labels");
            Vocabulary vocab = build_vocabulary(labeled, vocab_cap);
            std::vector<FeatureVector> xs;
            std::vector<Label> ys;
            xs.reserve(labeled.size());
            for (const auto* doc : labeled) {
                xs.push_back(vectorize(doc->tokens, vocab));
                ys.push_back(doc->label);
            }
            LinearModel model = train(xs, ys, vocab, train_opts.to_config());
            save_model(model, train_out);
            if (!model.converged) {
                std::cerr << "warning: training stopped before convergence after "
                          << model.epochs_run << " epochs\n";
            }
            std::cout << json{{"out", train_out},
                              {"vocabulary", model.vocab.size()},
                              {"converged", model.converged},
                              {"epochs_run", model.epochs_run}}
                             .dump()
                      << '\n';
            return 0;
        }

        if (score_cmd->parsed()) {
            LinearModel model = load_model(score_model);
            Corpus corpus = load_corpus_jsonl(score_corpus);
            std::vector<double> ds(corpus.documents.size());
            parallel_for(corpus.documents.size(), score_jobs, [&](std::size_t i) {
                ds[i] = score(model, vectorize(corpus.documents[i].tokens, model.vocab));
            });
            std::ostringstream out;
            if (score_format == "csv") {
                out << "id,doc_score\n";
                for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
                    out << corpus.documents[i].id << ',' << ds[i] << '\n';
                }
            } else {
                for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
                    out << json{{"id", corpus.documents[i].id}, {"doc_score", ds[i]}}.dump()
                        << '\n';
                }
            }
            write_text(score_out, out.str());
            return 0;
        }

        if (explain_cmd->parsed()) {
            LinearModel model = load_model(explain_model);
            Corpus corpus = load_corpus_jsonl(explain_corpus);
            std::vector<double> weights = parse_weights(explain_weights);
            ExplainConfig config;
            config.keyword_top_n = keyword_top_n;
            config.fusion.snippet_weight = weights[0];
            config.fusion.complement_weight = weights[1];
            config.fusion.token_weight = weights[2];
            config.fusion.mode = explain_mode == "rank" ? FusionMode::RankBased
                                                        : FusionMode::ScoreBased;
            config.fusion.rrf_k = rrf_k;
            if (method_opt->count() == 0) {
                explain_method = explain_mode == "rank" ? "rank-fusion" : "score-fusion";
            }
            Method ordering = *method_from_name(explain_method);
            Explainer explainer(model, config);

            // Pick the documents first so worker output slots are stable.
            std::vector<const Document*> docs;
            for (const auto& doc : corpus.documents) {
                if (explain_all ||
                    score(model, vectorize(doc.tokens, model.vocab)) >= explain_cutoff) {
                    docs.push_back(&doc);
                }
            }
            std::vector<ExplanationReport> reports(docs.size());
            parallel_for(docs.size(), explain_jobs, [&](std::size_t i) {
                reports[i] = explainer.explain(*docs[i], snippet_size, explain_cutoff,
                                               ordering);
            });

            if (explain_format == "html") {
                fs::create_directories(explain_out);
                for (std::size_t i = 0; i < docs.size(); ++i) {
                    fs::path path = fs::path(explain_out) /
                                    (safe_filename(docs[i]->id) + ".html");
                    write_text(path.string(),
                               render_html(reports[i], *docs[i], explain_top_k));
                }
            } else {
                std::ostringstream out;
                for (const auto& report : reports) {
                    out << report_to_json(report).dump() << '\n';
                }
                write_text(explain_out, out.str());
            }
            std::cout << json{{"documents", docs.size()}, {"out", explain_out}}.dump()
                      << '\n';
            return 0;
        }

        if (eval_cmd->parsed()) {
            IngestSummary summary;
            Corpus corpus = load_corpus_jsonl(eval_corpus, &summary);
            Corpus filtered = filter_annotated(corpus, 10, 249, &summary);
            std::vector<double> weights = parse_weights(eval_weights);
            ExperimentConfig config;
            config.snippet_sizes = parse_sizes(eval_sizes);
            config.top_k = eval_top_k;
            config.folds = eval_folds;
            config.seed = eval_seed;
            config.target_recall = cutoff_recall;
            config.match_mode = eval_match == "max" ? MatchMode::MaxHalf
                                                    : MatchMode::MinHalf;
            config.fusion.snippet_weight = weights[0];
            config.fusion.complement_weight = weights[1];
            config.fusion.token_weight = weights[2];
            config.fusion.rrf_k = eval_rrf_k;
            config.vocab_cap = eval_vocab_cap;
            config.keyword_top_n = eval_keywords;
            eval_train.seed = eval_seed;
            config.train = eval_train.to_config();
            config.grid_search = grid_search;
            config.grid_step = grid_step;
            config.grid_objective_k = grid_k;
            config.grid_objective_size = grid_size;
            config.grid_objective_mode = grid_mode == "rank" ? FusionMode::RankBased
                                                             : FusionMode::ScoreBased;

            ExperimentResult result = run_experiment(filtered, config);
            write_text(eval_out, experiment_to_json(result).dump(2) + "\n");
            if (!eval_csv.empty()) write_text(eval_csv, experiment_to_csv(result));
            std::cout << json{{"out", eval_out},
                              {"recall_cells", result.recall.size()},
                              {"jaccard_cells", result.jaccard.size()}}
                             .dump()
                      << '\n';
            return 0;
        }

        if (rescue_cmd->parsed()) {
            LinearModel model = load_model(rescue_model);
            Corpus corpus = load_corpus_jsonl(rescue_corpus);
            RescueRule rule;
            if (topm_opt->count() > 0) {
                rule.kind = RescueRule::Kind::TopM;
                rule.m = rescue_top_m;
            } else {
                rule.kind = RescueRule::Kind::Threshold;
                rule.theta = rescue_theta;
            }
            std::vector<const Document*> docs;
            docs.reserve(corpus.documents.size());
            for (const auto& doc : corpus.documents) docs.push_back(&doc);
            std::vector<RescueCandidate> candidates =
                rescue_false_negatives(model, docs, rescue_cutoff, rescue_size, rule);
            write_text(rescue_out, rescue_to_json(candidates, rescue_cutoff, rule).dump(2) +
                                       "\n");
            std::cout << json{{"out", rescue_out}, {"flagged", candidates.size()}}.dump()
                      << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace revex

#include <cmath>
#include <fstream>

#include "doctest.h"
#include "revex/model.hpp"
#include "revex/rng.hpp"
#include "test_support.hpp"

using namespace revex;
using testutil::make_doc;
using testutil::make_model;
using testutil::make_vocab;
using testutil::TempDir;

namespace {

// Random 5-feature training problem plus random evaluation points.
struct ToyProblem {
    Vocabulary vocab = make_vocab({"f0", "f1", "f2", "f3", "f4"});
    std::vector<FeatureVector> xs;
    std::vector<Label> ys;

    explicit ToyProblem(Rng& rng, std::size_t examples = 12) {
        for (std::size_t i = 0; i < examples; ++i) {
            FeatureVector v;
            v.source_token_count = 10;
            for (std::uint32_t f = 0; f < 5; ++f) {
                if (rng.unit() < 0.7) v.values.emplace_back(f, 0.05 + 0.9 * rng.unit());
            }
            xs.push_back(std::move(v));
            ys.push_back(i % 2 == 0 ? Label::Responsive : Label::NotResponsive);
        }
    }
};

double finite_difference(const ToyProblem& p, double lambda, std::vector<double> w,
                         double b, int coord, double h) {
    // coord 5 perturbs the bias
    auto eval = [&](double delta) {
        std::vector<double> wp = w;
        double bp = b;
        if (coord < 5) {
            wp[static_cast<std::size_t>(coord)] += delta;
        } else {
            bp += delta;
        }
        return training_loss(p.xs, p.ys, lambda, wp, bp);
    };
    return (eval(h) - eval(-h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("score is 0.5 for the zero model and follows the logistic") {
    LinearModel zero = make_model({"a", "b"}, {0.0, 0.0}, 0.0);
    FeatureVector v = vectorize(std::vector<std::string>{"a", "b"}, zero.vocab);
    CHECK(score(zero, v) == doctest::Approx(0.5));

    LinearModel m = make_model({"a"}, {1.0}, 0.0);
    FeatureVector half = vectorize(std::vector<std::string>{"a", "z"}, m.vocab);
    // margin 0.5
    CHECK(margin(m, half) == doctest::Approx(0.5));
    CHECK(score(m, half) == doctest::Approx(0.6224593312018546).epsilon(1e-12));
    CHECK(score(m, half) == doctest::Approx(0.6225).epsilon(1e-4));
}

TEST_CASE("score is strictly monotone in a positive-weight feature") {
    LinearModel m = make_model({"a", "b"}, {2.0, -1.0}, 0.1);
    double previous = -1.0;
    for (int count = 0; count <= 6; ++count) {
        std::vector<std::string> tokens(6 - count, "b");
        tokens.insert(tokens.end(), count, "a");
        double ds = score(m, vectorize(tokens, m.vocab));
        CHECK(ds > previous);
        CHECK(ds > 0.0);
        CHECK(ds < 1.0);
        previous = ds;
    }
}

TEST_CASE("train separates a separable toy corpus") {
    Vocabulary vocab = make_vocab({"win", "lose"});
    std::vector<FeatureVector> xs{vectorize(std::vector<std::string>{"win"}, vocab),
                                  vectorize(std::vector<std::string>{"lose"}, vocab)};
    std::vector<Label> ys{Label::Responsive, Label::NotResponsive};
    TrainConfig cfg;
    cfg.l2_lambda = 0.01;
    cfg.max_epochs = 2000;
    cfg.learning_rate = 1.0;
    cfg.convergence_tol = 1e-8;
    LinearModel m = train(xs, ys, vocab, cfg);
    CHECK(score(m, xs[0]) > 0.5);
    CHECK(score(m, xs[1]) < 0.5);
}

TEST_CASE("train with zero epochs leaves the zero model") {
    Vocabulary vocab = make_vocab({"a", "b"});
    std::vector<FeatureVector> xs{vectorize(std::vector<std::string>{"a"}, vocab),
                                  vectorize(std::vector<std::string>{"b"}, vocab)};
    std::vector<Label> ys{Label::Responsive, Label::NotResponsive};
    TrainConfig cfg;
    cfg.max_epochs = 0;
    LinearModel m = train(xs, ys, vocab, cfg);
    for (double w : m.weights) CHECK(w == 0.0);
    CHECK(m.bias == 0.0);
    CHECK(score(m, xs[0]) == doctest::Approx(0.5));
    CHECK(score(m, xs[1]) == doctest::Approx(0.5));
}

TEST_CASE("train rejects single-class input") {
    Vocabulary vocab = make_vocab({"a"});
    std::vector<FeatureVector> xs{vectorize(std::vector<std::string>{"a"}, vocab),
                                  vectorize(std::vector<std::string>{"a"}, vocab)};
    std::vector<Label> ys{Label::Responsive, Label::Responsive};
    CHECK_THROWS_AS(train(xs, ys, vocab, TrainConfig{}), std::invalid_argument);
}

TEST_CASE("analytic gradient matches central finite differences") {
    Rng rng(101);
    ToyProblem p(rng);
    const double lambda = 0.37;
    const double h = 1e-6;
    for (int point = 0; point < 10; ++point) {
        std::vector<double> w(5);
        for (auto& x : w) x = -2.0 + 4.0 * rng.unit();
        double b = -1.0 + 2.0 * rng.unit();
        LossGradient g = training_gradient(p.xs, p.ys, lambda, w, b);
        for (int coord = 0; coord <= 5; ++coord) {
            double fd = finite_difference(p, lambda, w, b, coord, h);
            double analytic = coord < 5 ? g.weight_grad[static_cast<std::size_t>(coord)]
                                        : g.bias_grad;
            double denom = std::max({std::abs(analytic), std::abs(fd), 1e-10});
            CHECK(std::abs(analytic - fd) / denom < 1e-5);
        }
    }
}

TEST_CASE("regularized training reaches the same loss from any seed") {
    Rng rng(55);
    ToyProblem p(rng);
    TrainConfig cfg;
    cfg.l2_lambda = 0.1;
    cfg.max_epochs = 4000;
    cfg.learning_rate = 2.0;
    cfg.convergence_tol = 1e-9;
    TrainConfig other = cfg;
    other.seed = 999;
    LinearModel a = train(p.xs, p.ys, p.vocab, cfg);
    LinearModel b = train(p.xs, p.ys, p.vocab, other);
    double loss_a = training_loss(p.xs, p.ys, 0.1, a.weights, a.bias);
    double loss_b = training_loss(p.xs, p.ys, 0.1, b.weights, b.bias);
    CHECK(std::abs(loss_a - loss_b) < 10.0 * cfg.convergence_tol);
}

TEST_CASE("unconverged training is reported, not failed") {
    Vocabulary vocab = make_vocab({"a", "b"});
    std::vector<FeatureVector> xs{vectorize(std::vector<std::string>{"a"}, vocab),
                                  vectorize(std::vector<std::string>{"b"}, vocab)};
    std::vector<Label> ys{Label::Responsive, Label::NotResponsive};
    TrainConfig cfg;
    cfg.max_epochs = 1;
    cfg.convergence_tol = 1e-15;
    LinearModel m = train(xs, ys, vocab, cfg);
    CHECK_FALSE(m.converged);
    CHECK(m.epochs_run == 1);
}

TEST_CASE("select_cutoff matches the quantile rule") {
    std::vector<double> scores{0.95, 0.9, 0.8, 0.6, 0.4, 0.3, 0.2, 0.1};
    CHECK(select_cutoff(scores, 0.75) == doctest::Approx(0.3));
    CHECK(select_cutoff(scores, 1.0) == doctest::Approx(0.1));
    CHECK(select_cutoff({0.7}, 0.75) == doctest::Approx(0.7));
    CHECK(select_cutoff({0.7}, 0.2) == doctest::Approx(0.7));
}

TEST_CASE("select_cutoff achieves the target and is tight on distinct scores") {
    Rng rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t n = 1 + rng.bounded(120);
        std::vector<double> scores;
        while (scores.size() < n) {
            double s = rng.unit();
            bool dup = false;
            for (double other : scores) {
                if (other == s) dup = true;
            }
            if (!dup) scores.push_back(s);
        }
        double cutoff = select_cutoff(scores, 0.75);
        std::size_t kept = 0;
        for (double s : scores) {
            if (s >= cutoff) ++kept;
        }
        double achieved = static_cast<double>(kept) / static_cast<double>(n);
        CHECK(achieved >= 0.75);
        // dropping the cutoff's own score falls below the target
        CHECK(static_cast<double>(kept - 1) / static_cast<double>(n) < 0.75);
    }
}

TEST_CASE("model save/load round trip preserves scores bit-exactly") {
    TempDir dir;
    Rng rng(13);
    std::vector<std::string> vocab_tokens;
    for (int i = 0; i < 40; ++i) vocab_tokens.push_back("t" + std::to_string(i));
    std::vector<double> weights(vocab_tokens.size());
    for (auto& w : weights) w = -3.0 + 6.0 * rng.unit();
    LinearModel m = make_model(vocab_tokens, weights, 0.371);

    std::string path = dir.file("model.json");
    save_model(m, path);
    LinearModel loaded = load_model(path);
    REQUIRE(loaded.vocab.tokens == m.vocab.tokens);

    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> tokens(1 + rng.bounded(30));
        for (auto& t : tokens) t = vocab_tokens[rng.bounded(vocab_tokens.size())];
        FeatureVector v = vectorize(tokens, m.vocab);
        CHECK(score(loaded, v) == score(m, v));  // bit-identical
    }
}

TEST_CASE("model load failures are explicit") {
    TempDir dir;
    SUBCASE("truncated file") {
        std::string path = dir.file("model.json");
        LinearModel m = make_model({"a"}, {1.5}, -0.25);
        save_model(m, path);
        std::string content = testutil::read_file(path);
        testutil::write_file(path, content.substr(0, content.size() / 2));
        CHECK_THROWS(load_model(path));
    }
    SUBCASE("unknown format version is named") {
        std::string path = dir.file("model.json");
        testutil::write_file(path,
                             R"({"format_version":7,"vocabulary":[],"weights":[],"bias":0})");
        try {
            load_model(path);
            FAIL("expected a load error");
        } catch (const std::exception& e) {
            CHECK(std::string(e.what()).find("7") != std::string::npos);
        }
    }
    SUBCASE("weight count mismatch") {
        std::string path = dir.file("model.json");
        testutil::write_file(
            path, R"({"format_version":1,"vocabulary":["a","b"],"weights":[0.5],"bias":0})");
        CHECK_THROWS(load_model(path));
    }
}

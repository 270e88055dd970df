#include "revex/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace revex {

using nlohmann::json;

double sigmoid(double m) {
    if (m >= 0.0) {
        double e = std::exp(-m);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(m);
    return e / (1.0 + e);
}

namespace {

// Scores live in the open interval: downstream ratios divide by DS and the
// complement arithmetic assumes DS > 0.
double clamp_probability(double p) {
    const double lo = std::numeric_limits<double>::min();
    const double hi = std::nextafter(1.0, 0.0);
    return std::min(hi, std::max(lo, p));
}

double label_target(Label label) {
    switch (label) {
        case Label::Responsive: return 1.0;
        case Label::NotResponsive: return 0.0;
        case Label::Unlabeled: break;
    }
    throw std::invalid_argument("train: unlabeled document in training set");
}

// log(1 + e^m) without overflow
double softplus(double m) {
    if (m > 0.0) return m + std::log1p(std::exp(-m));
    return std::log1p(std::exp(m));
}

}  // namespace

double margin(const LinearModel& model, const FeatureVector& v) {
    double m = model.bias;
    for (const auto& [idx, value] : v.values) m += model.weights[idx] * value;
    return m;
}

double score(const LinearModel& model, const FeatureVector& v) {
    return clamp_probability(sigmoid(margin(model, v)));
}

double training_loss(std::span<const FeatureVector> vectors, std::span<const Label> labels,
                     double l2_lambda, std::span<const double> weights, double bias) {
    if (vectors.size() != labels.size() || vectors.empty()) {
        throw std::invalid_argument("training_loss: size mismatch or empty input");
    }
    double nll = 0.0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        double m = bias;
        for (const auto& [idx, value] : vectors[i].values) m += weights[idx] * value;
        nll += softplus(m) - label_target(labels[i]) * m;
    }
    double reg = 0.0;
    for (double w : weights) reg += w * w;
    return nll + 0.5 * l2_lambda * reg;
}

LossGradient training_gradient(std::span<const FeatureVector> vectors,
                               std::span<const Label> labels, double l2_lambda,
                               std::span<const double> weights, double bias) {
    if (vectors.size() != labels.size() || vectors.empty()) {
        throw std::invalid_argument("training_gradient: size mismatch or empty input");
    }
    LossGradient g;
    g.weight_grad.assign(weights.size(), 0.0);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        double m = bias;
        for (const auto& [idx, value] : vectors[i].values) m += weights[idx] * value;
        double residual = sigmoid(m) - label_target(labels[i]);
        for (const auto& [idx, value] : vectors[i].values) {
            g.weight_grad[idx] += residual * value;
        }
        g.bias_grad += residual;
    }
    for (std::size_t j = 0; j < weights.size(); ++j) {
        g.weight_grad[j] += l2_lambda * weights[j];
    }
    return g;
}

LinearModel train(const std::vector<FeatureVector>& vectors,
                  const std::vector<Label>& labels, const Vocabulary& vocab,
                  const TrainConfig& config) {
    if (vectors.size() != labels.size() || vectors.empty()) {
        throw std::invalid_argument("train: need matching non-empty vectors and labels");
    }
    std::size_t positives = 0;
    for (Label label : labels) {
        if (label_target(label) > 0.5) ++positives;
    }
    if (positives == 0 || positives == labels.size()) {
        throw std::invalid_argument("train: need at least one example of each class");
    }

    TrainConfig resolved = config;
    if (resolved.l2_lambda < 0.0) {
        resolved.l2_lambda = 1.0 / static_cast<double>(vectors.size());
    }

    LinearModel model;
    model.vocab = vocab;
    model.train_config = resolved;
    model.weights.assign(vocab.size(), 0.0);
    model.bias = 0.0;
    model.converged = false;

    // The bias column sees every example at value 1 while feature columns
    // carry normalized frequencies, so its curvature is ~N times larger.
    // Scaling its step by 1/N lets one learning rate serve both.
    const double bias_step =
        resolved.learning_rate / static_cast<double>(vectors.size());
    for (int epoch = 0; epoch < resolved.max_epochs; ++epoch) {
        LossGradient g = training_gradient(vectors, labels, resolved.l2_lambda,
                                           model.weights, model.bias);
        double gnorm = std::abs(g.bias_grad);
        for (double v : g.weight_grad) gnorm = std::max(gnorm, std::abs(v));
        if (gnorm < resolved.convergence_tol) {
            model.converged = true;
            break;
        }
        for (std::size_t j = 0; j < model.weights.size(); ++j) {
            model.weights[j] -= resolved.learning_rate * g.weight_grad[j];
        }
        model.bias -= bias_step * g.bias_grad;
        model.epochs_run = epoch + 1;
    }
    if (!model.converged) {
        LossGradient g = training_gradient(vectors, labels, resolved.l2_lambda,
                                           model.weights, model.bias);
        double gnorm = std::abs(g.bias_grad);
        for (double v : g.weight_grad) gnorm = std::max(gnorm, std::abs(v));
        model.converged = gnorm < resolved.convergence_tol;
    }
    return model;
}

double select_cutoff(const std::vector<double>& responsive_scores, double target_recall) {
    if (responsive_scores.empty()) {
        throw std::invalid_argument("select_cutoff: no responsive scores");
    }
    if (target_recall <= 0.0 || target_recall > 1.0) {
        throw std::invalid_argument("select_cutoff: target recall must be in (0, 1]");
    }
    std::vector<double> sorted = responsive_scores;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    auto r = static_cast<double>(sorted.size());
    auto idx = static_cast<std::size_t>(std::ceil(target_recall * r));
    idx = std::clamp<std::size_t>(idx, 1, sorted.size());
    return sorted[idx - 1];
}

void save_model(const LinearModel& model, const std::string& path) {
    if (model.weights.size() != model.vocab.size()) {
        throw std::invalid_argument("save_model: weight/vocabulary size mismatch");
    }
    for (double w : model.weights) {
        if (!std::isfinite(w)) throw std::invalid_argument("save_model: non-finite weight");
    }
    if (!std::isfinite(model.bias)) {
        throw std::invalid_argument("save_model: non-finite bias");
    }
    json obj;
    obj["format_version"] = 1;
    obj["config"] = {{"l2_lambda", model.train_config.l2_lambda},
                     {"max_epochs", model.train_config.max_epochs},
                     {"convergence_tol", model.train_config.convergence_tol},
                     {"learning_rate", model.train_config.learning_rate},
                     {"seed", model.train_config.seed}};
    obj["vocabulary"] = model.vocab.tokens;
    obj["weights"] = model.weights;
    obj["bias"] = model.bias;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_model: cannot write " + path);
    out << obj.dump() << '\n';
    if (!out) throw std::runtime_error("save_model: failed writing " + path);
}

LinearModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);
    json obj;
    try {
        obj = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("load_model: " + path + " is not valid JSON: " + e.what());
    }
    if (!obj.is_object() || !obj.contains("format_version")) {
        throw std::runtime_error("load_model: " + path + " has no format_version");
    }
    if (!obj["format_version"].is_number_integer() ||
        obj["format_version"].get<int>() != 1) {
        throw std::runtime_error("load_model: unsupported format_version " +
                                 obj["format_version"].dump() + " in " + path);
    }
    if (!obj.contains("vocabulary") || !obj.contains("weights") || !obj.contains("bias")) {
        throw std::runtime_error("load_model: " + path + " is missing required fields");
    }

    LinearModel model;
    model.vocab.tokens = obj["vocabulary"].get<std::vector<std::string>>();
    model.vocab.index.reserve(model.vocab.tokens.size());
    for (std::size_t i = 0; i < model.vocab.tokens.size(); ++i) {
        model.vocab.index.emplace(model.vocab.tokens[i], static_cast<std::uint32_t>(i));
    }
    model.weights = obj["weights"].get<std::vector<double>>();
    model.bias = obj["bias"].get<double>();
    if (model.weights.size() != model.vocab.size()) {
        throw std::runtime_error("load_model: " + path +
                                 " weight count does not match vocabulary");
    }
    if (obj.contains("config") && obj["config"].is_object()) {
        const auto& cfg = obj["config"];
        model.train_config.l2_lambda = cfg.value("l2_lambda", -1.0);
        model.train_config.max_epochs = cfg.value("max_epochs", 500);
        model.train_config.convergence_tol = cfg.value("convergence_tol", 1e-6);
        model.train_config.learning_rate = cfg.value("learning_rate", 1.0);
        model.train_config.seed = cfg.value("seed", std::uint64_t{0});
    }
    return model;
}

}  // namespace revex

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "revex/corpus.hpp"
#include "revex/features.hpp"

namespace revex {

struct TrainConfig {
    double l2_lambda = -1.0;  // < 0 selects 1/N at train time
    int max_epochs = 500;
    double convergence_tol = 1e-6;
    double learning_rate = 1.0;
    std::uint64_t seed = 0;
};

// Logistic-regression document model: per-feature weights plus bias.
// Immutable once trained; scoring is pure and thread-safe.
struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    Vocabulary vocab;
    TrainConfig train_config;
    bool converged = true;
    int epochs_run = 0;
};

double sigmoid(double margin);

double margin(const LinearModel& model, const FeatureVector& v);

// Probability score, clamped to the open interval (0, 1).
double score(const LinearModel& model, const FeatureVector& v);

// Objective minimized by train(): summed negative log-likelihood plus
// (lambda/2)*||w||^2. The bias is not regularized, and the default
// lambda = 1/N keeps the prior mild at any corpus size.
double training_loss(std::span<const FeatureVector> vectors, std::span<const Label> labels,
                     double l2_lambda, std::span<const double> weights, double bias);

struct LossGradient {
    std::vector<double> weight_grad;
    double bias_grad = 0.0;
};

LossGradient training_gradient(std::span<const FeatureVector> vectors,
                               std::span<const Label> labels, double l2_lambda,
                               std::span<const double> weights, double bias);

// Full-batch gradient descent from zero weights until the gradient max-norm
// drops below convergence_tol or max_epochs is reached. Deterministic given
// the config; non-convergence is recorded on the model, not an error.
LinearModel train(const std::vector<FeatureVector>& vectors,
                  const std::vector<Label>& labels, const Vocabulary& vocab,
                  const TrainConfig& config);

// The ceil(target_recall * R)-th highest responsive score; classifying
// DS >= cutoff as responsive then captures at least target_recall of the
// responsive documents.
double select_cutoff(const std::vector<double>& responsive_scores,
                     double target_recall = 0.75);

// Model file format, version 1:
//   {"format_version": 1, "config": {...}, "vocabulary": [token, ...],
//    "weights": [real, ...], "bias": real}
// Numbers round-trip exactly; load(save(m)) scores bit-identically.
void save_model(const LinearModel& model, const std::string& path);
LinearModel load_model(const std::string& path);

}  // namespace revex

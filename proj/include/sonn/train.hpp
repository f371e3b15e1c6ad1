#pragma once

// SGD/MSE training, early stopping, stratified k-fold cross-validation with
// several independent runs per fold.

#include "sonn/metrics.hpp"
#include "sonn/model.hpp"
#include "sonn/signal.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace sonn {

class KvConfig;

struct TrainConfig {
    double learning_rate = 0.2;
    std::size_t max_epochs = 50;
    double early_stop_train_error = 0.03;
    std::size_t folds = 10;
    std::size_t runs_per_fold = 5;
    std::size_t batch_size = 16;  ///< 0 means full batch
    std::uint64_t seed = 1;
    bool record_initial = false;  ///< also log the untrained model as epoch 0

    void validate() const;
};

/// Keys: lr, epochs, early_stop, folds, runs, batch_size, seed.
TrainConfig train_config_from_kv(const KvConfig& cfg);

struct LossResult {
    double loss = 0.0;
    std::vector<double> grad;
};

/// Mean squared error against +1 at `target` and -1 elsewhere.
LossResult mse_loss(std::span<const double> scores, int target);

/// w <- w - learning_rate * scale * g for every parameter.
void sgd_step(Model& model, const ModelGradients& grads, double learning_rate, double scale = 1.0);

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_error = 0.0;
};

struct TrainOutcome {
    Model model;
    std::size_t epochs = 0;
    std::vector<EpochLog> history;
};

/// Trains on dataset frames selected by `indices`. Reshuffles every epoch and
/// stops after the first epoch whose training error is at or below the threshold.
TrainOutcome train_one(Model model, const Dataset& data, std::span<const std::size_t> indices,
                       const TrainConfig& cfg, std::uint64_t run_seed);

struct Evaluation {
    EvalReport report;
    double mean_loss = 0.0;
    std::vector<int> predictions;
};

Evaluation evaluate(const Model& model, const Dataset& data, std::span<const std::size_t> indices);

/// Class-balanced assignment of dataset indices to `folds` test sets.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, std::size_t folds,
                                                       std::size_t classes, std::uint64_t seed);

/// Training indices for `fold`: every index not in its test set, ascending.
std::vector<std::size_t> training_indices(const std::vector<std::vector<std::size_t>>& folds, std::size_t fold);

struct RunResult {
    std::size_t run = 0;
    std::size_t epochs = 0;
    double final_train_error = 0.0;
    EvalReport test;
    std::vector<EpochLog> history;
    std::optional<Model> model;
};

struct FoldResult {
    std::size_t fold = 0;
    std::vector<RunResult> runs;
    EvalReport averaged;
};

struct CvResult {
    std::vector<FoldResult> folds;
    EvalReport pooled;  ///< metrics of the summed confusion matrix over every run
    EvalReport mean;    ///< arithmetic mean of every run's metrics

    std::vector<const RunResult*> all_runs() const;
};

struct CvOptions {
    std::size_t jobs = 1;
    bool keep_models = false;
};

/// Seeds for fold assignment, initialization and shuffling derive from cfg.seed only.
std::uint64_t fold_split_seed(const TrainConfig& cfg);
std::uint64_t run_init_seed(const TrainConfig& cfg, std::size_t fold, std::size_t run);
std::uint64_t run_shuffle_seed(const TrainConfig& cfg, std::size_t fold, std::size_t run);

CvResult cross_validate(const Dataset& data, const NetworkConfig& net, const TrainConfig& cfg,
                        const CvOptions& options = {});

}  // namespace sonn

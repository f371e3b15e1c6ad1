#include "sonn/train.hpp"

#include "sonn/errors.hpp"
#include "sonn/kv_config.hpp"
#include "sonn/rng.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace sonn {

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0)) throw ArgumentError("learning rate must be non-negative");
    if (!(early_stop_train_error >= 0.0 && early_stop_train_error < 1.0)) {
        throw ArgumentError("early-stop train error must lie in [0, 1)");
    }
    if (folds < 2) throw ArgumentError("cross-validation needs at least 2 folds");
    if (runs_per_fold == 0) throw ArgumentError("runs per fold must be positive");
}

TrainConfig train_config_from_kv(const KvConfig& kv) {
    TrainConfig cfg;
    cfg.learning_rate = kv.get_double("lr", cfg.learning_rate);
    cfg.max_epochs = kv.get_uint("epochs", cfg.max_epochs);
    cfg.early_stop_train_error = kv.get_double("early_stop", cfg.early_stop_train_error);
    cfg.folds = kv.get_uint("folds", cfg.folds);
    cfg.runs_per_fold = kv.get_uint("runs", cfg.runs_per_fold);
    cfg.batch_size = kv.get_uint("batch_size", cfg.batch_size);
    cfg.seed = kv.get_uint("seed", cfg.seed);
    cfg.validate();
    return cfg;
}

LossResult mse_loss(std::span<const double> scores, int target) {
    if (target < 0 || static_cast<std::size_t>(target) >= scores.size()) {
        throw ArgumentError("target class out of range");
    }
    const double n = static_cast<double>(scores.size());
    LossResult res;
    res.grad.resize(scores.size());
    for (std::size_t c = 0; c < scores.size(); ++c) {
        const double want = static_cast<int>(c) == target ? 1.0 : -1.0;
        const double diff = scores[c] - want;
        res.loss += diff * diff;
        res.grad[c] = 2.0 * diff / n;
    }
    res.loss /= n;
    return res;
}

void sgd_step(Model& model, const ModelGradients& grads, double learning_rate, double scale) {
    auto blocks = model.parameter_blocks();
    if (blocks.size() != grads.blocks.size()) throw ArgumentError("gradient bundle does not match the model");
    const double step = learning_rate * scale;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        auto w = blocks[b];
        const auto& g = grads.blocks[b];
        if (g.size() != w.size()) throw ArgumentError("gradient block size mismatch");
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * g[i];
    }
}

Evaluation evaluate(const Model& model, const Dataset& data, std::span<const std::size_t> indices) {
    Evaluation ev;
    std::vector<int> labels;
    ev.predictions.reserve(indices.size());
    labels.reserve(indices.size());
    ForwardTrace trace;
    double loss = 0.0;
    for (std::size_t idx : indices) {
        const Frame& f = data.frames.at(idx);
        forward_trace(model, frame_to_maps(f), trace);
        const int label = f.label.value();
        loss += mse_loss(trace.scores, label).loss;
        ev.predictions.push_back(predict(trace.scores));
        labels.push_back(label);
    }
    ev.mean_loss = indices.empty() ? 0.0 : loss / static_cast<double>(indices.size());
    ev.report = per_class(confusion(ev.predictions, labels, model.config.n_classes));
    return ev;
}

TrainOutcome train_one(Model model, const Dataset& data, std::span<const std::size_t> indices,
                       const TrainConfig& cfg, std::uint64_t run_seed) {
    if (indices.empty()) throw ArgumentError("training set is empty");
    TrainOutcome out;
    auto log_epoch = [&](std::size_t epoch) {
        const Evaluation ev = evaluate(model, data, indices);
        out.history.push_back({epoch, ev.mean_loss, 1.0 - ev.report.accuracy});
        return out.history.back();
    };
    if (cfg.record_initial) log_epoch(0);

    Rng rng(run_seed);
    std::vector<std::size_t> order(indices.begin(), indices.end());
    ModelGradients grads = ModelGradients::zeros_like(model);
    ForwardTrace trace;
    const std::size_t batch = cfg.batch_size == 0 ? order.size() : cfg.batch_size;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t stop = std::min(order.size(), start + batch);
            grads.clear();
            for (std::size_t s = start; s < stop; ++s) {
                const Frame& f = data.frames.at(order[s]);
                forward_trace(model, frame_to_maps(f), trace);
                const LossResult loss = mse_loss(trace.scores, f.label.value());
                backward(model, trace, loss.grad, grads);
            }
            sgd_step(model, grads, cfg.learning_rate, 1.0 / static_cast<double>(stop - start));
        }
        out.epochs = epoch;
        if (log_epoch(epoch).train_error <= cfg.early_stop_train_error) break;
    }
    out.model = std::move(model);
    return out;
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, std::size_t folds,
                                                       std::size_t classes, std::uint64_t seed) {
    if (folds < 2) throw ArgumentError("need at least 2 folds");
    std::vector<std::vector<std::size_t>> by_class(classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
            throw ArgumentError("label out of range at index " + std::to_string(i));
        }
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> out(folds);
    // Deal each shuffled class round-robin, continuing where the previous class
    // stopped so fold sizes also stay within one of each other.
    std::size_t next = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        auto& members = by_class[c];
        if (!members.empty() && members.size() < folds) {
            throw ArgumentError("class " + std::to_string(c) + " has fewer frames than folds");
        }
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t idx : members) {
            out[next].push_back(idx);
            next = (next + 1) % folds;
        }
    }
    for (auto& f : out) std::sort(f.begin(), f.end());
    return out;
}

std::vector<std::size_t> training_indices(const std::vector<std::vector<std::size_t>>& folds, std::size_t fold) {
    std::vector<std::size_t> train;
    for (std::size_t f = 0; f < folds.size(); ++f)
        if (f != fold) train.insert(train.end(), folds[f].begin(), folds[f].end());
    std::sort(train.begin(), train.end());
    return train;
}

std::vector<const RunResult*> CvResult::all_runs() const {
    std::vector<const RunResult*> runs;
    for (const auto& f : folds)
        for (const auto& r : f.runs) runs.push_back(&r);
    return runs;
}

std::uint64_t fold_split_seed(const TrainConfig& cfg) {
    return derive_seed({cfg.seed, 0xF01Dull});
}

std::uint64_t run_init_seed(const TrainConfig& cfg, std::size_t fold, std::size_t run) {
    return derive_seed({cfg.seed, fold, run, 1});
}

std::uint64_t run_shuffle_seed(const TrainConfig& cfg, std::size_t fold, std::size_t run) {
    return derive_seed({cfg.seed, fold, run, 2});
}

CvResult cross_validate(const Dataset& data, const NetworkConfig& net, const TrainConfig& cfg,
                        const CvOptions& options) {
    cfg.validate();
    net.validate();
    data.validate();
    if (data.class_names.size() != net.n_classes) {
        throw ArgumentError("dataset class count does not match the network output size");
    }
    const auto labels = data.labels();
    const auto folds = stratified_folds(labels, cfg.folds, net.n_classes, fold_split_seed(cfg));

    CvResult res;
    res.folds.resize(cfg.folds);
    for (std::size_t f = 0; f < cfg.folds; ++f) {
        res.folds[f].fold = f;
        res.folds[f].runs.resize(cfg.runs_per_fold);
    }

    // Every (fold, run) owns its model and RNG and writes only its own slot, so
    // the schedule cannot change any number.
    const std::size_t tasks = cfg.folds * cfg.runs_per_fold;
    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks; t = next++) try {
            const std::size_t f = t / cfg.runs_per_fold;
            const std::size_t r = t % cfg.runs_per_fold;
            const auto train = training_indices(folds, f);
            TrainOutcome trained =
                train_one(build_model(net, run_init_seed(cfg, f, r)), data, train, cfg, run_shuffle_seed(cfg, f, r));
            RunResult& slot = res.folds[f].runs[r];
            slot.run = r;
            slot.epochs = trained.epochs;
            slot.final_train_error = trained.history.empty() ? 1.0 : trained.history.back().train_error;
            slot.history = std::move(trained.history);
            slot.test = evaluate(trained.model, data, folds[f]).report;
            if (options.keep_models) slot.model = std::move(trained.model);
        } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = tasks;
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, tasks));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<EvalReport> every;
    ConfusionMatrix total(net.n_classes);
    for (auto& fold : res.folds) {
        std::vector<EvalReport> reports;
        for (const auto& run : fold.runs) {
            reports.push_back(run.test);
            every.push_back(run.test);
            total += run.test.matrix;
        }
        fold.averaged = average_reports(reports);
    }
    res.pooled = per_class(total);
    res.mean = average_reports(every);
    return res;
}

}  // namespace sonn

#include "sonn/cli.hpp"

#include "sonn/dataset.hpp"
#include "sonn/errors.hpp"
#include "sonn/gradcheck.hpp"
#include "sonn/kv_config.hpp"
#include "sonn/metrics.hpp"
#include "sonn/model.hpp"
#include "sonn/signal.hpp"
#include "sonn/synthgen.hpp"
#include "sonn/train.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace sonn {
namespace {

std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

ChannelPair parse_channels(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw ArgumentError("--channels expects two indices like 4,5");
    try {
        std::size_t p1 = 0;
        std::size_t p2 = 0;
        const auto a = std::stoul(text.substr(0, comma), &p1);
        const auto b = std::stoul(text.substr(comma + 1), &p2);
        if (p1 != comma || p2 != text.size() - comma - 1) throw std::invalid_argument("trailing");
        return {a, b};
    } catch (const std::exception&) {
        throw ArgumentError("--channels expects two indices like 4,5, got '" + text + "'");
    }
}

// Output sink: a file when --out is given, else the output stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw DataError("cannot write " + path);
            stream_ = file_.get();
        }
    }
    std::ostream& get() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

// Layered settings: built-in defaults < --config file < explicit flags.
struct Settings {
    std::string config_path;
    KvConfig kv;

    void load() {
        if (!config_path.empty()) kv = KvConfig::load(config_path);
    }
    template <typename T>
    void flag(const CLI::Option* opt, const std::string& key, const T& value) {
        if (opt->count() == 0) return;
        if constexpr (std::is_same_v<T, std::string>) {
            kv.set(key, value);
        } else if constexpr (std::is_floating_point_v<T>) {
            kv.set(key, fmt_double(value));
        } else {
            kv.set(key, std::to_string(value));
        }
    }
};

std::vector<std::pair<std::string, std::string>> synthetic_entries(const SyntheticDatasetSpec& s) {
    std::vector<std::pair<std::string, std::string>> e = {
        {"geometry.balls", std::to_string(s.geometry.balls)},
        {"geometry.ball_diameter", fmt_double(s.geometry.ball_diameter)},
        {"geometry.pitch_diameter", fmt_double(s.geometry.pitch_diameter)},
        {"geometry.contact_angle", fmt_double(s.geometry.contact_angle)},
        {"geometry.shaft_hz", fmt_double(s.geometry.shaft_hz)},
        {"profile.shaft_harmonics", std::to_string(s.profile.shaft_harmonics)},
        {"profile.defect_harmonics", std::to_string(s.profile.defect_harmonics)},
        {"profile.resonance_hz", fmt_double(s.profile.resonance_hz)},
        {"profile.ring_decay_s", fmt_double(s.profile.ring_decay_s)},
        {"profile.recording_jitter", fmt_double(s.profile.recording_jitter)},
        {"profile.impulse_jitter", fmt_double(s.profile.impulse_jitter)},
        {"synth.kind", std::string(fault_kind_name(s.kind))},
        {"synth.recordings_per_class", std::to_string(s.recordings_per_class)},
        {"synth.duration_s", fmt_double(s.duration_s)},
        {"synth.sample_rate", fmt_double(s.sample_rate)},
        {"synth.seed", std::to_string(s.seed)},
        {"frame_len", std::to_string(s.frame_len)},
    };
    for (std::size_t c = 0; c < kSeverityClasses; ++c) {
        const std::string p = "profile." + std::string(kSeverityNames[c]) + ".";
        const auto& z = s.profile.classes[c];
        e.emplace_back(p + "zone1", fmt_double(z.zone1));
        e.emplace_back(p + "zone2", fmt_double(z.zone2));
        e.emplace_back(p + "zone3", fmt_double(z.zone3));
        e.emplace_back(p + "noise", fmt_double(z.noise));
    }
    return e;
}

struct DataSource {
    std::string data_dir;
    std::string channels = "0,1";
    bool skip_header = false;
    std::size_t max_frames = 0;
};

void add_data_flags(CLI::App* cmd, DataSource& src) {
    cmd->add_option("--data-dir", src.data_dir, "Directory with healthy/ early/ moderate/ severe/ recordings");
    cmd->add_option("--channels", src.channels, "Column pair to read from each recording, e.g. 4,5");
    cmd->add_flag("--skip-header", src.skip_header, "Skip the first line of each recording");
    cmd->add_option("--max-frames", src.max_frames, "Cap on frames per class (0 keeps all)");
}

void print_cv(const CvResult& cv, const std::vector<std::string>& names, bool csv, std::ostream& out) {
    if (csv) {
        bool header = true;
        for (const auto& f : cv.folds) {
            write_report_csv(f.averaged, names, out, header, "fold" + std::to_string(f.fold));
            header = false;
        }
        write_report_csv(cv.mean, names, out, false, "mean");
        write_report_csv(cv.pooled, names, out, false, "pooled");
        return;
    }
    char line[160];
    for (const auto& f : cv.folds) {
        std::string epochs;
        for (const auto& r : f.runs) epochs += (epochs.empty() ? "" : " ") + std::to_string(r.epochs);
        std::snprintf(line, sizeof line, "fold %2zu  accuracy %.4f  mean F1 %.4f  epochs [%s]\n", f.fold,
                      f.averaged.accuracy, f.averaged.mean_f1(), epochs.c_str());
        out << line;
    }
    out << "\nmean over all runs\n";
    write_report_table(cv.mean, names, out);
    out << "\npooled confusion matrix\n";
    write_confusion_table(cv.pooled.matrix, names, out);
}

void print_model_eval(const EvalReport& rep, const std::vector<std::string>& names, bool csv, std::ostream& out) {
    if (csv) {
        write_report_csv(rep, names, out, true, "model");
        return;
    }
    write_report_table(rep, names, out);
    write_confusion_table(rep.matrix, names, out);
}

// ---------------------------------------------------------------------------

int cmd_complexity(Settings& s, const CLI::Option* q_opt, std::size_t q, bool csv, std::ostream& out) {
    s.load();
    s.flag(q_opt, "q", q);
    const NetworkConfig net = network_config_from_kv(s.kv);
    const ComplexityReport rep = complexity(net);
    if (csv) {
        out << "layer,params,macs\n";
        for (const auto& l : rep.layers) out << l.name << ',' << l.params << ',' << l.macs << '\n';
        out << "total," << rep.total_params << ',' << rep.total_macs << '\n';
        return 0;
    }
    char line[128];
    out << "network " << format_op_layers(net.op_layers) << " + (" << net.mlp_hidden << "-" << net.n_classes
        << ")\n";
    std::snprintf(line, sizeof line, "%-8s %12s %14s\n", "layer", "PARs", "MACs");
    out << line;
    for (const auto& l : rep.layers) {
        std::snprintf(line, sizeof line, "%-8s %12llu %14llu\n", l.name.c_str(),
                      static_cast<unsigned long long>(l.params), static_cast<unsigned long long>(l.macs));
        out << line;
    }
    std::snprintf(line, sizeof line, "%-8s %12llu %14llu  (%.3f M)\n", "total",
                  static_cast<unsigned long long>(rep.total_params), static_cast<unsigned long long>(rep.total_macs),
                  rep.macs_millions());
    out << line;
    return 0;
}

int cmd_gradcheck(std::uint64_t seed, std::size_t trials, std::ostream& out) {
    constexpr double kLimit = 1e-4;
    double worst = 0.0;
    char line[128];
    for (const auto& r : run_gradient_checks(seed, trials)) {
        std::snprintf(line, sizeof line, "%-12s %5zu instances  max rel err %.3e\n", r.layer.c_str(), r.instances,
                      r.max_rel_error);
        out << line;
        worst = std::max(worst, r.max_rel_error);
    }
    const bool pass = worst < kLimit;
    out << "max rel err < 1e-4: " << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? 0 : 2;
}

int cmd_synth(Settings& s, const std::string& cls, const std::string& kind, const CLI::Option* kind_opt,
              std::uint64_t seed, double duration, const std::string& out_path, std::ostream& out) {
    s.load();
    s.flag(kind_opt, "synth.kind", kind);
    const BearingGeometry geometry = geometry_from_config(s.kv);
    const SeverityProfile profile = profile_from_config(s.kv);
    const double rate = s.kv.get_double("synth.sample_rate", kImsSampleRate);
    const RawRecording rec = synthesize(geometry, parse_fault_kind(s.kv.get_string("synth.kind", "inner")),
                                        parse_severity(cls), profile, duration, rate, seed);
    Sink sink(out_path, out);
    write_csv(rec, sink.get());
    return 0;
}

int cmd_ingest(const std::string& file, const DataSource& src, std::size_t frame_len, const std::string& out_path,
               bool csv, std::ostream& out) {
    const RawRecording rec = read_recording(file, parse_channels(src.channels), src.skip_header);
    if (!out_path.empty()) {
        Sink sink(out_path, out);
        write_csv(rec, sink.get());
    }
    const auto frames = make_frames(rec, frame_len);
    if (csv) {
        out << "source,rows,sample_rate,frames,frame_len\n"
            << rec.source_id << ',' << rec.length() << ',' << rec.sample_rate << ',' << frames.size() << ','
            << frame_len << '\n';
    } else {
        out << "source:      " << rec.source_id << '\n'
            << "rows:        " << rec.length() << '\n'
            << "sample rate: " << rec.sample_rate << " Hz\n"
            << "channels:    " << rec.channels[0].name << ", " << rec.channels[1].name << '\n'
            << "frames:      " << frames.size() << " x " << frame_len << " samples\n";
    }
    return 0;
}

struct TrainFlags {
    std::size_t q = 1, folds = 10, runs = 5, epochs = 50, frame_len = kDefaultFrameLength, batch = 16, jobs = 1;
    std::uint64_t seed = 1;
    double lr = 0.2;
    std::string kind = "inner";
    std::string model_path, log_path, out_path;
    bool csv = false;
    CLI::Option *q_opt = nullptr, *folds_opt = nullptr, *runs_opt = nullptr, *epochs_opt = nullptr,
                *frame_opt = nullptr, *batch_opt = nullptr, *seed_opt = nullptr, *lr_opt = nullptr,
                *kind_opt = nullptr;
};

int cmd_train(Settings& s, TrainFlags& f, const DataSource& src, std::ostream& out, std::ostream& err) {
    s.load();
    s.flag(f.q_opt, "q", f.q);
    s.flag(f.folds_opt, "folds", f.folds);
    s.flag(f.runs_opt, "runs", f.runs);
    s.flag(f.epochs_opt, "epochs", f.epochs);
    s.flag(f.frame_opt, "frame_len", f.frame_len);
    s.flag(f.batch_opt, "batch_size", f.batch);
    s.flag(f.seed_opt, "seed", f.seed);
    s.flag(f.lr_opt, "lr", f.lr);
    s.flag(f.kind_opt, "synth.kind", f.kind);
    if (!s.kv.contains("synth.seed")) s.kv.set("synth.seed", s.kv.get_string("seed", "1"));

    const NetworkConfig net = network_config_from_kv(s.kv);
    const TrainConfig tcfg = train_config_from_kv(s.kv);

    std::map<std::string, std::string> meta;
    Dataset data;
    if (!src.data_dir.empty()) {
        data = load_dataset_dir(src.data_dir, parse_channels(src.channels), net.frame_len, src.skip_header,
                                src.max_frames);
        meta["data"] = "dir";
        meta["data_dir"] = src.data_dir;
        meta["channels"] = src.channels;
        meta["skip_header"] = src.skip_header ? "1" : "0";
        meta["max_frames"] = std::to_string(src.max_frames);
    } else {
        const SyntheticDatasetSpec spec = synthetic_spec_from_kv(s.kv);
        data = make_synthetic_dataset(spec);
        meta["data"] = "synthetic";
        for (const auto& [k, v] : synthetic_entries(spec)) meta[k] = v;
    }
    err << "training on " << data.size() << " frames, " << tcfg.folds << " folds x " << tcfg.runs_per_fold
        << " runs, network " << format_op_layers(net.op_layers) << '\n';

    CvOptions opts;
    opts.jobs = f.jobs;
    opts.keep_models = !f.model_path.empty();
    CvResult cv = cross_validate(data, net, tcfg, opts);

    Sink sink(f.out_path, out);
    print_cv(cv, data.class_names, f.csv, sink.get());

    if (!f.log_path.empty()) {
        Sink log(f.log_path, out);
        log.get() << "fold,run,epoch,train_loss,train_error\n";
        for (const auto& fold : cv.folds)
            for (const auto& run : fold.runs)
                for (const auto& e : run.history)
                    log.get() << fold.fold << ',' << run.run << ',' << e.epoch << ',' << fmt_double(e.train_loss)
                              << ',' << fmt_double(e.train_error) << '\n';
    }

    if (!f.model_path.empty()) {
        Model& model = *cv.folds[0].runs[0].model;
        model.metadata = meta;
        model.metadata["folds"] = std::to_string(tcfg.folds);
        model.metadata["fold"] = "0";
        model.metadata["run"] = "0";
        model.metadata["split_seed"] = std::to_string(fold_split_seed(tcfg));
        save_model_file(model, f.model_path);
        sink.get() << "\nsaved model (fold 0, run 0) test report\n";
        print_model_eval(cv.folds[0].runs[0].test, data.class_names, f.csv, sink.get());
    }
    return 0;
}

int cmd_eval(const std::string& model_path, DataSource src, const CLI::Option* fold_opt, std::size_t fold,
             bool csv, std::ostream& out) {
    const Model model = load_model_file(model_path);
    auto meta = [&](const std::string& key) -> std::optional<std::string> {
        if (auto it = model.metadata.find(key); it != model.metadata.end()) return it->second;
        return std::nullopt;
    };

    Dataset data;
    if (src.data_dir.empty() && meta("data") == "dir") {
        src.data_dir = meta("data_dir").value_or("");
        src.channels = meta("channels").value_or(src.channels);
        src.skip_header = meta("skip_header") == "1";
        src.max_frames = std::stoul(meta("max_frames").value_or("0"));
    }
    if (!src.data_dir.empty()) {
        data = load_dataset_dir(src.data_dir, parse_channels(src.channels), model.config.frame_len, src.skip_header,
                                src.max_frames);
    } else if (meta("data") == "synthetic") {
        KvConfig kv;
        for (const auto& [k, v] : model.metadata) kv.set(k, v);
        data = make_synthetic_dataset(synthetic_spec_from_kv(kv));
    } else {
        throw ArgumentError("model has no recorded data source; pass --data-dir");
    }

    std::vector<std::size_t> indices;
    const auto folds_meta = meta("folds");
    if (folds_meta && meta("split_seed")) {
        const auto folds = std::stoul(*folds_meta);
        const std::size_t which = fold_opt->count() ? fold : std::stoul(meta("fold").value_or("0"));
        if (which >= folds) throw ArgumentError("--fold must be below " + std::to_string(folds));
        const auto split = stratified_folds(data.labels(), folds, model.config.n_classes,
                                            std::stoull(*meta("split_seed")));
        indices = split[which];
    } else {
        indices.resize(data.size());
        for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    }
    const Evaluation ev = evaluate(model, data, indices);
    print_model_eval(ev.report, data.class_names, csv, out);
    return 0;
}

int cmd_classify(const std::string& model_path, const std::string& file, const DataSource& src, bool csv,
                 std::ostream& out) {
    const Model model = load_model_file(model_path);
    const RawRecording rec = read_recording(file, parse_channels(src.channels), src.skip_header);
    const auto frames = make_frames(rec, model.config.frame_len);
    if (frames.empty()) throw DataError("recording is shorter than one frame");
    if (csv) {
        out << "frame,class";
        for (std::size_t c = 0; c < model.config.n_classes; ++c) out << ",score" << c;
        out << '\n';
    }
    char buf[32];
    for (std::size_t j = 0; j < frames.size(); ++j) {
        const auto scores = forward(model, normalize_frame(frames[j]));
        const int cls = predict(scores);
        const std::string name = static_cast<std::size_t>(cls) < kSeverityNames.size()
                                     ? std::string(kSeverityNames[static_cast<std::size_t>(cls)])
                                     : std::to_string(cls);
        out << (csv ? "" : "frame ") << j << (csv ? "," : "  ") << name;
        for (double v : scores) {
            std::snprintf(buf, sizeof buf, csv ? ",%.6f" : " %+.4f", v);
            out << buf;
        }
        out << '\n';
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"1D Self-ONN bearing fault severity toolkit", "sonn-vibe"};
    app.require_subcommand(1, 1);

    Settings settings;
    std::function<int()> action;

    // complexity
    auto* cx = app.add_subcommand("complexity", "Report trainable parameters and MACs");
    std::size_t cx_q = 1;
    bool cx_csv = false;
    cx->add_option("--config", settings.config_path, "Key-value config file");
    auto* cx_q_opt = cx->add_option("--q", cx_q, "Polynomial order for every operational layer");
    cx->add_flag("--csv", cx_csv, "CSV output");
    cx->callback([&] { action = [&] { return cmd_complexity(settings, cx_q_opt, cx_q, cx_csv, out); }; });

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every layer's backward pass");
    std::uint64_t gc_seed = 1;
    std::size_t gc_trials = 100;
    gc->add_option("--seed", gc_seed, "Seed for the random layer instances");
    gc->add_option("--trials", gc_trials, "Instances per layer type")->check(CLI::PositiveNumber);
    gc->callback([&] { action = [&] { return cmd_gradcheck(gc_seed, gc_trials, out); }; });

    // synth
    auto* sy = app.add_subcommand("synth", "Generate a synthetic two-axis vibration recording as CSV");
    std::string sy_class, sy_kind = "inner", sy_out;
    std::uint64_t sy_seed = 1;
    double sy_duration = 1.0;
    sy->add_option("--config", settings.config_path, "Key-value config file");
    sy->add_option("--class", sy_class, "healthy, early, moderate or severe")->required();
    auto* sy_kind_opt = sy->add_option("--kind", sy_kind, "inner or rolling");
    sy->add_option("--seed", sy_seed, "Generator seed");
    sy->add_option("--duration", sy_duration, "Seconds of signal")->check(CLI::PositiveNumber);
    sy->add_option("--out", sy_out, "Output CSV (default: standard output)");
    sy->callback([&] {
        action = [&] {
            return cmd_synth(settings, sy_class, sy_kind, sy_kind_opt, sy_seed, sy_duration, sy_out, out);
        };
    });

    // ingest
    auto* in = app.add_subcommand("ingest", "Read an IMS or CSV recording and report its framing");
    std::string in_file, in_out;
    std::size_t in_frame_len = kDefaultFrameLength;
    bool in_csv = false;
    DataSource in_src;
    in->add_option("file", in_file, "Recording to read")->required();
    in->add_option("--channels", in_src.channels, "Column pair, e.g. 4,5");
    in->add_flag("--skip-header", in_src.skip_header, "Skip the first line");
    in->add_option("--frame-len", in_frame_len, "Samples per frame")->check(CLI::PositiveNumber);
    in->add_option("--out", in_out, "Write the selected channels back as CSV");
    in->add_flag("--csv", in_csv, "CSV summary");
    in->callback([&] { action = [&] { return cmd_ingest(in_file, in_src, in_frame_len, in_out, in_csv, out); }; });

    // train
    auto* tr = app.add_subcommand("train", "Cross-validated training");
    TrainFlags tf;
    DataSource tr_src;
    tr->add_option("--config", settings.config_path, "Key-value config file");
    tf.q_opt = tr->add_option("--q", tf.q, "Polynomial order");
    tf.seed_opt = tr->add_option("--seed", tf.seed, "Master seed");
    tf.folds_opt = tr->add_option("--folds", tf.folds, "Cross-validation folds");
    tf.runs_opt = tr->add_option("--runs", tf.runs, "Training runs per fold");
    tf.lr_opt = tr->add_option("--lr", tf.lr, "SGD learning rate");
    tf.epochs_opt = tr->add_option("--epochs", tf.epochs, "Epoch cap");
    tf.frame_opt = tr->add_option("--frame-len", tf.frame_len, "Samples per frame");
    tf.batch_opt = tr->add_option("--batch-size", tf.batch, "Mini-batch size (0 = full batch)");
    tf.kind_opt = tr->add_option("--kind", tf.kind, "Synthetic fault kind: inner or rolling");
    tr->add_option("--jobs", tf.jobs, "Parallel trainings")->check(CLI::PositiveNumber);
    tr->add_option("--model", tf.model_path, "Save the fold-0 run-0 model here");
    tr->add_option("--log", tf.log_path, "Per-epoch CSV log");
    tr->add_option("--out", tf.out_path, "Write the report here instead of standard output");
    tr->add_flag("--csv", tf.csv, "CSV report");
    add_data_flags(tr, tr_src);
    tr->callback([&] { action = [&] { return cmd_train(settings, tf, tr_src, out, err); }; });

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a saved model on its held-out fold");
    std::string ev_model;
    std::size_t ev_fold = 0;
    bool ev_csv = false;
    DataSource ev_src;
    ev->add_option("--model", ev_model, "Model file")->required();
    auto* ev_fold_opt = ev->add_option("--fold", ev_fold, "Fold to evaluate (default: the one it was trained for)");
    ev->add_flag("--csv", ev_csv, "CSV output");
    add_data_flags(ev, ev_src);
    ev->callback([&] { action = [&] { return cmd_eval(ev_model, ev_src, ev_fold_opt, ev_fold, ev_csv, out); }; });

    // classify
    auto* cl = app.add_subcommand("classify", "Classify every frame of a recording");
    std::string cl_model, cl_file;
    bool cl_csv = false;
    DataSource cl_src;
    cl->add_option("--model", cl_model, "Model file")->required();
    cl->add_option("file", cl_file, "Recording")->required();
    cl->add_option("--channels", cl_src.channels, "Column pair, e.g. 4,5");
    cl->add_flag("--skip-header", cl_src.skip_header, "Skip the first line");
    cl->add_flag("--csv", cl_csv, "CSV output");
    cl->callback([&] { action = [&] { return cmd_classify(cl_model, cl_file, cl_src, cl_csv, out); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return 0;
        }
        app.exit(e, out, err);
        return 1;
    }

    try {
        return action ? action() : 1;
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const CLI::Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace sonn

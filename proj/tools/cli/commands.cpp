#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "surgenet/checkpoint.hpp"
#include "surgenet/oracle.hpp"

namespace surgenet::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        const auto comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? comma : comma - pos)));
        if (comma == std::string_view::npos) return out;
        pos = comma + 1;
    }
}

void ensure_parent(const fs::path& file) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

void check_io_dims(const Checkpoint& ckpt) {
    if (ckpt.net.arch.input_dim != kInputColumns || ckpt.net.arch.output_dim != kOutputColumns) {
        throw InvalidArgument("checkpoint network " + ckpt.net.arch.label() + " maps " +
                              std::to_string(ckpt.net.arch.input_dim) + " inputs to " +
                              std::to_string(ckpt.net.arch.output_dim) +
                              " outputs; track data needs 6 -> 10");
    }
}

void print_table(std::span<const LocationReport> rows, std::ostream& log) {
    log << "loc        mse      r  P(|e|<=0.1)   e*95  P_lf(0.1)  P_lf(0.5)\n";
    double mean_mse = 0.0;
    for (const auto& r : rows) {
        char line[128];
        std::snprintf(line, sizeof line, "%3zu  %9.6f  %5s  %11.4f  %5.3f  %9.4f  %9.4f\n",
                      r.location, r.mse, r.r ? fmt("%.3f", *r.r).c_str() : "nan", r.p_within_010,
                      r.e_star_95, r.p_within_010_landfall, r.p_within_050_landfall);
        log << line;
        mean_mse += r.mse / static_cast<double>(rows.size());
    }
    log << "mean mse " << fmt("%.6f", mean_mse) << '\n';
}

}  // namespace

void cmd_generate(const RunConfig& cfg, std::ostream& log) {
    const auto tracks = generate_corpus(cfg.n_tracks, cfg.seed, cfg.oracle);
    std::map<std::string, SplitRole> roles;
    if (tracks.size() >= 3) {
        const auto split = split_dataset(tracks, cfg.seed);
        for (const auto& t : split.training) roles[t.id] = SplitRole::training;
        for (const auto& t : split.validation) roles[t.id] = SplitRole::validation;
        for (const auto& t : split.testing) roles[t.id] = SplitRole::testing;
    } else {
        for (const auto& t : tracks) roles[t.id] = SplitRole::training;
        log << "note: fewer than 3 tracks, all assigned to the training split\n";
    }

    fs::create_directories(cfg.corpus);
    std::vector<ManifestEntry> manifest;
    for (const auto& t : tracks) {
        const std::string file = t.id + ".csv";
        save_track_csv(t, cfg.corpus / file);
        manifest.push_back({file, roles.at(t.id)});
    }
    write_manifest(manifest, cfg.corpus / kManifestFile);

    std::size_t counts[3] = {0, 0, 0};
    for (const auto& m : manifest) ++counts[static_cast<int>(m.role)];
    log << "wrote " << tracks.size() << " tracks to " << cfg.corpus.string() << " (train "
        << counts[0] << ", val " << counts[1] << ", test " << counts[2] << ", seed " << cfg.seed
        << ")\n";
}

TrainResult cmd_train(const RunConfig& cfg, std::ostream& log) {
    const auto data = load_corpus(cfg.corpus);
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    log << "training " << tc.arch.label() << " " << to_string(tc.arch.activation) << " on "
        << data.training.size() << " tracks (" << data.validation.size()
        << " validation), " << tc.epochs << " epochs, " << tc.batch_tracks
        << " tracks per batch, " << tc.workers << " worker(s)\n";
    const auto result = train(tc, data, [&](const HistoryEntry& h) {
        log << "epoch " << h.epoch << "  lr " << fmt("%.4e", h.lr) << "  train_mse "
            << fmt("%.6f", h.train_mse) << "  val_mse " << fmt("%.6f", *h.val_mse) << '\n';
    });

    ensure_parent(cfg.checkpoint);
    save_checkpoint(result.checkpoint, cfg.checkpoint);
    const auto history = cfg.history_path();
    ensure_parent(history);
    write_history_csv(result.history, history);

    log << "selected epoch " << result.selected_epoch;
    if (result.selected_val_mse) log << " (val_mse " << fmt("%.6f", *result.selected_val_mse) << ")";
    log << ", train_mse " << fmt("%.6f", result.checkpoint.meta.final_train_mse) << '\n';
    log << "wrote " << cfg.checkpoint.string() << " and " << history.string() << '\n';
    return result;
}

std::vector<LocationReport> cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
    const auto ckpt = load_checkpoint(cfg.checkpoint);
    check_io_dims(ckpt);
    const auto data = load_corpus(cfg.corpus);
    std::vector<StormTrack> tracks;
    auto take = [&](const std::vector<StormTrack>& part) {
        tracks.insert(tracks.end(), part.begin(), part.end());
    };
    switch (cfg.split) {
        case EvalSplit::training: take(data.training); break;
        case EvalSplit::validation: take(data.validation); break;
        case EvalSplit::testing: take(data.testing); break;
        case EvalSplit::all:
            take(data.training);
            take(data.validation);
            take(data.testing);
            break;
    }
    if (tracks.empty()) {
        throw InvalidArgument("split '" + std::string(to_string(cfg.split)) + "' of " +
                              cfg.corpus.string() + " has no tracks");
    }

    const auto predictions = predict_tracks(ckpt.net, ckpt.normalizer, tracks);
    const auto pooled = pool(predictions);
    const auto metrics = location_metrics(pooled.predicted, pooled.observed);
    const auto pdfs = analyze_errors(predictions, cfg.window);
    const auto rows = summarize(metrics, pdfs.full, pdfs.landfall);
    emit_report(rows, predictions, cfg.report);
    write_pdf_csv(pdfs, cfg.report / "error_pdfs.csv");

    log << "split " << to_string(cfg.split) << ": " << tracks.size() << " tracks, "
        << rows.front().n << " samples per location, landfall window +/-" << cfg.window
        << " d (" << rows.front().n_landfall << " samples)\n";
    print_table(rows, log);

    if (cfg.split != EvalSplit::all) {
        std::vector<StormTrack> everything = data.training;
        everything.insert(everything.end(), data.validation.begin(), data.validation.end());
        everything.insert(everything.end(), data.testing.begin(), data.testing.end());
        const auto all_rows =
            evaluate_tracks(predict_tracks(ckpt.net, ckpt.normalizer, everything), cfg.window);
        write_metrics_csv(all_rows, cfg.report / "metrics_all.csv");
        log << "all tracks: " << everything.size() << " tracks, " << all_rows.front().n
            << " samples per location\n";
        print_table(all_rows, log);
    }
    log << "wrote report to " << cfg.report.string() << '\n';
    return rows;
}

std::vector<StormInputs> read_input_series(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("input '" + path.string() + "' is empty");
    const auto header = split_csv(line);
    const auto& names = track_csv_columns();
    std::array<std::size_t, kInputColumns> index{};
    for (std::size_t c = 0; c < kInputColumns; ++c) {
        const auto it = std::find(header.begin(), header.end(), names[c]);
        if (it == header.end()) {
            throw std::runtime_error("input '" + path.string() + "' lacks column '" + names[c] + "'");
        }
        index[c] = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<StormInputs> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != header.size()) {
            throw std::runtime_error("input line " + std::to_string(line_no) + " has " +
                                     std::to_string(fields.size()) + " fields, header has " +
                                     std::to_string(header.size()));
        }
        std::array<double, kInputColumns> v{};
        for (std::size_t c = 0; c < kInputColumns; ++c) {
            auto token = fields[index[c]];
            if (!token.empty() && token.front() == '+') token.remove_prefix(1);
            const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v[c]);
            if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size() ||
                !std::isfinite(v[c])) {
                throw std::runtime_error("input line " + std::to_string(line_no) + ", column " +
                                         names[c] + ": '" + std::string(fields[index[c]]) +
                                         "' is not a finite number");
            }
        }
        rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5]});
    }
    if (rows.empty()) throw std::runtime_error("input '" + path.string() + "' has no data rows");
    return rows;
}

std::vector<StormInputs> interpolate_to_grid(std::span<const StormInputs> samples) {
    if (samples.empty()) throw InvalidArgument("interpolate_to_grid: no samples");
    std::vector<StormInputs> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const StormInputs& a, const StormInputs& b) { return a.tau < b.tau; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].tau == sorted[i - 1].tau) {
            throw InvalidArgument("interpolate_to_grid: duplicate tau " +
                                  std::to_string(sorted[i].tau));
        }
    }

    std::vector<StormInputs> grid(kRowsPerTrack);
    for (std::size_t r = 0; r < kRowsPerTrack; ++r) {
        const double tau = grid_tau(r);
        const auto hi = std::lower_bound(sorted.begin(), sorted.end(), tau,
                                         [](const StormInputs& s, double t) { return s.tau < t; });
        StormInputs out;
        if (hi == sorted.begin()) {
            out = sorted.front();
        } else if (hi == sorted.end()) {
            out = sorted.back();
        } else if (hi->tau == tau) {
            out = *hi;
        } else {
            const auto& a = *(hi - 1);
            const auto& b = *hi;
            const double w = (tau - a.tau) / (b.tau - a.tau);
            const auto va = a.as_array(), vb = b.as_array();
            std::array<double, kInputColumns> v{};
            for (std::size_t c = 0; c < kInputColumns; ++c) v[c] = va[c] + w * (vb[c] - va[c]);
            out = {v[0], v[1], v[2], v[3], v[4], v[5]};
        }
        out.tau = tau;
        grid[r] = out;
    }
    return grid;
}

void cmd_predict(const RunConfig& cfg, const fs::path& input, const fs::path& output,
                 std::ostream& log) {
    const auto ckpt = load_checkpoint(cfg.checkpoint);
    check_io_dims(ckpt);
    const auto samples = read_input_series(input);
    const auto grid = interpolate_to_grid(samples);

    Matrix x(kRowsPerTrack, kInputColumns);
    for (std::size_t r = 0; r < kRowsPerTrack; ++r) {
        const auto z = ckpt.normalizer.apply(grid[r].as_array());
        std::copy(z.begin(), z.end(), x.row(r).begin());
    }
    const Matrix y = forward_batch(ckpt.net, x);

    ensure_parent(output);
    std::ofstream out(output, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + output.string() + "'");
    out << "tau_days";
    for (std::size_t i = 0; i < kOutputColumns; ++i) out << ',' << track_csv_columns()[kInputColumns + i];
    out << '\n';
    char buf[32];
    for (std::size_t r = 0; r < kRowsPerTrack; ++r) {
        std::snprintf(buf, sizeof buf, "%.17g", grid[r].tau);
        out << buf;
        for (double v : y.row(r)) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for '" + output.string() + "'");
    log << "interpolated " << samples.size() << " input rows onto " << kRowsPerTrack
        << " grid rows; wrote " << output.string() << '\n';
}

namespace {

struct Flags {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> corpus;
    std::optional<std::string> checkpoint;
    std::optional<std::string> history;
    std::optional<std::size_t> n_tracks;
    std::optional<std::string> hidden;
    std::optional<std::size_t> epochs;
    std::optional<std::size_t> batch_tracks;
    std::optional<double> lr;
    std::optional<double> lr_decay;
    std::optional<std::size_t> workers;
    std::optional<std::string> activation;
    std::optional<std::size_t> validation_every;
    std::optional<std::string> split;
    std::optional<double> window;
    std::string input;
};

void add_shared(CLI::App* sub, Flags& f, const char* out_help) {
    sub->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "Random seed (default 20170324)");
    sub->add_option("--out", f.out, out_help);
}

template <class T, class U>
void override_with(const std::optional<T>& flag, U& target) {
    if (flag) target = *flag;
}

RunConfig resolve(const Flags& f) {
    RunConfig cfg = f.config ? load_run_config(*f.config) : RunConfig{};
    override_with(f.seed, cfg.seed);
    override_with(f.corpus, cfg.corpus);
    override_with(f.checkpoint, cfg.checkpoint);
    override_with(f.history, cfg.history);
    override_with(f.n_tracks, cfg.n_tracks);
    override_with(f.epochs, cfg.train.epochs);
    override_with(f.batch_tracks, cfg.train.batch_tracks);
    override_with(f.lr, cfg.train.learning_rate);
    override_with(f.lr_decay, cfg.train.lr_decay);
    override_with(f.workers, cfg.train.workers);
    override_with(f.validation_every, cfg.train.validation_every);
    override_with(f.window, cfg.window);
    try {
        if (f.hidden) cfg.train.arch.hidden_sizes = parse_hidden_sizes(*f.hidden);
        if (f.activation) cfg.train.arch.activation = parse_activation(*f.activation);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (f.split) cfg.split = parse_split(*f.split);
    return cfg;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Storm-surge neural network: generate a corpus, train, evaluate, predict"};
    app.name("surgenet");
    app.require_subcommand(1);
    Flags f;

    auto* gen = app.add_subcommand("generate", "Write a synthetic track corpus and manifest");
    add_shared(gen, f, "Corpus directory");
    gen->add_option("--n-tracks", f.n_tracks, "Number of tracks (default 324)");

    auto* tr = app.add_subcommand("train", "Train a network on a corpus");
    add_shared(tr, f, "Checkpoint path");
    tr->add_option("--corpus", f.corpus, "Corpus directory");
    tr->add_option("--history", f.history, "History CSV (default <checkpoint>.history.csv)");
    tr->add_option("--hidden", f.hidden, "Hidden layer sizes, \"N1[,N2]\"");
    tr->add_option("--epochs", f.epochs, "Optimizer steps");
    tr->add_option("--batch-tracks", f.batch_tracks, "Whole tracks per batch");
    tr->add_option("--lr", f.lr, "Initial learning rate");
    tr->add_option("--lr-decay", f.lr_decay, "Per-epoch learning-rate factor");
    tr->add_option("--workers", f.workers, "Gradient worker threads");
    tr->add_option("--activation", f.activation, "Hidden activation")
        ->check(CLI::IsMember({"tanh", "sigmoid"}));
    tr->add_option("--validation-every", f.validation_every,
                   "Validation interval in epochs; 0 keeps the final weights");

    auto* ev = app.add_subcommand("evaluate", "Write metrics and error analysis for a split");
    add_shared(ev, f, "Report directory");
    ev->add_option("--corpus", f.corpus, "Corpus directory");
    ev->add_option("--checkpoint", f.checkpoint, "Checkpoint path");
    ev->add_option("--split", f.split, "Tracks to evaluate")
        ->check(CLI::IsMember({"train", "val", "test", "all"}));
    ev->add_option("--window", f.window, "Landfall window half width, days");

    auto* pr = app.add_subcommand("predict", "Predict surge for one track CSV");
    add_shared(pr, f, "Output CSV");
    pr->add_option("--checkpoint", f.checkpoint, "Checkpoint path");
    pr->add_option("--input", f.input, "Track CSV with the six input columns")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = resolve(f);
        if (gen->parsed()) override_with(f.out, cfg.corpus);
        if (tr->parsed()) override_with(f.out, cfg.checkpoint);
        if (ev->parsed()) override_with(f.out, cfg.report);
        cfg.validate();

        if (gen->parsed()) {
            cmd_generate(cfg, out);
        } else if (tr->parsed()) {
            cmd_train(cfg, out);
        } else if (ev->parsed()) {
            cmd_evaluate(cfg, out);
        } else if (pr->parsed()) {
            cmd_predict(cfg, f.input, f.out.value_or("prediction.csv"), out);
        }
    } catch (const ConfigError& e) {
        err << "surgenet: configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "surgenet: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace surgenet::cli

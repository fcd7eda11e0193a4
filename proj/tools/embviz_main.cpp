// embviz command line: gen, split, train, embed, tsne, yoke, scatter, recall,
// render. Every randomized subcommand is seeded (default 0) and every output
// file gets a .meta.json sidecar echoing the effective configuration, so any
// artifact can be regenerated from its sidecar alone.

#include <charconv>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "embviz/analysis.hpp"
#include "embviz/csv.hpp"
#include "embviz/dataset.hpp"
#include "embviz/error.hpp"
#include "embviz/mining.hpp"
#include "embviz/render.hpp"
#include "embviz/trainer.hpp"
#include "embviz/tsne.hpp"
#include "embviz/yoke.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace embviz;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open file for writing: " + path);
    out << text;
    if (!out) throw Error("write failed: " + path);
}

/// Sidecar + stdout echo of the effective configuration.
void emit_metadata(const std::string& subcommand, const json& config,
                   const std::vector<std::string>& outputs) {
    json meta;
    meta["tool"] = "embviz";
    meta["subcommand"] = subcommand;
    meta["config"] = config;
    meta["outputs"] = outputs;
    const std::string text = meta.dump(2) + "\n";
    for (const auto& path : outputs) write_text(path + ".meta.json", text);
    std::cout << text;
}

std::set<int> parse_class_list(const std::string& text) {
    std::set<int> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        int value = 0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), value);
        if (item.empty() || res.ec != std::errc{} || res.ptr != item.data() + item.size())
            throw Error("invalid class list entry \"" + item + "\"");
        out.insert(value);
        pos = comma + 1;
        if (comma == text.size()) break;
    }
    return out;
}

std::string coords_csv(const Matrix& coords, const std::vector<std::string>& ids,
                       const std::vector<int>& labels, const std::vector<Split>& splits) {
    std::string out = "id,split,label,y0,y1\n";
    for (std::size_t r = 0; r < coords.rows(); ++r) {
        out += csv::quote_field(ids[r]);
        out += ',';
        out += to_string(splits[r]);
        out += ',';
        out += csv::format_int(labels[r]);
        out += ',';
        out += csv::format_double(coords(r, 0));
        out += ',';
        out += csv::format_double(coords(r, 1));
        out += '\n';
    }
    return out;
}

std::string trace_csv(const char* index_name, const char* value_name,
                      const std::vector<double>& values) {
    std::string out = std::string(index_name) + "," + value_name + "\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += csv::format_int(static_cast<long long>(i));
        out += ',';
        out += csv::format_double(values[i]);
        out += '\n';
    }
    return out;
}

struct CoordsFile {
    std::vector<std::string> ids;
    std::vector<int> labels;
    std::vector<Split> splits;
    Matrix coords;
};

CoordsFile load_coords_csv(const std::string& path) {
    const auto records = csv::parse_file(path);
    if (records.empty()) throw Error("line 1: missing header row");
    const std::vector<std::string> expected = {"id", "split", "label", "y0", "y1"};
    if (records.front().fields != expected) throw Error("line 1: header must be id,split,label,y0,y1");
    CoordsFile out;
    out.coords = Matrix(records.size() - 1, 2);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != 5)
            throw Error("line " + std::to_string(rec.line) + ": expected 5 fields, got " +
                        std::to_string(rec.fields.size()));
        out.ids.push_back(rec.fields[0]);
        const auto split = split_from_string(rec.fields[1]);
        if (!split)
            throw Error("line " + std::to_string(rec.line) + ": unknown split tag \"" +
                        rec.fields[1] + "\"");
        out.splits.push_back(*split);
        for (std::size_t f = 2; f < 5; ++f) {
            const auto& field = rec.fields[f];
            double v = 0.0;
            const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
            if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
                throw Error("line " + std::to_string(rec.line) + ": invalid number \"" + field +
                            "\"");
            if (f == 2)
                out.labels.push_back(static_cast<int>(v));
            else
                out.coords(r - 1, f - 3) = v;
        }
    }
    return out;
}

std::vector<analysis::ScatterPoint> load_scatter_csv(const std::string& path) {
    const auto records = csv::parse_file(path);
    if (records.empty()) throw Error("line 1: missing header row");
    const std::vector<std::string> expected = {"id", "split", "label", "s_same", "s_diff",
                                               "correct"};
    if (records.front().fields != expected)
        throw Error("line 1: header must be id,split,label,s_same,s_diff,correct");
    std::vector<analysis::ScatterPoint> out;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != 6)
            throw Error("line " + std::to_string(rec.line) + ": expected 6 fields, got " +
                        std::to_string(rec.fields.size()));
        analysis::ScatterPoint pt;
        pt.id = rec.fields[0];
        const auto split = split_from_string(rec.fields[1]);
        if (!split)
            throw Error("line " + std::to_string(rec.line) + ": unknown split tag \"" +
                        rec.fields[1] + "\"");
        pt.split = *split;
        const auto parse_num = [&](const std::string& field) {
            double v = 0.0;
            const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
            if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
                throw Error("line " + std::to_string(rec.line) + ": invalid number \"" + field +
                            "\"");
            return v;
        };
        pt.label = static_cast<int>(parse_num(rec.fields[2]));
        pt.s_same = parse_num(rec.fields[3]);
        pt.s_diff = parse_num(rec.fields[4]);
        if (rec.fields[5] != "0" && rec.fields[5] != "1")
            throw Error("line " + std::to_string(rec.line) + ": correct must be 0 or 1");
        pt.correct = rec.fields[5] == "1";
        out.push_back(std::move(pt));
    }
    return out;
}

std::string scatter_csv(const std::vector<analysis::ScatterPoint>& points) {
    std::string out = "id,split,label,s_same,s_diff,correct\n";
    for (const auto& pt : points) {
        out += csv::quote_field(pt.id);
        out += ',';
        out += to_string(pt.split);
        out += ',';
        out += csv::format_int(pt.label);
        out += ',';
        out += csv::format_double(pt.s_same);
        out += ',';
        out += csv::format_double(pt.s_diff);
        out += ',';
        out += pt.correct ? '1' : '0';
        out += '\n';
    }
    return out;
}

json tsne_config_json(const tsne::TsneConfig& cfg, int threads) {
    json out;
    out["perplexity"] = cfg.perplexity;
    out["iterations"] = cfg.iterations;
    out["learning_rate"] = cfg.learning_rate;
    out["momentum_early"] = cfg.momentum_early;
    out["momentum_late"] = cfg.momentum_late;
    out["exaggeration_factor"] = cfg.exaggeration_factor;
    out["exaggeration_iters"] = cfg.exaggeration_iters;
    out["seed"] = cfg.seed;
    out["calibration_tolerance"] = cfg.calibration_tolerance;
    out["calibration_max_iters"] = cfg.calibration_max_iters;
    out["threads"] = threads;
    return out;
}

void add_tsne_flags(CLI::App* cmd, tsne::TsneConfig& cfg, int& threads) {
    cmd->add_option("--perplexity", cfg.perplexity, "Target perplexity");
    cmd->add_option("--iterations", cfg.iterations, "Gradient descent iterations");
    cmd->add_option("--lr", cfg.learning_rate, "Learning rate");
    cmd->add_option("--momentum-early", cfg.momentum_early, "Momentum during exaggeration");
    cmd->add_option("--momentum-late", cfg.momentum_late, "Momentum after exaggeration");
    cmd->add_option("--exaggeration", cfg.exaggeration_factor, "Early exaggeration factor");
    cmd->add_option("--exaggeration-iters", cfg.exaggeration_iters,
                    "Iterations with exaggerated P");
    cmd->add_option("--cal-tol", cfg.calibration_tolerance, "Perplexity calibration tolerance");
    cmd->add_option("--cal-max-iters", cfg.calibration_max_iters,
                    "Max bisection steps per point");
    cmd->add_option("--seed", cfg.seed, "Random seed");
    cmd->add_option("--threads", threads, "Worker thread cap (results are thread-count invariant)")
        ->check(CLI::PositiveNumber);
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Metric-embedding generalization toolkit"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic labeled embedding set");
    dataset::SyntheticConfig gen_cfg;
    std::string gen_out;
    gen->add_option("--classes", gen_cfg.num_classes, "Number of classes")->required();
    gen->add_option("--per-class", gen_cfg.points_per_class, "Points per class")->required();
    gen->add_option("--dim", gen_cfg.ambient_dim, "Ambient dimension");
    gen->add_option("--sigma", gen_cfg.noise_sigma, "Noise std dev before renormalization");
    gen->add_option("--seed", gen_cfg.seed, "Random seed");
    gen->add_option("--out", gen_out, "Output CSV")->required();

    // split
    auto* split = app.add_subcommand("split", "Retag splits by class membership");
    std::string split_in, split_out, split_train, split_test;
    split->add_option("--in", split_in, "Input CSV")->required();
    split->add_option("--train-classes", split_train, "Comma-separated train labels")->required();
    split->add_option("--test-classes", split_test, "Comma-separated test labels")->required();
    split->add_option("--out", split_out, "Output CSV")->required();

    // train
    auto* train = app.add_subcommand("train", "Train a linear embedder with a mining strategy");
    trainer::TrainConfig train_cfg;
    std::string train_in, train_model_out, train_trace_out, train_strategy = "semihard";
    std::size_t train_dim_out = 16;
    train->add_option("--in", train_in, "Input CSV")->required();
    train->add_option("--strategy", train_strategy, "batchall | npairs | semihard | epshn");
    train->add_option("--margin", train_cfg.strategy.margin, "Semi-hard similarity window");
    train->add_option("--temperature", train_cfg.temperature, "NCA softmax temperature");
    train->add_option("--epochs", train_cfg.epochs, "Training epochs");
    train->add_option("--batches-per-epoch", train_cfg.batches_per_epoch, "Batches per epoch");
    train->add_option("--p", train_cfg.p, "Classes per batch");
    train->add_option("--k", train_cfg.k, "Items per class");
    train->add_option("--lr", train_cfg.learning_rate, "Learning rate");
    train->add_option("--dim-out", train_dim_out, "Embedding dimension");
    train->add_option("--seed", train_cfg.seed, "Random seed");
    train->add_option("--model-out", train_model_out, "Model CSV output")->required();
    train->add_option("--trace-out", train_trace_out,
                      "Per-epoch loss CSV output (default: <model-out>.trace.csv)");

    // embed
    auto* embed_cmd = app.add_subcommand("embed", "Map a set through a trained model");
    std::string embed_in, embed_model, embed_out;
    embed_cmd->add_option("--in", embed_in, "Input CSV")->required();
    embed_cmd->add_option("--model", embed_model, "Model CSV")->required();
    embed_cmd->add_option("--out", embed_out, "Output CSV")->required();

    // tsne
    auto* tsne_cmd = app.add_subcommand("tsne", "Exact t-SNE map of a set (all rows jointly)");
    tsne::TsneConfig tsne_cfg;
    int tsne_threads = 1;
    std::string tsne_in, tsne_out, tsne_trace_out;
    tsne_cmd->add_option("--in", tsne_in, "Input CSV")->required();
    tsne_cmd->add_option("--out", tsne_out, "Coordinates CSV output")->required();
    tsne_cmd->add_option("--trace-out", tsne_trace_out,
                         "KL trace CSV output (default: <out>.kl.csv)");
    add_tsne_flags(tsne_cmd, tsne_cfg, tsne_threads);

    // yoke
    auto* yoke_cmd = app.add_subcommand("yoke", "Yoked t-SNE of two embeddings of the same rows");
    yoke::YokeConfig yoke_cfg;
    int yoke_threads = 1;
    std::string yoke_in_a, yoke_in_b, yoke_out_a, yoke_out_b, yoke_disp_out;
    yoke_cmd->add_option("--in-a", yoke_in_a, "First embedding CSV")->required();
    yoke_cmd->add_option("--in-b", yoke_in_b, "Second embedding CSV")->required();
    yoke_cmd->add_option("--lambda", yoke_cfg.lambda, "Alignment weight");
    yoke_cmd->add_option("--out-a", yoke_out_a, "Coordinates CSV for map A")->required();
    yoke_cmd->add_option("--out-b", yoke_out_b, "Coordinates CSV for map B")->required();
    yoke_cmd->add_option("--disp-out", yoke_disp_out,
                         "Per-point displacement CSV (default: <out-a>.disp.csv)");
    add_tsne_flags(yoke_cmd, yoke_cfg.base, yoke_threads);

    // scatter
    auto* scatter_cmd =
        app.add_subcommand("scatter", "Closest same-class vs different-class similarities");
    std::string scatter_in, scatter_out;
    bool scatter_cross_split = false;
    scatter_cmd->add_option("--in", scatter_in, "Input CSV (unit-norm rows)")->required();
    scatter_cmd->add_option("--out", scatter_out, "Scatter CSV output")->required();
    scatter_cmd->add_flag("--cross-split", scatter_cross_split,
                          "Compare against the whole set instead of within each split");

    // recall
    auto* recall_cmd = app.add_subcommand("recall", "Recall@k over a scoped subset");
    std::string recall_in, recall_scope = "all", recall_out;
    int recall_k = 1;
    recall_cmd->add_option("--in", recall_in, "Input CSV (unit-norm rows)")->required();
    recall_cmd->add_option("--k", recall_k, "Neighborhood size");
    recall_cmd->add_option("--scope", recall_scope, "train | test | all");
    recall_cmd->add_option("--out", recall_out, "Optional JSON output");

    // render
    auto* render_cmd = app.add_subcommand("render", "Render coordinate or scatter CSVs to SVG");
    std::string render_kind, render_in, render_out;
    render::PlotStyle style;
    render_cmd->add_option("--kind", render_kind, "map | scatter")->required();
    render_cmd->add_option("--in", render_in, "Input CSV")->required();
    render_cmd->add_option("--out", render_out, "SVG output")->required();
    render_cmd->add_option("--width", style.width_px, "Panel width in px");
    render_cmd->add_option("--height", style.height_px, "Panel height in px");
    render_cmd->add_option("--radius", style.point_radius, "Point radius in px");
    render_cmd->add_option("--plot-margin", style.margin_px, "Inner margin in px");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    if (gen->parsed()) {
        const EmbeddingSet set = dataset::gen_synthetic(gen_cfg);
        dataset::save_csv(set, gen_out);
        json cfg;
        cfg["classes"] = gen_cfg.num_classes;
        cfg["per_class"] = gen_cfg.points_per_class;
        cfg["dim"] = gen_cfg.ambient_dim;
        cfg["sigma"] = gen_cfg.noise_sigma;
        cfg["seed"] = gen_cfg.seed;
        emit_metadata("gen", cfg, {gen_out});
    } else if (split->parsed()) {
        const EmbeddingSet set = dataset::load_csv(split_in);
        const EmbeddingSet out =
            dataset::split_by_class(set, parse_class_list(split_train), parse_class_list(split_test));
        dataset::save_csv(out, split_out);
        json cfg;
        cfg["in"] = split_in;
        cfg["train_classes"] = split_train;
        cfg["test_classes"] = split_test;
        emit_metadata("split", cfg, {split_out});
    } else if (train->parsed()) {
        const auto strategy = mining::strategy_from_string(train_strategy);
        if (!strategy) throw Error("unknown strategy \"" + train_strategy + "\"");
        train_cfg.strategy.strategy = *strategy;
        const EmbeddingSet set = dataset::load_csv(train_in);
        const trainer::LinearEmbedder init =
            trainer::init_embedder(set.dim(), train_dim_out, train_cfg.seed);
        const trainer::TrainResult result = trainer::train(init, set, train_cfg);
        trainer::save_model_csv(result.model, train_model_out);
        if (train_trace_out.empty()) train_trace_out = train_model_out + ".trace.csv";
        write_text(train_trace_out, trace_csv("epoch", "mean_loss", result.loss_trace));
        const std::vector<std::string> outputs = {train_model_out, train_trace_out};
        json cfg;
        cfg["in"] = train_in;
        cfg["strategy"] = std::string(mining::to_string(train_cfg.strategy.strategy));
        cfg["margin"] = train_cfg.strategy.margin;
        cfg["temperature"] = train_cfg.temperature;
        cfg["epochs"] = train_cfg.epochs;
        cfg["batches_per_epoch"] = train_cfg.batches_per_epoch;
        cfg["p"] = train_cfg.p;
        cfg["k"] = train_cfg.k;
        cfg["lr"] = train_cfg.learning_rate;
        cfg["dim_out"] = train_dim_out;
        cfg["seed"] = train_cfg.seed;
        emit_metadata("train", cfg, outputs);
    } else if (embed_cmd->parsed()) {
        const EmbeddingSet set = dataset::load_csv(embed_in);
        const trainer::LinearEmbedder model = trainer::load_model_csv(embed_model);
        dataset::save_csv(trainer::embed(model, set), embed_out);
        json cfg;
        cfg["in"] = embed_in;
        cfg["model"] = embed_model;
        emit_metadata("embed", cfg, {embed_out});
    } else if (tsne_cmd->parsed()) {
        const EmbeddingSet set = dataset::load_csv(tsne_in);
        const tsne::TsneResult result = tsne::run(set.vectors, tsne_cfg, tsne_threads);
        write_text(tsne_out, coords_csv(result.coords, set.ids, set.labels, set.splits));
        if (tsne_trace_out.empty()) tsne_trace_out = tsne_out + ".kl.csv";
        write_text(tsne_trace_out, trace_csv("iteration", "kl", result.kl_trace));
        const std::vector<std::string> outputs = {tsne_out, tsne_trace_out};
        json cfg = tsne_config_json(tsne_cfg, tsne_threads);
        cfg["in"] = tsne_in;
        emit_metadata("tsne", cfg, outputs);
    } else if (yoke_cmd->parsed()) {
        const EmbeddingSet set_a = dataset::load_csv(yoke_in_a);
        const EmbeddingSet set_b = dataset::load_csv(yoke_in_b);
        if (set_a.ids != set_b.ids)
            throw Error("yoke inputs must list the same ids in the same order");
        const yoke::YokedResult result =
            yoke::yoked_run(set_a.vectors, set_b.vectors, yoke_cfg, yoke_threads);
        write_text(yoke_out_a, coords_csv(result.map_a.coords, set_a.ids, set_a.labels, set_a.splits));
        write_text(yoke_out_b, coords_csv(result.map_b.coords, set_b.ids, set_b.labels, set_b.splits));
        if (yoke_disp_out.empty()) yoke_disp_out = yoke_out_a + ".disp.csv";
        const yoke::Displacement disp =
            yoke::displacement(result.map_a.coords, result.map_b.coords);
        std::string text = "id,displacement\n";
        for (std::size_t i = 0; i < disp.per_point.size(); ++i) {
            text += csv::quote_field(set_a.ids[i]);
            text += ',';
            text += csv::format_double(disp.per_point[i]);
            text += '\n';
        }
        write_text(yoke_disp_out, text);
        const std::vector<std::string> outputs = {yoke_out_a, yoke_out_b, yoke_disp_out};
        json cfg = tsne_config_json(yoke_cfg.base, yoke_threads);
        cfg["in_a"] = yoke_in_a;
        cfg["in_b"] = yoke_in_b;
        cfg["lambda"] = yoke_cfg.lambda;
        cfg["mean_displacement"] = result.mean_displacement;
        emit_metadata("yoke", cfg, outputs);
    } else if (scatter_cmd->parsed()) {
        const EmbeddingSet set = dataset::load_csv(scatter_in);
        const analysis::ScatterResult result =
            analysis::similarity_scatter(set, scatter_cross_split);
        write_text(scatter_out, scatter_csv(result.points));
        json cfg;
        cfg["in"] = scatter_in;
        cfg["cross_split"] = scatter_cross_split;
        cfg["omitted_ids"] = result.omitted_ids;
        cfg["below_diagonal_fraction"] =
            result.points.empty() ? json() : json(analysis::below_diagonal_fraction(result.points));
        emit_metadata("scatter", cfg, {scatter_out});
    } else if (recall_cmd->parsed()) {
        const auto scope = analysis::scope_from_string(recall_scope);
        if (!scope) throw Error("unknown scope \"" + recall_scope + "\" (train | test | all)");
        const EmbeddingSet set = dataset::load_csv(recall_in);
        const double recall = analysis::recall_at_k(set, recall_k, *scope);
        json cfg;
        cfg["in"] = recall_in;
        cfg["k"] = recall_k;
        cfg["scope"] = recall_scope;
        cfg["recall"] = recall;
        if (!recall_out.empty()) {
            json meta;
            meta["tool"] = "embviz";
            meta["subcommand"] = "recall";
            meta["config"] = cfg;
            write_text(recall_out, meta.dump(2) + "\n");
            emit_metadata("recall", cfg, {recall_out});
        } else {
            emit_metadata("recall", cfg, {});
        }
    } else if (render_cmd->parsed()) {
        std::string svg;
        if (render_kind == "map") {
            const CoordsFile file = load_coords_csv(render_in);
            svg = render::render_map_panels(file.coords, file.labels, file.splits, style);
        } else if (render_kind == "scatter") {
            const auto points = load_scatter_csv(render_in);
            svg = render::render_scatter(points, style);
        } else {
            throw Error("unknown render kind \"" + render_kind + "\" (map | scatter)");
        }
        write_text(render_out, svg);
        json cfg;
        cfg["kind"] = render_kind;
        cfg["in"] = render_in;
        cfg["width"] = style.width_px;
        cfg["height"] = style.height_px;
        cfg["radius"] = style.point_radius;
        cfg["plot_margin"] = style.margin_px;
        emit_metadata("render", cfg, {render_out});
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

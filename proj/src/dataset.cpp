#include "embviz/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "embviz/csv.hpp"
#include "embviz/error.hpp"
#include "embviz/rng.hpp"

namespace embviz {

std::string_view to_string(Split split) {
    return split == Split::train ? "train" : "test";
}

std::optional<Split> split_from_string(std::string_view text) {
    if (text == "train") return Split::train;
    if (text == "test") return Split::test;
    return std::nullopt;
}

namespace dataset {
namespace {

std::string line_msg(std::size_t line, const std::string& what) {
    return "line " + std::to_string(line) + ": " + what;
}

double parse_coordinate(const std::string& field, std::size_t line) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = first + field.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last)
        throw Error(line_msg(line, "non-numeric coordinate \"" + field + "\""));
    if (!std::isfinite(value))
        throw Error(line_msg(line, "non-finite coordinate \"" + field + "\""));
    return value;
}

int parse_label(const std::string& field, std::size_t line) {
    int value = 0;
    const char* first = field.data();
    const char* last = first + field.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last)
        throw Error(line_msg(line, "invalid label \"" + field + "\""));
    return value;
}

} // namespace

EmbeddingSet from_csv_text(std::string_view text) {
    const auto records = csv::parse_text(text);
    if (records.empty()) throw Error("line 1: missing header row");

    const auto& header = records.front().fields;
    if (header.size() < 4 || header[0] != "id" || header[1] != "split" || header[2] != "label")
        throw Error("line 1: header must be id,split,label,d0,...");
    const std::size_t dim = header.size() - 3;
    for (std::size_t d = 0; d < dim; ++d) {
        if (header[3 + d] != "d" + std::to_string(d))
            throw Error("line 1: expected coordinate column d" + std::to_string(d) + ", got \"" +
                        header[3 + d] + "\"");
    }

    EmbeddingSet set;
    const std::size_t n = records.size() - 1;
    set.ids.reserve(n);
    set.labels.reserve(n);
    set.splits.reserve(n);
    set.vectors = Matrix(n, dim);
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < n; ++r) {
        const auto& rec = records[r + 1];
        if (rec.fields.size() != header.size())
            throw Error(line_msg(rec.line, "expected " + std::to_string(header.size()) +
                                               " fields, got " + std::to_string(rec.fields.size())));
        const std::string& id = rec.fields[0];
        if (!seen.insert(id).second)
            throw Error(line_msg(rec.line, "duplicate id \"" + id + "\""));
        const auto split = split_from_string(rec.fields[1]);
        if (!split)
            throw Error(line_msg(rec.line, "unknown split tag \"" + rec.fields[1] +
                                               "\" (expected train or test)"));
        set.ids.push_back(id);
        set.splits.push_back(*split);
        set.labels.push_back(parse_label(rec.fields[2], rec.line));
        for (std::size_t d = 0; d < dim; ++d)
            set.vectors(r, d) = parse_coordinate(rec.fields[3 + d], rec.line);
    }
    return set;
}

EmbeddingSet load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_csv_text(text);
}

std::string to_csv_text(const EmbeddingSet& set) {
    std::string out = "id,split,label";
    for (std::size_t d = 0; d < set.dim(); ++d) out += ",d" + std::to_string(d);
    out += '\n';
    for (std::size_t r = 0; r < set.size(); ++r) {
        out += csv::quote_field(set.ids[r]);
        out += ',';
        out += to_string(set.splits[r]);
        out += ',';
        out += csv::format_int(set.labels[r]);
        for (std::size_t d = 0; d < set.dim(); ++d) {
            out += ',';
            out += csv::format_double(set.vectors(r, d));
        }
        out += '\n';
    }
    return out;
}

void save_csv(const EmbeddingSet& set, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open file for writing: " + path);
    out << to_csv_text(set);
    if (!out) throw Error("write failed: " + path);
}

EmbeddingSet normalize_rows(const EmbeddingSet& set) {
    EmbeddingSet out = set;
    for (std::size_t r = 0; r < out.size(); ++r) {
        auto row = out.vectors.row(r);
        const double len = norm(row);
        if (len == 0.0) throw Error("zero-norm row: id \"" + out.ids[r] + "\"");
        for (double& v : row) v /= len;
    }
    return out;
}

EmbeddingSet gen_synthetic(const SyntheticConfig& cfg) {
    if (cfg.num_classes < 1) throw Error("num_classes must be >= 1");
    if (cfg.points_per_class < 1) throw Error("points_per_class must be >= 1");
    if (cfg.ambient_dim < 2) throw Error("ambient_dim must be >= 2");
    if (cfg.noise_sigma < 0.0) throw Error("noise_sigma must be >= 0");

    const std::size_t dim = static_cast<std::size_t>(cfg.ambient_dim);
    Rng rng(cfg.seed);

    Matrix means(static_cast<std::size_t>(cfg.num_classes), dim);
    for (std::size_t c = 0; c < means.rows(); ++c) {
        auto row = means.row(c);
        for (double& v : row) v = rng.gaussian();
        const double len = norm(row);
        for (double& v : row) v /= len;
    }

    const std::size_t n = means.rows() * static_cast<std::size_t>(cfg.points_per_class);
    EmbeddingSet set;
    set.ids.reserve(n);
    set.labels.reserve(n);
    set.splits.assign(n, Split::train);
    set.vectors = Matrix(n, dim);
    std::size_t r = 0;
    for (std::size_t c = 0; c < means.rows(); ++c) {
        const auto mean = means.row(c);
        for (int p = 0; p < cfg.points_per_class; ++p, ++r) {
            set.ids.push_back("c" + std::to_string(c) + "_i" + std::to_string(p));
            set.labels.push_back(static_cast<int>(c));
            auto row = set.vectors.row(r);
            if (cfg.noise_sigma == 0.0) {
                // exact copy; renormalizing would perturb by an ulp
                for (std::size_t d = 0; d < dim; ++d) row[d] = mean[d];
            } else {
                for (std::size_t d = 0; d < dim; ++d)
                    row[d] = mean[d] + cfg.noise_sigma * rng.gaussian();
                const double len = norm(row);
                if (len == 0.0) throw Error("degenerate synthetic point (zero norm)");
                for (double& v : row) v /= len;
            }
        }
    }
    return set;
}

EmbeddingSet split_by_class(const EmbeddingSet& set, const std::set<int>& train_classes,
                            const std::set<int>& test_classes) {
    for (const int label : train_classes) {
        if (test_classes.count(label))
            throw Error("class " + std::to_string(label) + " assigned to both train and test");
    }
    EmbeddingSet out = set;
    for (std::size_t r = 0; r < out.size(); ++r) {
        const int label = out.labels[r];
        if (train_classes.count(label)) {
            out.splits[r] = Split::train;
        } else if (test_classes.count(label)) {
            out.splits[r] = Split::test;
        } else {
            throw Error("label " + std::to_string(label) + " not assigned to train or test");
        }
    }
    return out;
}

} // namespace dataset
} // namespace embviz

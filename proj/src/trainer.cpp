#include "embviz/trainer.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "embviz/csv.hpp"
#include "embviz/error.hpp"
#include "embviz/objective.hpp"
#include "embviz/rng.hpp"

namespace embviz::trainer {

namespace {

/// Forward pass: u = x W, z = u / |u|. Keeps |u| for the backward pass.
struct Forward {
    Matrix pre;  // x W
    Matrix z;    // row-normalized
    std::vector<double> pre_norms;
};

Forward forward(const LinearEmbedder& model, const Matrix& inputs) {
    if (inputs.cols() != model.dim_in())
        throw Error("input dimension " + std::to_string(inputs.cols()) +
                    " does not match embedder D_in " + std::to_string(model.dim_in()));
    Forward fwd;
    fwd.pre = matmul(inputs, model.weights);
    fwd.z = fwd.pre;
    fwd.pre_norms.resize(fwd.pre.rows());
    for (std::size_t r = 0; r < fwd.pre.rows(); ++r) {
        const double len = norm(fwd.pre.row(r));
        if (len == 0.0) throw Error("zero-norm embedded row " + std::to_string(r));
        fwd.pre_norms[r] = len;
        for (double& v : fwd.z.row(r)) v /= len;
    }
    return fwd;
}

/// Backprop through v -> v/|v|: g_u = (g_z - (g_z . z) z) / |v|.
Matrix normalization_backward(const Forward& fwd, const Matrix& grad_z) {
    Matrix grad_u(grad_z.rows(), grad_z.cols());
    for (std::size_t r = 0; r < grad_z.rows(); ++r) {
        const auto gz = grad_z.row(r);
        const auto z = fwd.z.row(r);
        const double gz_dot_z = dot(gz, z);
        auto gu = grad_u.row(r);
        for (std::size_t d = 0; d < grad_z.cols(); ++d)
            gu[d] = (gz[d] - gz_dot_z * z[d]) / fwd.pre_norms[r];
    }
    return grad_u;
}

} // namespace

LinearEmbedder init_embedder(std::size_t dim_in, std::size_t dim_out, std::uint64_t seed) {
    if (dim_in < 1 || dim_out < 1) throw Error("embedder dimensions must be >= 1");
    LinearEmbedder model;
    model.weights = Matrix(dim_in, dim_out);
    Rng rng(seed);
    const double std_dev = 1.0 / std::sqrt(static_cast<double>(dim_in));
    for (double& w : model.weights.data()) w = std_dev * rng.gaussian();
    return model;
}

EmbeddingSet embed(const LinearEmbedder& model, const EmbeddingSet& set) {
    EmbeddingSet out = set;
    Forward fwd = forward(model, set.vectors);
    out.vectors = std::move(fwd.z);
    return out;
}

WeightGrad loss_and_weight_grad(const LinearEmbedder& model, const Matrix& inputs,
                                std::span<const mining::NTuple> units, double temperature) {
    const Forward fwd = forward(model, inputs);
    const objective::BatchLoss bl = objective::batch_loss(fwd.z, units, temperature);
    const Matrix grad_u = normalization_backward(fwd, bl.grad);
    return {bl.loss, transpose_matmul(inputs, grad_u)};
}

TrainResult train(const LinearEmbedder& model, const EmbeddingSet& set, const TrainConfig& cfg) {
    if (cfg.epochs < 0) throw Error("epochs must be >= 0");
    if (cfg.batches_per_epoch < 1) throw Error("batches_per_epoch must be >= 1");
    if (cfg.learning_rate <= 0.0) throw Error("learning_rate must be > 0");

    TrainResult result;
    result.model = model;
    Rng rng(cfg.seed);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (int b = 0; b < cfg.batches_per_epoch; ++b) {
            const mining::Batch batch = mining::sample_batch(set, cfg.p, cfg.k, rng);
            Matrix inputs(batch.size(), set.dim());
            for (std::size_t r = 0; r < batch.size(); ++r) {
                const auto src = set.vectors.row(batch.indices[r]);
                auto dst = inputs.row(r);
                for (std::size_t d = 0; d < set.dim(); ++d) dst[d] = src[d];
            }

            const Forward fwd = forward(result.model, inputs);
            std::vector<mining::NTuple> units;
            switch (cfg.strategy.strategy) {
                case mining::Strategy::batch_all:
                    units = mining::to_ntuples(mining::mine_batch_all(fwd.z, batch.labels));
                    break;
                case mining::Strategy::npairs:
                    units = mining::mine_npairs(fwd.z, batch.labels);
                    break;
                case mining::Strategy::semi_hard:
                    units = mining::to_ntuples(
                        mining::mine_semi_hard(fwd.z, batch.labels, cfg.strategy.margin, rng));
                    break;
                case mining::Strategy::epshn:
                    units = mining::to_ntuples(
                        mining::mine_epshn(fwd.z, batch.labels, cfg.strategy.margin));
                    break;
            }

            const objective::BatchLoss bl = objective::batch_loss(fwd.z, units, cfg.temperature);
            const Matrix grad_u = normalization_backward(fwd, bl.grad);
            const Matrix grad_w = transpose_matmul(inputs, grad_u);
            for (std::size_t i = 0; i < result.model.weights.data().size(); ++i)
                result.model.weights.data()[i] -= cfg.learning_rate * grad_w.data()[i];
            epoch_loss += bl.loss;
        }
        result.loss_trace.push_back(epoch_loss / cfg.batches_per_epoch);
    }
    return result;
}

void save_model_csv(const LinearEmbedder& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open file for writing: " + path);
    for (std::size_t j = 0; j < model.dim_out(); ++j) {
        if (j) out << ',';
        out << 'w' << j;
    }
    out << '\n';
    for (std::size_t i = 0; i < model.dim_in(); ++i) {
        for (std::size_t j = 0; j < model.dim_out(); ++j) {
            if (j) out << ',';
            out << csv::format_double(model.weights(i, j));
        }
        out << '\n';
    }
    if (!out) throw Error("write failed: " + path);
}

LinearEmbedder load_model_csv(const std::string& path) {
    const auto records = csv::parse_file(path);
    if (records.empty()) throw Error("line 1: missing model header");
    const std::size_t dim_out = records.front().fields.size();
    for (std::size_t j = 0; j < dim_out; ++j) {
        if (records.front().fields[j] != "w" + std::to_string(j))
            throw Error("line 1: expected model column w" + std::to_string(j));
    }
    LinearEmbedder model;
    model.weights = Matrix(records.size() - 1, dim_out);
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.fields.size() != dim_out)
            throw Error("line " + std::to_string(rec.line) + ": expected " +
                        std::to_string(dim_out) + " fields, got " +
                        std::to_string(rec.fields.size()));
        for (std::size_t j = 0; j < dim_out; ++j) {
            double v = 0.0;
            const auto& f = rec.fields[j];
            const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (res.ec != std::errc{} || res.ptr != f.data() + f.size() || !std::isfinite(v))
                throw Error("line " + std::to_string(rec.line) + ": invalid weight \"" + f + "\"");
            model.weights(i - 1, j) = v;
        }
    }
    if (model.weights.rows() == 0) throw Error("model has no weight rows");
    return model;
}

} // namespace embviz::trainer

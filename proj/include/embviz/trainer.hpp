#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "embviz/dataset.hpp"
#include "embviz/matrix.hpp"
#include "embviz/mining.hpp"

namespace embviz::trainer {

/// Desk-scale embedder: a linear map whose rows are then unit-normalized.
struct LinearEmbedder {
    Matrix weights; // D_in x D_out

    std::size_t dim_in() const { return weights.rows(); }
    std::size_t dim_out() const { return weights.cols(); }
};

/// Entries i.i.d. Gaussian with std 1/sqrt(D_in), seeded.
LinearEmbedder init_embedder(std::size_t dim_in, std::size_t dim_out, std::uint64_t seed);

struct TrainConfig {
    int epochs = 50;
    int batches_per_epoch = 10;
    std::size_t p = 8; // classes per batch
    std::size_t k = 4; // items per class
    double learning_rate = 0.1;
    mining::MinerConfig strategy{};
    double temperature = 1.0;
    std::uint64_t seed = 0; // drives batch sampling and semi-hard positive picks
};

/// Maps rows through the weight matrix and unit-normalizes the results.
/// ids/labels/splits pass through untouched.
EmbeddingSet embed(const LinearEmbedder& model, const EmbeddingSet& set);

struct TrainResult {
    LinearEmbedder model;
    std::vector<double> loss_trace; // one mean batch loss per epoch
};

/// Plain SGD, one step per mined batch: w <- w - lr * dL/dw, chaining the
/// batch loss through row normalization and the linear map. Deterministic for
/// a fixed config.
TrainResult train(const LinearEmbedder& model, const EmbeddingSet& set, const TrainConfig& cfg);

struct WeightGrad {
    double loss = 0.0;
    Matrix grad; // dL/dW, D_in x D_out
};

/// Loss and weight gradient for one batch with the mined units held fixed.
/// This is the exact computation train() steps on; exposed so the whole
/// chain can be checked against finite differences.
WeightGrad loss_and_weight_grad(const LinearEmbedder& model, const Matrix& inputs,
                                std::span<const mining::NTuple> units, double temperature);

/// Model CSV: header w0,...,w{D_out-1}, one row per input dimension,
/// shortest round-trip decimals.
void save_model_csv(const LinearEmbedder& model, const std::string& path);
LinearEmbedder load_model_csv(const std::string& path);

} // namespace embviz::trainer

#include "embviz/objective.hpp"

#include <algorithm>
#include <cmath>

#include "embviz/error.hpp"

namespace embviz::objective {

namespace {

void validate(const SimilarityTuple& tuple, double temperature) {
    if (temperature <= 0.0) throw Error("temperature must be > 0");
    if (tuple.s_an.empty()) throw Error("similarity tuple needs at least one negative");
}

/// log(exp(a) + sum_i exp(b_i)) with the max exponent factored out.
double log_sum_exp(double a, std::span<const double> b) {
    double m = a;
    for (const double v : b) m = std::max(m, v);
    double s = std::exp(a - m);
    for (const double v : b) s += std::exp(v - m);
    return m + std::log(s);
}

} // namespace

double nca_loss(const SimilarityTuple& tuple, double temperature) {
    validate(tuple, temperature);
    const double a = tuple.s_ap / temperature;
    std::vector<double> b(tuple.s_an.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = tuple.s_an[i] / temperature;
    return log_sum_exp(a, b) - a;
}

NcaGrad nca_grad(const SimilarityTuple& tuple, double temperature) {
    validate(tuple, temperature);
    const double a = tuple.s_ap / temperature;
    std::vector<double> b(tuple.s_an.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = tuple.s_an[i] / temperature;
    const double lse = log_sum_exp(a, b);

    NcaGrad grad;
    const double p_pos = std::exp(a - lse);
    grad.d_s_ap = -(1.0 - p_pos) / temperature;
    grad.d_s_an.resize(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) grad.d_s_an[i] = std::exp(b[i] - lse) / temperature;
    return grad;
}

BatchLoss batch_loss(const Matrix& embeddings, std::span<const mining::NTuple> units,
                     double temperature) {
    if (units.empty()) throw Error("batch_loss: empty unit list");
    const std::size_t n = embeddings.rows();
    const double scale = 1.0 / static_cast<double>(units.size());

    BatchLoss result;
    result.grad = Matrix(n, embeddings.cols());
    for (const auto& unit : units) {
        if (unit.anchor >= n || unit.positive >= n) throw Error("batch_loss: unit index out of range");
        const auto za = embeddings.row(unit.anchor);
        const auto zp = embeddings.row(unit.positive);

        SimilarityTuple tuple;
        tuple.s_ap = dot(za, zp);
        tuple.s_an.reserve(unit.negatives.size());
        for (const std::size_t neg : unit.negatives) {
            if (neg >= n) throw Error("batch_loss: unit index out of range");
            tuple.s_an.push_back(dot(za, embeddings.row(neg)));
        }

        result.loss += scale * nca_loss(tuple, temperature);
        const NcaGrad g = nca_grad(tuple, temperature);

        // chain through s = z_a . z_x
        auto ga = result.grad.row(unit.anchor);
        auto gp = result.grad.row(unit.positive);
        for (std::size_t d = 0; d < embeddings.cols(); ++d) {
            ga[d] += scale * g.d_s_ap * zp[d];
            gp[d] += scale * g.d_s_ap * za[d];
        }
        for (std::size_t i = 0; i < unit.negatives.size(); ++i) {
            const auto zn = embeddings.row(unit.negatives[i]);
            auto gn = result.grad.row(unit.negatives[i]);
            for (std::size_t d = 0; d < embeddings.cols(); ++d) {
                ga[d] += scale * g.d_s_an[i] * zn[d];
                gn[d] += scale * g.d_s_an[i] * za[d];
            }
        }
    }
    return result;
}

BatchLoss batch_loss(const Matrix& embeddings, std::span<const mining::Triplet> units,
                     double temperature) {
    const auto tuples = mining::to_ntuples(units);
    return batch_loss(embeddings, tuples, temperature);
}

} // namespace embviz::objective

#include "embviz/tsne.hpp"

#include <algorithm>
#include <cmath>

#include "embviz/error.hpp"
#include "embviz/parallel.hpp"
#include "embviz/rng.hpp"

namespace embviz::tsne {

namespace {

constexpr double kQFloor = 1e-12;
constexpr double kLogSigmaLo = -46.051701859880914; // ln 1e-20
constexpr double kLogSigmaHi = 46.051701859880914;  // ln 1e20

} // namespace

void validate(const TsneConfig& cfg) {
    if (cfg.perplexity <= 1.0) throw Error("perplexity must be > 1");
    if (cfg.iterations < 1) throw Error("iterations must be >= 1");
    if (cfg.learning_rate <= 0.0) throw Error("learning_rate must be > 0");
    if (cfg.momentum_early < 0.0 || cfg.momentum_early >= 1.0 || cfg.momentum_late < 0.0 ||
        cfg.momentum_late >= 1.0)
        throw Error("momenta must lie in [0, 1)");
    if (cfg.exaggeration_factor < 1.0) throw Error("exaggeration_factor must be >= 1");
    if (cfg.exaggeration_iters < 0 || cfg.exaggeration_iters > cfg.iterations)
        throw Error("exaggeration_iters must lie in [0, iterations]");
    if (cfg.calibration_tolerance <= 0.0) throw Error("calibration_tolerance must be > 0");
    if (cfg.calibration_max_iters < 1) throw Error("calibration_max_iters must be >= 1");
}

namespace {

/// Entropy (nats) and conditional row for one bandwidth. Distances are
/// shifted by their minimum before exponentiation; the shift cancels in the
/// normalized weights, so only the exponent range changes.
struct RowEval {
    double entropy = 0.0;
    double weight_sum = 0.0;
};

RowEval eval_row(std::span<const double> sq_dists, std::size_t self_index, double beta,
                 double d_min, std::span<double> weights) {
    RowEval ev;
    double weighted_dist = 0.0;
    for (std::size_t j = 0; j < sq_dists.size(); ++j) {
        if (j == self_index) {
            weights[j] = 0.0;
            continue;
        }
        const double shifted = sq_dists[j] - d_min;
        const double w = std::exp(-beta * shifted);
        weights[j] = w;
        ev.weight_sum += w;
        weighted_dist += w * shifted;
    }
    ev.entropy = std::log(ev.weight_sum) + beta * weighted_dist / ev.weight_sum;
    return ev;
}

} // namespace

Matrix pairwise_sq_dists(const Matrix& vectors) {
    const std::size_t n = vectors.rows();
    Matrix out(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto vi = vectors.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto vj = vectors.row(j);
            double d = 0.0;
            for (std::size_t k = 0; k < vectors.cols(); ++k) {
                const double diff = vi[k] - vj[k];
                d += diff * diff;
            }
            out(i, j) = d;
            out(j, i) = d;
        }
    }
    return out;
}

RowCalibration calibrate_row(std::span<const double> sq_dists_row, std::size_t self_index,
                             double perplexity, double tol, int max_iters) {
    const std::size_t n = sq_dists_row.size();
    if (n < 3) throw Error("calibration needs at least 3 points");
    if (self_index >= n) throw Error("self index out of range");
    if (perplexity <= 1.0 || perplexity > static_cast<double>(n - 1))
        throw Error("perplexity out of range (1, N-1]");

    double d_min = 0.0;
    bool first = true;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == self_index) continue;
        if (first || sq_dists_row[j] < d_min) d_min = sq_dists_row[j];
        first = false;
    }

    RowCalibration cal;
    cal.p_cond.resize(n, 0.0);
    double lo = kLogSigmaLo, hi = kLogSigmaHi;
    double log_sigma = 0.0, weight_sum = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        log_sigma = 0.5 * (lo + hi);
        const double sigma = std::exp(log_sigma);
        const double beta = 0.5 / (sigma * sigma);
        const RowEval ev = eval_row(sq_dists_row, self_index, beta, d_min, cal.p_cond);
        const double perp = std::exp(ev.entropy);
        cal.perplexity_error = std::abs(perp - perplexity);
        weight_sum = ev.weight_sum;
        if (cal.perplexity_error < tol) break;
        if (perp > perplexity) {
            hi = log_sigma; // too flat, shrink the bandwidth
        } else {
            lo = log_sigma;
        }
    }
    cal.sigma = std::exp(log_sigma);
    for (std::size_t j = 0; j < n; ++j) {
        if (j != self_index) cal.p_cond[j] /= weight_sum;
    }
    return cal;
}

Matrix symmetrize(const Matrix& p_cond) {
    const std::size_t n = p_cond.rows();
    if (p_cond.cols() != n) throw Error("conditional matrix must be square");
    Matrix p(n, n, 0.0);
    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = (p_cond(i, j) + p_cond(j, i)) * scale;
            p(i, j) = v;
            p(j, i) = v;
        }
    }
    return p;
}

QMatrix q_matrix(const Matrix& coords) {
    const std::size_t n = coords.rows();
    if (n < 2) throw Error("q_matrix needs at least 2 points");
    QMatrix out;
    out.q = Matrix(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto yi = coords.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto yj = coords.row(j);
            double d = 0.0;
            for (std::size_t k = 0; k < coords.cols(); ++k) {
                const double diff = yi[k] - yj[k];
                d += diff * diff;
            }
            const double w = 1.0 / (1.0 + d);
            out.q(i, j) = w;
            out.q(j, i) = w;
            out.z += 2.0 * w;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) out.q(i, j) = std::max(out.q(i, j) / out.z, kQFloor);
        }
    }
    return out;
}

double kl_divergence(const Matrix& p, const Matrix& q) {
    if (p.rows() != q.rows() || p.cols() != q.cols()) throw Error("KL: shape mismatch");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t j = 0; j < p.cols(); ++j) {
            if (i == j) continue;
            const double pij = p(i, j);
            if (pij > 0.0) kl += pij * std::log(pij / q(i, j));
        }
    }
    return kl;
}

Matrix joint_probabilities(const Matrix& vectors, const TsneConfig& cfg, int threads) {
    const std::size_t n = vectors.rows();
    if (n < 3) throw Error("t-SNE needs at least 3 points");
    if (cfg.perplexity >= static_cast<double>(n - 1))
        throw Error("perplexity must be < N-1 (N=" + std::to_string(n) + ")");
    const Matrix dists = pairwise_sq_dists(vectors);
    Matrix p_cond(n, n, 0.0);
    parallel_for(n, threads, [&](std::size_t i) {
        const RowCalibration cal =
            calibrate_row(dists.row(i), i, cfg.perplexity, cfg.calibration_tolerance,
                          cfg.calibration_max_iters);
        auto row = p_cond.row(i);
        for (std::size_t j = 0; j < n; ++j) row[j] = cal.p_cond[j];
    });
    return symmetrize(p_cond);
}

namespace {

/// Shared by the public kl_gradient and the optimizer: gradient of
/// KL(exaggeration * P || Q) w.r.t. the coords. Z is assembled from per-row
/// partial sums so the result does not depend on the thread count.
Matrix kl_gradient_impl(const Matrix& p, const Matrix& coords, double exaggeration, int threads) {
    const std::size_t n = coords.rows();
    if (p.rows() != n || p.cols() != n) throw Error("gradient: P/coords shape mismatch");

    Matrix w(n, n, 0.0);
    std::vector<double> row_sums(n, 0.0);
    parallel_for(n, threads, [&](std::size_t i) {
        const auto yi = coords.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto yj = coords.row(j);
            double d = 0.0;
            for (std::size_t k = 0; k < coords.cols(); ++k) {
                const double diff = yi[k] - yj[k];
                d += diff * diff;
            }
            const double wij = 1.0 / (1.0 + d);
            w(i, j) = wij;
            s += wij;
        }
        row_sums[i] = s;
    });
    double z = 0.0;
    for (const double s : row_sums) z += s;

    Matrix grad(n, coords.cols(), 0.0);
    parallel_for(n, threads, [&](std::size_t i) {
        const auto yi = coords.row(i);
        auto gi = grad.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto yj = coords.row(j);
            const double wij = w(i, j);
            const double mult = 4.0 * (exaggeration * p(i, j) - wij / z) * wij;
            for (std::size_t k = 0; k < coords.cols(); ++k) gi[k] += mult * (yi[k] - yj[k]);
        }
    });
    return grad;
}

double kl_of_coords(const Matrix& p, const Matrix& coords, int threads) {
    const std::size_t n = coords.rows();
    Matrix w(n, n, 0.0);
    std::vector<double> row_sums(n, 0.0);
    parallel_for(n, threads, [&](std::size_t i) {
        const auto yi = coords.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto yj = coords.row(j);
            double d = 0.0;
            for (std::size_t k = 0; k < coords.cols(); ++k) {
                const double diff = yi[k] - yj[k];
                d += diff * diff;
            }
            const double wij = 1.0 / (1.0 + d);
            w(i, j) = wij;
            s += wij;
        }
        row_sums[i] = s;
    });
    double z = 0.0;
    for (const double s : row_sums) z += s;

    std::vector<double> kl_rows(n, 0.0);
    parallel_for(n, threads, [&](std::size_t i) {
        double kl = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double pij = p(i, j);
            if (pij > 0.0) kl += pij * std::log(pij / std::max(w(i, j) / z, kQFloor));
        }
        kl_rows[i] = kl;
    });
    double kl = 0.0;
    for (const double v : kl_rows) kl += v;
    return kl;
}

} // namespace

Matrix kl_gradient(const Matrix& p, const Matrix& coords, int threads) {
    return kl_gradient_impl(p, coords, 1.0, threads);
}

GradientOptimizer::GradientOptimizer(Matrix p, const TsneConfig& cfg)
    : p_(std::move(p)), cfg_(cfg) {
    const std::size_t n = p_.rows();
    coords_ = Matrix(n, 2);
    velocity_ = Matrix(n, 2, 0.0);
    Rng rng(cfg_.seed);
    for (double& v : coords_.data()) v = 1e-4 * rng.gaussian();
}

Matrix GradientOptimizer::gradient(int iteration, int threads) const {
    const double exaggeration =
        iteration < cfg_.exaggeration_iters ? cfg_.exaggeration_factor : 1.0;
    return kl_gradient_impl(p_, coords_, exaggeration, threads);
}

void GradientOptimizer::apply_update(const Matrix& grad, int iteration) {
    const double momentum =
        iteration < cfg_.exaggeration_iters ? cfg_.momentum_early : cfg_.momentum_late;
    const std::size_t n = coords_.rows();
    for (std::size_t i = 0; i < coords_.data().size(); ++i) {
        velocity_.data()[i] =
            momentum * velocity_.data()[i] - cfg_.learning_rate * grad.data()[i];
        coords_.data()[i] += velocity_.data()[i];
    }
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += coords_(i, 0);
        mean_y += coords_(i, 1);
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        coords_(i, 0) -= mean_x;
        coords_(i, 1) -= mean_y;
    }
}

double GradientOptimizer::kl(int threads) const { return kl_of_coords(p_, coords_, threads); }

TsneResult run(const Matrix& vectors, const TsneConfig& cfg, int threads) {
    validate(cfg);
    const Matrix p = joint_probabilities(vectors, cfg, threads);
    GradientOptimizer opt(p, cfg);
    TsneResult result;
    result.kl_trace.reserve(cfg.iterations);
    for (int t = 0; t < cfg.iterations; ++t) {
        const Matrix grad = opt.gradient(t, threads);
        opt.apply_update(grad, t);
        result.kl_trace.push_back(opt.kl(threads));
    }
    result.coords = opt.coords();
    return result;
}

JointResult joint_embed(const EmbeddingSet& train, const EmbeddingSet& test,
                        const TsneConfig& cfg, int threads) {
    if (test.size() > 0 && train.dim() != test.dim())
        throw Error("joint_embed: dimension mismatch (" + std::to_string(train.dim()) + " vs " +
                    std::to_string(test.dim()) + ")");
    const std::size_t n = train.size() + test.size();
    Matrix stacked(n, train.dim());
    for (std::size_t r = 0; r < train.size(); ++r) {
        const auto src = train.vectors.row(r);
        auto dst = stacked.row(r);
        for (std::size_t d = 0; d < train.dim(); ++d) dst[d] = src[d];
    }
    for (std::size_t r = 0; r < test.size(); ++r) {
        const auto src = test.vectors.row(r);
        auto dst = stacked.row(train.size() + r);
        for (std::size_t d = 0; d < train.dim(); ++d) dst[d] = src[d];
    }
    JointResult out;
    out.result = run(stacked, cfg, threads);
    out.splits.assign(train.size(), Split::train);
    out.splits.insert(out.splits.end(), test.size(), Split::test);
    return out;
}

} // namespace embviz::tsne

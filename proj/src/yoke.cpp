#include "embviz/yoke.hpp"

#include <cmath>

#include "embviz/error.hpp"

namespace embviz::yoke {

YokedResult yoked_run(const Matrix& vectors_a, const Matrix& vectors_b, const YokeConfig& cfg,
                      int threads) {
    return yoked_run_seeded(vectors_a, vectors_b, cfg, cfg.base.seed, cfg.base.seed + 1, threads);
}

YokedResult yoked_run_seeded(const Matrix& vectors_a, const Matrix& vectors_b,
                             const YokeConfig& cfg, std::uint64_t seed_a, std::uint64_t seed_b,
                             int threads) {
    if (cfg.lambda < 0.0) throw Error("lambda must be >= 0");
    tsne::validate(cfg.base);
    const std::size_t n = vectors_a.rows();
    if (vectors_b.rows() != n)
        throw Error("yoked inputs must have the same row count (" + std::to_string(n) + " vs " +
                    std::to_string(vectors_b.rows()) + ")");

    tsne::TsneConfig cfg_a = cfg.base;
    cfg_a.seed = seed_a;
    tsne::TsneConfig cfg_b = cfg.base;
    cfg_b.seed = seed_b;

    const Matrix p_a = tsne::joint_probabilities(vectors_a, cfg_a, threads);
    const Matrix p_b = tsne::joint_probabilities(vectors_b, cfg_b, threads);
    tsne::GradientOptimizer opt_a(p_a, cfg_a);
    tsne::GradientOptimizer opt_b(p_b, cfg_b);

    YokedResult result;
    result.map_a.kl_trace.reserve(cfg.base.iterations);
    result.map_b.kl_trace.reserve(cfg.base.iterations);
    const double penalty_scale = cfg.lambda / static_cast<double>(n);
    for (int t = 0; t < cfg.base.iterations; ++t) {
        Matrix grad_a = opt_a.gradient(t, threads);
        Matrix grad_b = opt_b.gradient(t, threads);
        if (cfg.lambda > 0.0) {
            // d/dy^A of (lambda/2N) sum |y^A - y^B|^2, and its negation for B
            const Matrix& ya = opt_a.coords();
            const Matrix& yb = opt_b.coords();
            for (std::size_t i = 0; i < grad_a.data().size(); ++i) {
                const double pull = penalty_scale * (ya.data()[i] - yb.data()[i]);
                grad_a.data()[i] += pull;
                grad_b.data()[i] -= pull;
            }
        }
        opt_a.apply_update(grad_a, t);
        opt_b.apply_update(grad_b, t);
        result.map_a.kl_trace.push_back(opt_a.kl(threads));
        result.map_b.kl_trace.push_back(opt_b.kl(threads));
    }
    result.map_a.coords = opt_a.coords();
    result.map_b.coords = opt_b.coords();
    result.mean_displacement = displacement(result.map_a.coords, result.map_b.coords).mean;
    return result;
}

Displacement displacement(const Matrix& map_a, const Matrix& map_b) {
    if (map_a.rows() != map_b.rows() || map_a.cols() != map_b.cols())
        throw Error("displacement: map shape mismatch");
    Displacement out;
    out.per_point.reserve(map_a.rows());
    for (std::size_t i = 0; i < map_a.rows(); ++i) {
        double d = 0.0;
        for (std::size_t k = 0; k < map_a.cols(); ++k) {
            const double diff = map_a(i, k) - map_b(i, k);
            d += diff * diff;
        }
        out.per_point.push_back(std::sqrt(d));
        out.mean += out.per_point.back();
    }
    if (!out.per_point.empty()) out.mean /= static_cast<double>(out.per_point.size());
    return out;
}

} // namespace embviz::yoke

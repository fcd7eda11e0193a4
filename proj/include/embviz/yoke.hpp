#pragma once

#include <cstdint>
#include <vector>

#include "embviz/matrix.hpp"
#include "embviz/tsne.hpp"

namespace embviz::yoke {

struct YokeConfig {
    double lambda = 0.01;     // alignment weight; 0 decouples the maps entirely
    tsne::TsneConfig base{};  // shared by both maps
};

struct YokedResult {
    tsne::TsneResult map_a;
    tsne::TsneResult map_b;
    double mean_displacement = 0.0; // mean |y_i^A - y_i^B| at convergence
};

/// Simultaneously optimizes two maps of the same rows under two embeddings,
/// minimizing KL_A + KL_B + (lambda / 2N) * sum_i |y_i^A - y_i^B|^2. The maps
/// run synchronized, one step each per iteration; map A seeds from
/// cfg.base.seed and map B from cfg.base.seed + 1.
YokedResult yoked_run(const Matrix& vectors_a, const Matrix& vectors_b, const YokeConfig& cfg,
                      int threads = 1);

/// Same, with both map seeds explicit.
YokedResult yoked_run_seeded(const Matrix& vectors_a, const Matrix& vectors_b,
                             const YokeConfig& cfg, std::uint64_t seed_a, std::uint64_t seed_b,
                             int threads = 1);

struct Displacement {
    std::vector<double> per_point;
    double mean = 0.0;
};

/// Euclidean distance between corresponding rows of two 2-D maps.
Displacement displacement(const Matrix& map_a, const Matrix& map_b);

} // namespace embviz::yoke

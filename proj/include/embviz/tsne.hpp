#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "embviz/dataset.hpp"
#include "embviz/matrix.hpp"

namespace embviz::tsne {

struct TsneConfig {
    double perplexity = 30.0;
    int iterations = 1000;
    double learning_rate = 100.0;
    double momentum_early = 0.5;
    double momentum_late = 0.8;        // takes over once exaggeration ends
    double exaggeration_factor = 4.0;  // multiplies P for the first exaggeration_iters
    int exaggeration_iters = 100;
    std::uint64_t seed = 0;
    double calibration_tolerance = 1e-5;
    int calibration_max_iters = 50;
};

struct TsneResult {
    Matrix coords;                 // N x 2
    std::vector<double> kl_trace;  // unexaggerated KL after each iteration
};

/// Throws on out-of-range hyperparameters.
void validate(const TsneConfig& cfg);

/// Symmetric, zero-diagonal matrix of squared Euclidean distances.
Matrix pairwise_sq_dists(const Matrix& vectors);

struct RowCalibration {
    double sigma = 0.0;
    std::vector<double> p_cond;      // sums to 1, zero at the self index
    double perplexity_error = 0.0;   // |2^H - target| at the returned sigma
};

/// Bisects sigma_i (in log space over [1e-20, 1e20]) until the conditional
/// distribution's perplexity 2^H matches the target within tol, or max_iters
/// bisections have run. The residual is reported either way.
RowCalibration calibrate_row(std::span<const double> sq_dists_row, std::size_t self_index,
                             double perplexity, double tol, int max_iters);

/// p_ij = (p_{j|i} + p_{i|j}) / (2N): symmetric, zero diagonal, total mass 1.
Matrix symmetrize(const Matrix& p_cond);

struct QMatrix {
    Matrix q;       // Student-t similarities, entries clamped at 1e-12 off-diagonal
    double z = 0.0; // sum over k != l of (1 + |y_k - y_l|^2)^-1
};

QMatrix q_matrix(const Matrix& coords);

/// sum_{i != j} p log(p/q) with 0 log 0 = 0.
double kl_divergence(const Matrix& p, const Matrix& q);

/// Distance computation, per-row calibration and symmetrization in one step.
Matrix joint_probabilities(const Matrix& vectors, const TsneConfig& cfg, int threads = 1);

/// Exact KL gradient dC/dy_i = 4 sum_j (p_ij - q_ij) (1 + |y_i - y_j|^2)^-1 (y_i - y_j).
/// Row sums accumulate in fixed j order, so output is bitwise identical for
/// any thread count.
Matrix kl_gradient(const Matrix& p, const Matrix& coords, int threads = 1);

/// One t-SNE map: momentum gradient descent with early exaggeration, Gaussian
/// 1e-4 seeded init, per-iteration recentering.
TsneResult run(const Matrix& vectors, const TsneConfig& cfg, int threads = 1);

struct JointResult {
    TsneResult result;
    std::vector<Split> splits; // originating set per output row
};

/// Concatenates train rows then test rows and maps them in a single run.
JointResult joint_embed(const EmbeddingSet& train, const EmbeddingSet& test,
                        const TsneConfig& cfg, int threads = 1);

/// Iteration state shared by run() and the yoked optimizer: both drive maps
/// through exactly this code path, which is what makes the lambda = 0 case of
/// yoking bitwise equal to independent runs.
class GradientOptimizer {
public:
    GradientOptimizer(Matrix p, const TsneConfig& cfg);

    /// Exaggeration-aware KL gradient at the given iteration.
    Matrix gradient(int iteration, int threads) const;

    /// Momentum update with the early/late switch at exaggeration_iters,
    /// then recentering.
    void apply_update(const Matrix& grad, int iteration);

    /// KL of the current coords against the unexaggerated P.
    double kl(int threads) const;

    const Matrix& coords() const { return coords_; }

private:
    Matrix p_;
    Matrix coords_;
    Matrix velocity_;
    TsneConfig cfg_;
};

} // namespace embviz::tsne

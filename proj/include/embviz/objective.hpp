#pragma once

#include <span>
#include <vector>

#include "embviz/matrix.hpp"
#include "embviz/mining.hpp"

namespace embviz::objective {

/// Loss inputs for one mined unit: anchor-positive similarity and the
/// anchor-negative similarities, all cosine values on the unit sphere.
struct SimilarityTuple {
    double s_ap = 0.0;
    std::vector<double> s_an;
};

/// NCA-form softmax loss over similarities:
///   L = -log( exp(s_ap/t) / (exp(s_ap/t) + sum_i exp(s_an_i/t)) )
/// computed with max-subtracted log-sum-exp. Always >= 0.
double nca_loss(const SimilarityTuple& tuple, double temperature);

struct NcaGrad {
    double d_s_ap = 0.0;
    std::vector<double> d_s_an;
};

/// dL/ds_ap = -(1 - p_pos)/t, dL/ds_an_i = p_i/t with p the softmax weights.
NcaGrad nca_grad(const SimilarityTuple& tuple, double temperature);

struct BatchLoss {
    double loss = 0.0; // mean over units
    Matrix grad;       // d(mean loss)/d(embeddings), N x D, w.r.t. normalized rows
};

/// Mean nca_loss over the units plus its gradient with respect to the
/// (already normalized) embedding rows; the normalization Jacobian is the
/// trainer's job.
BatchLoss batch_loss(const Matrix& embeddings, std::span<const mining::NTuple> units,
                     double temperature);
BatchLoss batch_loss(const Matrix& embeddings, std::span<const mining::Triplet> units,
                     double temperature);

} // namespace embviz::objective

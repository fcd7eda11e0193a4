#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "embviz/dataset.hpp"
#include "embviz/matrix.hpp"
#include "embviz/rng.hpp"

namespace embviz::mining {

enum class Strategy { batch_all, npairs, semi_hard, epshn };

std::string_view to_string(Strategy strategy);
std::optional<Strategy> strategy_from_string(std::string_view text);

struct MinerConfig {
    double margin = 0.1; // semi-hard similarity window, in cosine units
    Strategy strategy = Strategy::semi_hard;
};

/// P*K row indices into an EmbeddingSet: P distinct classes, K items each.
struct Batch {
    std::vector<std::size_t> indices;
    std::vector<int> labels;

    std::size_t size() const { return indices.size(); }
};

/// Indices below are positions within a batch matrix, not set rows.
struct Triplet {
    std::size_t anchor = 0;
    std::size_t positive = 0;
    std::size_t negative = 0;

    bool operator==(const Triplet&) const = default;
};

struct NTuple {
    std::size_t anchor = 0;
    std::size_t positive = 0;
    std::vector<std::size_t> negatives; // non-empty, pairwise-distinct labels

    bool operator==(const NTuple&) const = default;
};

/// Samples p distinct classes uniformly without replacement from the
/// train-split rows, then k items per class (without replacement when the
/// class has >= k train rows, with replacement otherwise).
Batch sample_batch(const EmbeddingSet& set, std::size_t p, std::size_t k, Rng& rng);

/// Every valid (a,p,n) in lexicographic index order.
std::vector<Triplet> mine_batch_all(const Matrix& embeddings, std::span<const int> labels);

/// Requires exactly two items per class. For each class and each ordering of
/// its pair as (anchor, positive), one tuple whose negatives are the positives
/// of the other classes under the same ordering: 2P tuples, P-1 negatives each.
std::vector<NTuple> mine_npairs(const Matrix& embeddings, std::span<const int> labels);

/// One triplet per anchor that has a positive. The positive is drawn uniformly
/// among same-class others; the negative is the hardest one inside the
/// semi-hard window (s_an < s_ap and s_an > s_ap - margin). Fallbacks when the
/// window is empty: hardest negative strictly below s_ap, then the globally
/// easiest negative. Ties resolve to the smaller index.
std::vector<Triplet> mine_semi_hard(const Matrix& embeddings, std::span<const int> labels,
                                    double margin, Rng& rng);

/// Easy positive (most similar same-class element, ties to the smaller index)
/// paired with a semi-hard negative selected by the mine_semi_hard rule.
std::vector<Triplet> mine_epshn(const Matrix& embeddings, std::span<const int> labels,
                                double margin);

std::vector<NTuple> to_ntuples(std::span<const Triplet> triplets);

} // namespace embviz::mining

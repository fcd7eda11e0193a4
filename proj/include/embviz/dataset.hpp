#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "embviz/matrix.hpp"

namespace embviz {

enum class Split : std::uint8_t { train, test };

std::string_view to_string(Split split);
std::optional<Split> split_from_string(std::string_view text);

/// Labeled, split-tagged vectors. The universal currency of the toolkit.
struct EmbeddingSet {
    std::vector<std::string> ids;
    std::vector<int> labels;
    std::vector<Split> splits;
    Matrix vectors; // N x D, row i belongs to ids[i]

    std::size_t size() const { return ids.size(); }
    std::size_t dim() const { return vectors.cols(); }

    bool operator==(const EmbeddingSet&) const = default;
};

namespace dataset {

struct SyntheticConfig {
    int num_classes = 8;
    int points_per_class = 20;
    int ambient_dim = 64;
    double noise_sigma = 0.1; // std dev of the isotropic perturbation, applied before renormalization
    std::uint64_t seed = 0;
};

/// CSV with header `id,split,label,d0,...,d{D-1}`. D is inferred from the
/// header; every parse error names the 1-based line it occurred on.
EmbeddingSet load_csv(const std::string& path);

/// Canonical form: LF line endings, RFC-4180 quoting, floats as the shortest
/// decimal that round-trips. load_csv(save_csv(s)) == s exactly.
void save_csv(const EmbeddingSet& set, const std::string& path);

std::string to_csv_text(const EmbeddingSet& set);
EmbeddingSet from_csv_text(std::string_view text);

/// Scales every row to unit Euclidean norm. Errors on zero-norm rows,
/// naming the offending row id.
EmbeddingSet normalize_rows(const EmbeddingSet& set);

/// Unit-norm class means drawn uniformly on the sphere (normalized Gaussian);
/// each point is normalize(mean + noise_sigma * gaussian). With
/// noise_sigma == 0 points are exact copies of their class mean. All rows are
/// tagged train; use split_by_class to hold out classes.
EmbeddingSet gen_synthetic(const SyntheticConfig& cfg);

/// Retags each row's split by its label's membership. The two class sets must
/// be disjoint and together cover every label present.
EmbeddingSet split_by_class(const EmbeddingSet& set, const std::set<int>& train_classes,
                            const std::set<int>& test_classes);

} // namespace dataset
} // namespace embviz

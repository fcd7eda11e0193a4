#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embviz/dataset.hpp"

namespace embviz::analysis {

enum class Scope { train, test, all };

std::string_view to_string(Scope scope);
std::optional<Scope> scope_from_string(std::string_view text);

/// Per-item nearest-neighbor similarities: to the closest same-class other
/// point and to the closest different-class point. correct <=> s_same > s_diff
/// (a strict tie counts as incorrect).
struct ScatterPoint {
    std::string id;
    int label = 0;
    Split split = Split::train;
    double s_same = 0.0;
    double s_diff = 0.0;
    bool correct = false;
};

/// Fraction of scoped points whose k nearest neighbors (cosine similarity,
/// self excluded, ties to the smaller row index) include a same-label point.
/// Rows must be unit-norm; neighbors are searched within the scoped subset.
double recall_at_k(const EmbeddingSet& set, int k, Scope scope);

struct ScatterResult {
    std::vector<ScatterPoint> points;
    std::vector<std::string> omitted_ids; // rows lacking a same- or different-class comparator
};

/// One ScatterPoint per row that has both a same-class other point and a
/// different-class point among its candidates. By default candidates share
/// the row's split (train vs train, test vs test); cross_split compares
/// against the whole set.
ScatterResult similarity_scatter(const EmbeddingSet& set, bool cross_split = false);

/// Fraction with s_same strictly greater than s_diff.
double below_diagonal_fraction(std::span<const ScatterPoint> points);

} // namespace embviz::analysis

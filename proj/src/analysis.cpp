#include "embviz/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "embviz/error.hpp"

namespace embviz::analysis {

std::string_view to_string(Scope scope) {
    switch (scope) {
        case Scope::train: return "train";
        case Scope::test: return "test";
        case Scope::all: return "all";
    }
    return "?";
}

std::optional<Scope> scope_from_string(std::string_view text) {
    if (text == "train") return Scope::train;
    if (text == "test") return Scope::test;
    if (text == "all") return Scope::all;
    return std::nullopt;
}

namespace {

void require_unit_rows(const EmbeddingSet& set) {
    for (std::size_t r = 0; r < set.size(); ++r) {
        if (std::abs(squared_norm(set.vectors.row(r)) - 1.0) > 1e-6)
            throw Error("row \"" + set.ids[r] + "\" is not unit-norm; normalize or embed first");
    }
}

std::vector<std::size_t> scoped_rows(const EmbeddingSet& set, Scope scope) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < set.size(); ++r) {
        if (scope == Scope::all || (scope == Scope::train && set.splits[r] == Split::train) ||
            (scope == Scope::test && set.splits[r] == Split::test))
            rows.push_back(r);
    }
    return rows;
}

} // namespace

double recall_at_k(const EmbeddingSet& set, int k, Scope scope) {
    if (k < 1) throw Error("k must be >= 1");
    require_unit_rows(set);
    const auto rows = scoped_rows(set, scope);
    if (rows.size() < 2) throw Error("scoped subset needs at least 2 points");
    if (static_cast<std::size_t>(k) >= rows.size())
        throw Error("k = " + std::to_string(k) + " must be < scoped N = " +
                    std::to_string(rows.size()));

    std::size_t hits = 0;
    std::vector<std::pair<double, std::size_t>> candidates;
    for (const std::size_t a : rows) {
        candidates.clear();
        for (const std::size_t b : rows) {
            if (b == a) continue;
            candidates.emplace_back(dot(set.vectors.row(a), set.vectors.row(b)), b);
        }
        std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end(),
                          [](const auto& lhs, const auto& rhs) {
                              if (lhs.first != rhs.first) return lhs.first > rhs.first;
                              return lhs.second < rhs.second;
                          });
        for (int i = 0; i < k; ++i) {
            if (set.labels[candidates[i].second] == set.labels[a]) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(rows.size());
}

ScatterResult similarity_scatter(const EmbeddingSet& set, bool cross_split) {
    require_unit_rows(set);
    ScatterResult result;
    for (std::size_t a = 0; a < set.size(); ++a) {
        bool have_same = false, have_diff = false;
        double s_same = 0.0, s_diff = 0.0;
        for (std::size_t b = 0; b < set.size(); ++b) {
            if (b == a) continue;
            if (!cross_split && set.splits[b] != set.splits[a]) continue;
            const double s = dot(set.vectors.row(a), set.vectors.row(b));
            if (set.labels[b] == set.labels[a]) {
                if (!have_same || s > s_same) s_same = s;
                have_same = true;
            } else {
                if (!have_diff || s > s_diff) s_diff = s;
                have_diff = true;
            }
        }
        if (!have_same || !have_diff) {
            result.omitted_ids.push_back(set.ids[a]);
            continue;
        }
        result.points.push_back({set.ids[a], set.labels[a], set.splits[a], s_same, s_diff,
                                 s_same > s_diff});
    }
    return result;
}

double below_diagonal_fraction(std::span<const ScatterPoint> points) {
    if (points.empty()) throw Error("below_diagonal_fraction: empty point list");
    std::size_t correct = 0;
    for (const auto& pt : points) {
        if (pt.s_same > pt.s_diff) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(points.size());
}

} // namespace embviz::analysis

#include "embviz/mining.hpp"

#include <algorithm>
#include <map>

#include "embviz/error.hpp"

namespace embviz::mining {

std::string_view to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::batch_all: return "batchall";
        case Strategy::npairs: return "npairs";
        case Strategy::semi_hard: return "semihard";
        case Strategy::epshn: return "epshn";
    }
    return "?";
}

std::optional<Strategy> strategy_from_string(std::string_view text) {
    if (text == "batchall") return Strategy::batch_all;
    if (text == "npairs") return Strategy::npairs;
    if (text == "semihard") return Strategy::semi_hard;
    if (text == "epshn") return Strategy::epshn;
    return std::nullopt;
}

Batch sample_batch(const EmbeddingSet& set, std::size_t p, std::size_t k, Rng& rng) {
    if (p < 1 || k < 1) throw Error("batch shape requires p >= 1 and k >= 1");

    // train rows per class, ascending label / ascending row order
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t r = 0; r < set.size(); ++r) {
        if (set.splits[r] == Split::train) by_class[set.labels[r]].push_back(r);
    }
    if (by_class.size() < p)
        throw Error("batch needs " + std::to_string(p) + " classes but only " +
                    std::to_string(by_class.size()) + " have train rows");

    std::vector<int> classes;
    classes.reserve(by_class.size());
    for (const auto& [label, rows] : by_class) classes.push_back(label);

    // partial Fisher-Yates: first p entries are the chosen classes
    for (std::size_t i = 0; i < p; ++i) {
        const std::size_t j = i + rng.below(classes.size() - i);
        std::swap(classes[i], classes[j]);
    }

    Batch batch;
    batch.indices.reserve(p * k);
    batch.labels.reserve(p * k);
    for (std::size_t c = 0; c < p; ++c) {
        const auto& rows = by_class[classes[c]];
        std::vector<std::size_t> chosen;
        if (rows.size() >= k) {
            std::vector<std::size_t> pool = rows;
            for (std::size_t i = 0; i < k; ++i) {
                const std::size_t j = i + rng.below(pool.size() - i);
                std::swap(pool[i], pool[j]);
                chosen.push_back(pool[i]);
            }
        } else {
            for (std::size_t i = 0; i < k; ++i) chosen.push_back(rows[rng.below(rows.size())]);
        }
        for (const std::size_t row : chosen) {
            batch.indices.push_back(row);
            batch.labels.push_back(classes[c]);
        }
    }
    return batch;
}

std::vector<Triplet> mine_batch_all(const Matrix& embeddings, std::span<const int> labels) {
    const std::size_t n = embeddings.rows();
    if (labels.size() != n) throw Error("labels/embeddings size mismatch");
    std::vector<Triplet> out;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t p = 0; p < n; ++p) {
            if (p == a || labels[p] != labels[a]) continue;
            for (std::size_t neg = 0; neg < n; ++neg) {
                if (labels[neg] == labels[a]) continue;
                out.push_back({a, p, neg});
            }
        }
    }
    return out;
}

std::vector<NTuple> mine_npairs(const Matrix& embeddings, std::span<const int> labels) {
    const std::size_t n = embeddings.rows();
    if (labels.size() != n) throw Error("labels/embeddings size mismatch");

    // pairs per class in first-occurrence order
    std::vector<int> class_order;
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < n; ++i) {
        auto& m = members[labels[i]];
        if (m.empty()) class_order.push_back(labels[i]);
        m.push_back(i);
    }
    for (const auto& [label, m] : members) {
        if (m.size() != 2)
            throw Error("n-pairs requires exactly 2 items per class; class " +
                        std::to_string(label) + " has " + std::to_string(m.size()));
    }

    std::vector<NTuple> out;
    out.reserve(2 * class_order.size());
    for (const int label : class_order) {
        const auto& pair = members[label];
        for (const int ordering : {0, 1}) {
            NTuple t;
            t.anchor = pair[ordering];
            t.positive = pair[1 - ordering];
            for (const int other : class_order) {
                if (other == label) continue;
                t.negatives.push_back(members[other][1 - ordering]);
            }
            out.push_back(std::move(t));
        }
    }
    return out;
}

namespace {

/// Semi-hard negative rule shared by SHN and EPSHN. Candidates are scanned in
/// index order so equal similarities resolve to the smaller index.
std::size_t pick_semi_hard_negative(const Matrix& embeddings, std::span<const int> labels,
                                    std::size_t anchor, double s_ap, double margin) {
    const std::size_t n = embeddings.rows();
    const auto anchor_row = embeddings.row(anchor);

    std::ptrdiff_t window_best = -1, below_best = -1, easiest = -1;
    double window_sim = 0.0, below_sim = 0.0, easiest_sim = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (labels[j] == labels[anchor]) continue;
        const double s = dot(anchor_row, embeddings.row(j));
        if (s < s_ap && s > s_ap - margin && (window_best < 0 || s > window_sim)) {
            window_best = static_cast<std::ptrdiff_t>(j);
            window_sim = s;
        }
        if (s < s_ap && (below_best < 0 || s > below_sim)) {
            below_best = static_cast<std::ptrdiff_t>(j);
            below_sim = s;
        }
        if (easiest < 0 || s < easiest_sim) {
            easiest = static_cast<std::ptrdiff_t>(j);
            easiest_sim = s;
        }
    }
    if (window_best >= 0) return static_cast<std::size_t>(window_best);
    if (below_best >= 0) return static_cast<std::size_t>(below_best);
    return static_cast<std::size_t>(easiest);
}

std::vector<std::size_t> same_class_others(std::span<const int> labels, std::size_t anchor) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (j != anchor && labels[j] == labels[anchor]) out.push_back(j);
    }
    return out;
}

bool has_negative(std::span<const int> labels, std::size_t anchor) {
    for (const int label : labels) {
        if (label != labels[anchor]) return true;
    }
    return false;
}

} // namespace

std::vector<Triplet> mine_semi_hard(const Matrix& embeddings, std::span<const int> labels,
                                    double margin, Rng& rng) {
    const std::size_t n = embeddings.rows();
    if (labels.size() != n) throw Error("labels/embeddings size mismatch");
    if (margin < 0.0) throw Error("margin must be >= 0");
    std::vector<Triplet> out;
    for (std::size_t a = 0; a < n; ++a) {
        const auto positives = same_class_others(labels, a);
        if (positives.empty() || !has_negative(labels, a)) continue;
        const std::size_t p = positives[rng.below(positives.size())];
        const double s_ap = dot(embeddings.row(a), embeddings.row(p));
        out.push_back({a, p, pick_semi_hard_negative(embeddings, labels, a, s_ap, margin)});
    }
    return out;
}

std::vector<Triplet> mine_epshn(const Matrix& embeddings, std::span<const int> labels,
                                double margin) {
    const std::size_t n = embeddings.rows();
    if (labels.size() != n) throw Error("labels/embeddings size mismatch");
    if (margin < 0.0) throw Error("margin must be >= 0");
    std::vector<Triplet> out;
    for (std::size_t a = 0; a < n; ++a) {
        if (!has_negative(labels, a)) continue;
        std::ptrdiff_t easy = -1;
        double easy_sim = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == a || labels[j] != labels[a]) continue;
            const double s = dot(embeddings.row(a), embeddings.row(j));
            if (easy < 0 || s > easy_sim) {
                easy = static_cast<std::ptrdiff_t>(j);
                easy_sim = s;
            }
        }
        if (easy < 0) continue;
        const std::size_t p = static_cast<std::size_t>(easy);
        out.push_back({a, p, pick_semi_hard_negative(embeddings, labels, a, easy_sim, margin)});
    }
    return out;
}

std::vector<NTuple> to_ntuples(std::span<const Triplet> triplets) {
    std::vector<NTuple> out;
    out.reserve(triplets.size());
    for (const auto& t : triplets) out.push_back({t.anchor, t.positive, {t.negative}});
    return out;
}

} // namespace embviz::mining

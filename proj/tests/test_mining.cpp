#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "embviz/dataset.hpp"
#include "embviz/error.hpp"
#include "embviz/mining.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace embviz;
using namespace embviz::mining;

namespace {

/// Unit vectors in the plane with prescribed cosine similarity to (1, 0).
Matrix planar_points(const std::vector<double>& sims_to_first) {
    Matrix m(sims_to_first.size() + 1, 2);
    m(0, 0) = 1.0;
    m(0, 1) = 0.0;
    for (std::size_t i = 0; i < sims_to_first.size(); ++i) {
        m(i + 1, 0) = sims_to_first[i];
        m(i + 1, 1) = std::sqrt(1.0 - sims_to_first[i] * sims_to_first[i]);
    }
    return m;
}

} // namespace

TEST_CASE("sample_batch shape and determinism") {
    const EmbeddingSet set = dataset::gen_synthetic(
        {.num_classes = 4, .points_per_class = 3, .ambient_dim = 4, .noise_sigma = 0.1, .seed = 5});

    Rng rng(1);
    const Batch batch = sample_batch(set, 2, 2, rng);
    CHECK(batch.size() == 4);
    std::set<int> distinct(batch.labels.begin(), batch.labels.end());
    CHECK(distinct.size() == 2);
    for (const int label : distinct)
        CHECK(std::count(batch.labels.begin(), batch.labels.end(), label) == 2);
    for (std::size_t i = 0; i < batch.size(); ++i)
        CHECK(set.labels[batch.indices[i]] == batch.labels[i]);

    Rng rng_b(1);
    CHECK(sample_batch(set, 2, 2, rng_b).indices == batch.indices);

    Rng rng_c(1);
    CHECK_THROWS_WITH_AS(sample_batch(set, 5, 2, rng_c), doctest::Contains("classes"), Error);
}

TEST_CASE("sample_batch without replacement when possible, with when not") {
    const EmbeddingSet set = dataset::gen_synthetic(
        {.num_classes = 2, .points_per_class = 2, .ambient_dim = 4, .noise_sigma = 0.1, .seed = 5});
    Rng rng(3);
    const Batch small = sample_batch(set, 2, 2, rng); // 2 rows per class: no repeats
    for (int label : {0, 1}) {
        std::set<std::size_t> rows;
        for (std::size_t i = 0; i < small.size(); ++i)
            if (small.labels[i] == label) rows.insert(small.indices[i]);
        CHECK(rows.size() == 2);
    }
    const Batch big = sample_batch(set, 2, 5, rng); // k exceeds class size: replacement kicks in
    CHECK(big.size() == 10);
}

TEST_CASE("mine_batch_all counts and order") {
    // P=2, K=2: 4 anchors * 1 positive * 2 negatives = 8 triplets
    Rng rng(2);
    Matrix emb = testsupport::unit_rows(testsupport::random_matrix(rng, 4, 3));
    const std::vector<int> labels = {0, 0, 1, 1};
    const auto triplets = mine_batch_all(emb, labels);
    CHECK(triplets.size() == 8);
    CHECK(triplets.front() == Triplet{0, 1, 2});

    // lexicographic emission order
    for (std::size_t i = 1; i < triplets.size(); ++i) {
        const auto key = [](const Triplet& t) {
            return std::tuple(t.anchor, t.positive, t.negative);
        };
        CHECK(key(triplets[i - 1]) < key(triplets[i]));
    }
}

TEST_CASE("mine_batch_all edge cases") {
    Rng rng(3);
    Matrix emb = testsupport::unit_rows(testsupport::random_matrix(rng, 3, 3));
    CHECK(mine_batch_all(emb, std::vector<int>{5, 5, 5}).empty());

    const auto pair_one = mine_batch_all(emb, std::vector<int>{0, 0, 1});
    CHECK(pair_one.size() == 2); // anchors only in the two-element class
    for (const auto& t : pair_one) CHECK(t.negative == 2);
}

TEST_CASE("mine_batch_all matches the brute-force oracle on random batches") {
    Rng rng(7);
    for (int iter = 0; iter < 100; ++iter) {
        const std::size_t n = 2 + rng.below(9);
        std::vector<int> labels;
        for (std::size_t i = 0; i < n; ++i) labels.push_back(static_cast<int>(rng.below(4)));
        const Matrix emb = testsupport::unit_rows(testsupport::random_matrix(rng, n, 3));

        const auto got = mine_batch_all(emb, labels);
        std::set<std::tuple<std::size_t, std::size_t, std::size_t>> got_set;
        for (const auto& t : got) got_set.insert({t.anchor, t.positive, t.negative});
        CHECK(got_set.size() == got.size());
        CHECK(got_set == oracles::batch_all_triplets(labels));
        CHECK(got.size() == oracles::batch_all_count(labels));
    }
}

TEST_CASE("mine_npairs construction") {
    Rng rng(4);
    const Matrix emb = testsupport::unit_rows(testsupport::random_matrix(rng, 6, 3));
    const std::vector<int> labels = {0, 0, 1, 1, 2, 2};
    const auto tuples = mine_npairs(emb, labels);
    REQUIRE(tuples.size() == 6); // 2P with P-1 negatives each
    for (const auto& t : tuples) {
        CHECK(t.negatives.size() == 2);
        CHECK(labels[t.anchor] == labels[t.positive]);
        CHECK(t.anchor != t.positive);
        std::set<int> neg_labels;
        for (const std::size_t n : t.negatives) {
            CHECK(labels[n] != labels[t.anchor]);
            neg_labels.insert(labels[n]);
        }
        CHECK(neg_labels.size() == t.negatives.size()); // pairwise distinct classes
    }
    // each ordering of each pair appears exactly once as (anchor, positive)
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& t : tuples) seen.insert({t.anchor, t.positive});
    CHECK(seen.size() == 6);
    // negatives are the positives of the other classes under the same ordering
    for (const auto& t : tuples) {
        const bool anchor_is_first = t.anchor % 2 == 0;
        for (const std::size_t n : t.negatives) CHECK(n % 2 == (anchor_is_first ? 1 : 0));
    }
}

TEST_CASE("mine_npairs invariants hold on random pair batches") {
    Rng rng(9);
    for (int iter = 0; iter < 50; ++iter) {
        const std::size_t p = 2 + rng.below(5);
        // P classes, two items each, in shuffled positions
        std::vector<int> labels;
        for (std::size_t c = 0; c < p; ++c) {
            labels.push_back(static_cast<int>(c));
            labels.push_back(static_cast<int>(c));
        }
        for (std::size_t i = labels.size(); i > 1; --i)
            std::swap(labels[i - 1], labels[rng.below(i)]);
        const Matrix emb = testsupport::unit_rows(testsupport::random_matrix(rng, 2 * p, 3));

        const auto tuples = mine_npairs(emb, labels);
        CHECK(tuples.size() == 2 * p);
        std::set<std::pair<std::size_t, std::size_t>> orderings;
        for (const auto& t : tuples) {
            CHECK(t.negatives.size() == p - 1);
            CHECK(labels[t.anchor] == labels[t.positive]);
            CHECK(t.anchor != t.positive);
            std::set<int> neg_labels;
            for (const std::size_t n : t.negatives) {
                CHECK(labels[n] != labels[t.anchor]);
                neg_labels.insert(labels[n]);
            }
            CHECK(neg_labels.size() == p - 1);
            orderings.insert({t.anchor, t.positive});
        }
        CHECK(orderings.size() == 2 * p);
    }
}

TEST_CASE("mine_npairs smallest case and K validation") {
    Rng rng(5);
    const Matrix emb4 = testsupport::unit_rows(testsupport::random_matrix(rng, 4, 3));
    const auto tuples = mine_npairs(emb4, std::vector<int>{0, 0, 1, 1});
    CHECK(tuples.size() == 4);
    for (const auto& t : tuples) CHECK(t.negatives.size() == 1);

    const Matrix emb3 = testsupport::unit_rows(testsupport::random_matrix(rng, 3, 3));
    CHECK_THROWS_WITH_AS(mine_npairs(emb3, std::vector<int>{0, 0, 0}),
                         doctest::Contains("exactly 2"), Error);
}

TEST_CASE("mine_semi_hard follows the window rule") {
    // anchor 0, its positive at sim 0.8, negatives at 0.9 / 0.75 / 0.5
    const Matrix emb = planar_points({0.8, 0.9, 0.75, 0.5});
    const std::vector<int> labels = {0, 0, 1, 2, 3};
    Rng rng(0);
    const auto triplets = mine_semi_hard(emb, labels, 0.3, rng);

    const auto anchor0 = std::find_if(triplets.begin(), triplets.end(),
                                      [](const Triplet& t) { return t.anchor == 0; });
    REQUIRE(anchor0 != triplets.end());
    CHECK(anchor0->positive == 1);
    CHECK(anchor0->negative == 3); // sim 0.75: hardest inside (0.5, 0.8)
}

TEST_CASE("mine_semi_hard fallback to easiest when all negatives are harder") {
    const Matrix emb = planar_points({0.8, 0.9, 0.95});
    const std::vector<int> labels = {0, 0, 1, 2};
    Rng rng(0);
    const auto triplets = mine_semi_hard(emb, labels, 0.3, rng);
    const auto anchor0 = std::find_if(triplets.begin(), triplets.end(),
                                      [](const Triplet& t) { return t.anchor == 0; });
    REQUIRE(anchor0 != triplets.end());
    CHECK(anchor0->negative == 2); // smallest similarity among {0.9, 0.95}
}

TEST_CASE("mine_semi_hard on a single-class batch is empty") {
    Rng rng(6);
    const Matrix emb = testsupport::unit_rows(testsupport::random_matrix(rng, 4, 3));
    Rng miner_rng(0);
    CHECK(mine_semi_hard(emb, std::vector<int>{1, 1, 1, 1}, 0.1, miner_rng).empty());
}

TEST_CASE("mine_epshn picks the easy positive and a semi-hard negative") {
    // anchor 0: positives at sims 0.6 and 0.9, negatives at 0.95 / 0.85 / 0.2
    const Matrix emb = planar_points({0.6, 0.9, 0.95, 0.85, 0.2});
    const std::vector<int> labels = {0, 0, 0, 1, 2, 3};
    const auto triplets = mine_epshn(emb, labels, 0.3);
    const auto anchor0 = std::find_if(triplets.begin(), triplets.end(),
                                      [](const Triplet& t) { return t.anchor == 0; });
    REQUIRE(anchor0 != triplets.end());
    CHECK(anchor0->positive == 2); // sim 0.9 beats 0.6
    CHECK(anchor0->negative == 4); // 0.85 inside (0.6, 0.9); 0.95 too hard, 0.2 below window
}

TEST_CASE("mine_epshn tie-break and singleton positive") {
    // two positives at identical similarity: smaller index wins
    Matrix emb = planar_points({0.7, 0.7, 0.1});
    const std::vector<int> labels = {0, 0, 0, 1};
    const auto triplets = mine_epshn(emb, labels, 0.2);
    const auto anchor0 = std::find_if(triplets.begin(), triplets.end(),
                                      [](const Triplet& t) { return t.anchor == 0; });
    REQUIRE(anchor0 != triplets.end());
    CHECK(anchor0->positive == 1);

    // an anchor with exactly one positive uses it
    const Matrix emb2 = planar_points({0.4, 0.0});
    const auto t2 = mine_epshn(emb2, std::vector<int>{0, 0, 1}, 0.2);
    const auto a0 = std::find_if(t2.begin(), t2.end(),
                                 [](const Triplet& t) { return t.anchor == 0; });
    REQUIRE(a0 != t2.end());
    CHECK(a0->positive == 1);
}

TEST_CASE("selection miners match the oracle rule on random batches") {
    Rng rng(12);
    for (int iter = 0; iter < 100; ++iter) {
        const std::size_t n = 4 + rng.below(10);
        std::vector<int> labels;
        for (std::size_t i = 0; i < n; ++i) labels.push_back(static_cast<int>(rng.below(4)));
        const Matrix emb = testsupport::unit_rows(testsupport::random_matrix(rng, n, 4));
        const double margin = 0.05 + 0.3 * rng.uniform();

        // EPSHN is fully determined: positive and negative must match the oracle
        const auto epshn = mine_epshn(emb, labels, margin);
        std::set<std::size_t> epshn_anchors;
        for (const auto& t : epshn) {
            epshn_anchors.insert(t.anchor);
            CHECK(labels[t.anchor] == labels[t.positive]);
            CHECK(t.anchor != t.positive);
            CHECK(labels[t.negative] != labels[t.anchor]);
            CHECK(t.positive == oracles::easy_positive(emb, labels, t.anchor));
            const double s_ap = dot(emb.row(t.anchor), emb.row(t.positive));
            CHECK(t.negative == oracles::semi_hard_negative(emb, labels, t.anchor, s_ap, margin));
        }
        CHECK(epshn_anchors.size() == epshn.size()); // at most one triplet per anchor

        // SHN: the positive is a random same-class other; the negative must
        // match the oracle given that positive
        Rng miner_rng(iter);
        const auto shn = mine_semi_hard(emb, labels, margin, miner_rng);
        std::set<std::size_t> shn_anchors;
        for (const auto& t : shn) {
            shn_anchors.insert(t.anchor);
            CHECK(labels[t.anchor] == labels[t.positive]);
            CHECK(t.anchor != t.positive);
            CHECK(labels[t.negative] != labels[t.anchor]);
            const double s_ap = dot(emb.row(t.anchor), emb.row(t.positive));
            CHECK(t.negative == oracles::semi_hard_negative(emb, labels, t.anchor, s_ap, margin));
        }
        CHECK(shn_anchors.size() == shn.size());

        // every anchor with a positive and a negative is represented
        std::size_t expected_anchors = 0;
        for (std::size_t a = 0; a < n; ++a) {
            const auto same =
                std::count(labels.begin(), labels.end(), labels[a]);
            if (same >= 2 && static_cast<std::size_t>(same) < n) ++expected_anchors;
        }
        CHECK(epshn.size() == expected_anchors);
        CHECK(shn.size() == expected_anchors);

        // determinism for a fixed seed
        Rng replay(iter);
        CHECK(mine_semi_hard(emb, labels, margin, replay) == shn);
    }
}

#include "rankneat/error.hpp"
#include "rankneat/ranker.hpp"
#include "rankneat/synthetic.hpp"
#include "support.hpp"

#include <cmath>
#include <doctest.h>

using namespace rankneat;
using namespace rankneat::testing;
using doctest::Approx;

namespace {

// Noiseless corpus and its generating weights.
SyntheticCorpus noiseless(std::uint64_t seed, std::size_t d = 8) {
    SyntheticSpec spec;
    spec.dimension = d;
    spec.participants = 4;
    spec.windows_per_session = 20;
    spec.label_noise_std = 0.0;
    spec.seed = seed;
    return generate(spec);
}

}  // namespace

TEST_CASE("score") {
    const std::vector<double> x{2.5, 9.0};
    CHECK(score(LinearRanker(2, {{0, 1.0}}), x) == 2.5);
    CHECK(score(LinearRanker(2), x) == 0.0);
    const std::vector<double> y{3.0, 3.0};
    CHECK(score(LinearRanker(2, {{0, 1.0}, {1, -1.0}}), y) == 0.0);
    const std::vector<double> short_x{1.0};
    CHECK_THROWS_AS(score(LinearRanker(2), short_x), Error);
}

TEST_CASE("LinearRanker validates its entries") {
    CHECK_THROWS_AS(LinearRanker(2, {{2, 1.0}}), Error);
    CHECK_THROWS_AS(LinearRanker(2, {{0, 1.0}, {0, 2.0}}), Error);
    CHECK_THROWS_AS(LinearRanker(2, {{0, std::nan("")}}), Error);
    LinearRanker r(3, {{2, 1.5}, {0, -1.0}});
    CHECK(r.entries().front().index == 0);
    CHECK(r.weight(1) == 0.0);
    r.erase(2);
    CHECK_FALSE(r.contains(2));
    r.set(1, 4.0);
    CHECK(r.to_dense() == std::vector<double>{-1.0, 4.0, 0.0});
}

TEST_CASE("pair_logit") {
    const LinearRanker r(1, {{0, 1.0}});
    const std::vector<double> one{1.0};
    const std::vector<double> zero{0.0};
    const auto same = pair_logit(r, one, one);
    CHECK(same.z == 0.0);
    CHECK(same.probability == 0.5);
    const auto s = pair_logit(r, one, zero);
    CHECK(s.z == 1.0);
    CHECK(s.probability == Approx(0.7310585786));
    const auto swapped = pair_logit(r, zero, one);
    CHECK(swapped.z == -s.z);
    CHECK(swapped.probability == Approx(1.0 - s.probability));
}

TEST_CASE("sigmoid is antisymmetric and stable") {
    for (double z : {-800.0, -30.0, -1.5, 0.0, 0.3, 2.0, 40.0, 800.0}) {
        const double p = sigmoid(z);
        CHECK(std::isfinite(p));
        CHECK(sigmoid(-z) == Approx(1.0 - p).epsilon(1e-12));
        CHECK(p == Approx(1.0 / (1.0 + std::exp(-z))).epsilon(1e-12));
    }
}

TEST_CASE("bce") {
    CHECK(bce(0.5, 1) == Approx(std::log(2.0)));
    CHECK(bce(1.0 - kProbabilityEpsilon, 1) == Approx(1e-7).epsilon(1e-3));
    CHECK(bce(kProbabilityEpsilon, 1) == Approx(16.118095651));
    const double ceiling = -std::log(kProbabilityEpsilon);
    for (double p : {0.0, 1e-12, 0.1, 0.5, 0.9, 1.0}) {
        for (int y : {0, 1}) {
            CHECK(bce(p, y) >= 0.0);
            CHECK(bce(p, y) <= ceiling + 1e-8);
        }
    }
}

TEST_CASE("pair_accuracy anchors") {
    const auto corpus = noiseless(11);
    const PairDataset data(corpus.sessions, 0.25);
    REQUIRE_FALSE(data.empty());
    CHECK(pair_accuracy(LinearRanker(data.dimension()), data) == 0.5);
    CHECK(pair_accuracy(corpus.true_weights, data) == 1.0);
    CHECK(pair_accuracy(corpus.true_weights.scaled(-1.0), data) == 0.0);
    CHECK_THROWS_AS(pair_accuracy(corpus.true_weights, PairDataset{}), Error);
}

TEST_CASE("accuracy complement, bias irrelevance and scale invariance") {
    SyntheticSpec spec;
    spec.dimension = 6;
    spec.participants = 3;
    spec.windows_per_session = 25;
    spec.label_noise_std = 1.0;
    const auto corpus = generate(spec);
    const PairDataset data(corpus.sessions, 0.15);
    Rng rng(5);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> w(6);
        for (auto& v : w) v = normal(rng);
        const auto r = LinearRanker::dense(w);
        const double a = pair_accuracy(r, data);
        CHECK(pair_accuracy(r.scaled(-1.0), data) == Approx(1.0 - a).epsilon(1e-12));
        CHECK(pair_accuracy(r.scaled(3.7), data) == a);

        // A constant bias adds the same amount to both scores of a pair.
        const double c = normal(rng) * 10.0;
        for (const auto& p : data.pairs()) {
            const auto x = data.first_features(p);
            const auto y = data.second_features(p);
            const double z = pair_logit(r, x, y).z;
            const double biased = (score(r, x) + c) - (score(r, y) + c);
            CHECK(biased == Approx(z).epsilon(1e-9));
        }
    }
}

TEST_CASE("evaluate_pairs agrees with a per-pair recomputation") {
    const auto corpus = noiseless(2, 5);
    const PairDataset data(corpus.sessions, 0.2);
    const LinearRanker r(5, {{0, 0.3}, {3, -1.2}});
    double credit = 0.0;
    double loss = 0.0;
    for (const auto& p : data.pairs()) {
        const auto s = pair_logit(r, data.first_features(p), data.second_features(p));
        credit += s.z == 0.0 ? 0.5 : ((s.z > 0.0) == (p.label == 1) ? 1.0 : 0.0);
        loss += bce(s.probability, p.label);
    }
    const auto eval = evaluate_pairs(r, data);
    const auto n = static_cast<double>(data.size());
    CHECK(eval.accuracy == Approx(credit / n).epsilon(1e-12));
    CHECK(eval.mean_loss == Approx(loss / n).epsilon(1e-12));
}

TEST_CASE("ranker JSON round trip") {
    const LinearRanker r(5, {{1, 0.1}, {4, -2.75}});
    const auto json = to_json(r);
    CHECK(json["dimension"] == 5);
    CHECK(json["weights"]["4"] == -2.75);
    CHECK(ranker_from_json(json) == r);
    CHECK(ranker_from_json(nlohmann::json::parse(json.dump())) == r);
    CHECK_THROWS_AS(ranker_from_json(nlohmann::json::parse(R"({"dimension":2,"weights":{"x":1}})")), Error);
}

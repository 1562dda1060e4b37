#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hfedsn/masks.hpp"

using namespace hfedsn;

TEST_SUITE("masks") {

TEST_CASE("sigmoid fixed points") {
    CHECK(sigmoid(0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(sigmoid(-std::log(3.0)) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(sigmoid(1000.0) == 1.0);
    CHECK(sigmoid(-1000.0) == 0.0);
}

TEST_CASE("logit clamps the endpoints") {
    CHECK(logit_clamped(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(logit_clamped(1.0) == doctest::Approx(13.815509557963774).epsilon(1e-9));
    CHECK(logit_clamped(0.0) == doctest::Approx(-13.815509557963774).epsilon(1e-9));
}

TEST_CASE("logit inverts sigmoid away from saturation") {
    for (double s : {-8.0, -2.5, -0.1, 0.0, 0.3, 4.2, 9.9}) {
        CHECK(logit_clamped(sigmoid(s)) == doctest::Approx(s).epsilon(1e-9));
    }
}

TEST_CASE("mask transforms round trip") {
    ScoreMask scores{{-2.0, -0.5, 0.0, 0.5, 2.0}};
    ProbabilityMask theta = sigmoid_mask(scores);
    ScoreMask back = logit_mask(theta);
    REQUIRE(back.values.size() == scores.values.size());
    for (std::size_t i = 0; i < scores.values.size(); ++i) {
        CHECK(back.values[i] == doctest::Approx(scores.values[i]).epsilon(1e-9));
    }
}

TEST_CASE("binary mask bit accounting") {
    BinaryMask m(13);
    CHECK(m.size() == 13);
    CHECK(m.packed_bits() == 16);
    CHECK(m.count_ones() == 0);
    m.set(0, true);
    m.set(7, true);
    m.set(12, true);
    CHECK(m.count_ones() == 3);
    CHECK(m.get(0));
    CHECK_FALSE(m.get(1));
    CHECK(m.get(12));
    m.set(7, false);
    CHECK(m.count_ones() == 2);
    CHECK_FALSE(m.get(7));
}

TEST_CASE("from_bits and equality") {
    BinaryMask a = BinaryMask::from_bits({1, 0, 1, 1, 0});
    BinaryMask b = BinaryMask::from_bits({1, 0, 1, 1, 0});
    BinaryMask c = BinaryMask::from_bits({1, 0, 1, 1, 1});
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.count_ones() == 3);
}

TEST_CASE("degenerate probabilities sample exactly") {
    ProbabilityMask theta{{0.0, 1.0, 0.0, 1.0}};
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        BinaryMask m = sample_binary_mask(theta, rng);
        CHECK_FALSE(m.get(0));
        CHECK(m.get(1));
        CHECK_FALSE(m.get(2));
        CHECK(m.get(3));
    }
}

TEST_CASE("sampled ones concentrate around theta") {
    ProbabilityMask theta{std::vector<double>(10000, 0.7)};
    Rng rng(2);
    BinaryMask m = sample_binary_mask(theta, rng);
    double frequency = static_cast<double>(m.count_ones()) / 10000.0;
    CHECK(std::abs(frequency - 0.7) < 0.025);
}

TEST_CASE("threshold mask uses a strict comparison") {
    ProbabilityMask theta{{0.4999, 0.5, 0.5001, 1.0, 0.0}};
    BinaryMask m = threshold_mask(theta);
    CHECK_FALSE(m.get(0));
    CHECK_FALSE(m.get(1));
    CHECK(m.get(2));
    CHECK(m.get(3));
    CHECK_FALSE(m.get(4));
}

TEST_CASE("apply_mask zeroes dropped coordinates") {
    ParameterVector w({2.0, -3.0, 4.0}, {{0, 3}});
    BinaryMask m = BinaryMask::from_bits({1, 0, 1});
    std::vector<double> out = apply_mask(w, m);
    CHECK(out == std::vector<double>{2.0, 0.0, 4.0});

    BinaryMask wrong(2);
    CHECK_THROWS_AS(apply_mask(w, wrong), std::invalid_argument);
}

TEST_CASE("apply_probability_mask scales coordinates") {
    ParameterVector w({2.0, -3.0, 4.0}, {{0, 3}});
    ProbabilityMask theta{{0.5, 1.0, 0.0}};
    std::vector<double> out = apply_probability_mask(w, theta);
    CHECK(out == std::vector<double>{1.0, -3.0, 0.0});
}

}  // TEST_SUITE

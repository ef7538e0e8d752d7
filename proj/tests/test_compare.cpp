#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mfto/compare.hpp"
#include "mfto/rng.hpp"
#include "support.hpp"

using namespace mfto;

TEST_CASE("identical vectors score a perfect cosine and sign agreement") {
    Eigen::VectorXd v(4), w(4);
    v << 0.3, -0.2, 0.8, -0.1;
    w << 1.0, 2.0, 0.5, 1.5;
    CHECK(weighted_cosine(v, v, w) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sign_agreement(v, v, w) == doctest::Approx(1.0));
}

TEST_CASE("sign alignment makes the scores invariant under global flips") {
    Eigen::VectorXd a(5), w = Eigen::VectorXd::Ones(5);
    a << 0.4, -0.6, 0.1, 0.7, -0.2;
    Eigen::VectorXd b = -2.5 * a;  // flipped and rescaled
    CHECK(weighted_cosine(a, b, w) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sign_agreement(a, b, w) == doctest::Approx(1.0));
}

TEST_CASE("weights steer the cosine toward the heavy cells") {
    // vectors agree on cell 0 and disagree on cell 1
    Eigen::VectorXd a(2), b(2);
    a << 1.0, 1.0;
    b << 1.0, -1.0;
    Eigen::VectorXd w_heavy0(2), w_heavy1(2);
    w_heavy0 << 10.0, 0.1;
    w_heavy1 << 0.1, 10.0;
    CHECK(weighted_cosine(a, b, w_heavy0) > 0.9);
    // with the weight on the disagreeing cell, alignment picks the other sign
    // and the agreeing cell becomes the minority; score stays symmetric
    CHECK(weighted_cosine(a, b, w_heavy1) == doctest::Approx(weighted_cosine(a, b, w_heavy0)).epsilon(1e-12));
    const double s0 = sign_agreement(a, b, w_heavy0);
    CHECK(s0 == doctest::Approx(10.0 / 10.1).epsilon(1e-10));
}

TEST_CASE("unrelated random vectors score low") {
    Rng rng(7);
    Eigen::VectorXd w = Eigen::VectorXd::Ones(500);
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
        Eigen::VectorXd a(500), b(500);
        for (int i = 0; i < 500; ++i) {
            a[i] = rng.normal();
            b[i] = rng.normal();
        }
        worst = std::max(worst, weighted_cosine(a, b, w));
    }
    CHECK(worst < 0.3);
}

TEST_CASE("orthogonal vectors score exactly zero") {
    Eigen::VectorXd a(2), b(2), w = Eigen::VectorXd::Ones(2);
    a << 1.0, 1.0;
    b << 1.0, -1.0;
    CHECK(weighted_cosine(a, b, w) == doctest::Approx(0.0));
}

TEST_CASE("zero cells are excluded from the sign tally") {
    Eigen::VectorXd a(4), b(4), w = Eigen::VectorXd::Ones(4);
    a << 1.0, 0.0, -1.0, 1.0;
    b << 1.0, 1.0, -1.0, 0.0;
    // cells 1 and 3 have a zero on one side; of the rest both agree
    CHECK(sign_agreement(a, b, w) == doctest::Approx(1.0));
}

TEST_CASE("mismatched sizes and zero-norm inputs are rejected") {
    Eigen::VectorXd a = Eigen::VectorXd::Ones(3);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(4);
    Eigen::VectorXd w = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(weighted_cosine(a, b, w), ComparisonError);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(weighted_cosine(a, z, w), ComparisonError);
    Eigen::VectorXd wneg(3);
    wneg << 1.0, -1.0, 1.0;
    CHECK_THROWS_AS(weighted_cosine(a, a, wneg), ComparisonError);
}

TEST_CASE("matching assigns each reference its best candidate") {
    // references: two orthogonal directions; candidates: noisy copies in
    // swapped order plus an unrelated vector
    const int n = 200;
    Rng rng(3);
    Eigen::VectorXd r0(n), r1(n);
    for (int i = 0; i < n; ++i) {
        r0[i] = std::sin(0.1 * i);
        r1[i] = std::cos(0.1 * i);
    }
    Eigen::MatrixXd ref(n, 2);
    ref.col(0) = r0;
    ref.col(1) = r1;
    std::vector<Eigen::VectorXd> cands;
    Eigen::VectorXd noise(n);
    for (int i = 0; i < n; ++i) noise[i] = 0.05 * rng.normal();
    cands.push_back(-r1 + noise);  // flipped copy of reference 1
    cands.push_back(r0 + noise);   // copy of reference 0
    Eigen::VectorXd junk(n);
    for (int i = 0; i < n; ++i) junk[i] = rng.normal();
    cands.push_back(junk);

    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    ComparisonReport rep = match_eigenfunctions(ref, cands, w);
    REQUIRE(rep.pairs.size() == 2);
    for (const auto& p : rep.pairs) {
        if (p.reference == 0) CHECK(p.candidate == 1);
        if (p.reference == 1) CHECK(p.candidate == 0);
        CHECK(p.cosine > 0.95);
    }
    CHECK(rep.min_cosine > 0.95);
    CHECK(rep.min_sign_agreement > 0.9);
}

TEST_CASE("matching never assigns one candidate twice") {
    const int n = 50;
    Eigen::VectorXd base = Eigen::VectorXd::LinSpaced(n, -1.0, 1.0);
    Eigen::MatrixXd ref(n, 2);
    ref.col(0) = base;
    ref.col(1) = base;  // both references prefer the same candidate
    std::vector<Eigen::VectorXd> cands = {base, Eigen::VectorXd::Ones(n)};
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    ComparisonReport rep = match_eigenfunctions(ref, cands, w);
    REQUIRE(rep.pairs.size() == 2);
    CHECK(rep.pairs[0].candidate != rep.pairs[1].candidate);
}

TEST_CASE("matching with fewer candidates covers only that many references") {
    const int n = 20;
    Eigen::MatrixXd ref(n, 3);
    ref.col(0) = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
    ref.col(1) = Eigen::VectorXd::LinSpaced(n, 1.0, -1.0);
    ref.col(2) = Eigen::VectorXd::Ones(n);
    std::vector<Eigen::VectorXd> cands = {ref.col(1)};
    ComparisonReport rep = match_eigenfunctions(ref, cands, Eigen::VectorXd::Ones(n));
    REQUIRE(rep.pairs.size() == 1);
    CHECK(rep.pairs[0].reference == 1);
    CHECK(rep.pairs[0].cosine == doctest::Approx(1.0).epsilon(1e-12));
}

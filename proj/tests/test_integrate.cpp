#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mfto/integrate.hpp"
#include "mfto/models.hpp"
#include "support.hpp"

using namespace mfto;

namespace {
const std::vector<CoordinateDomain> free_domain_2d = {{-100, 100, Boundary::truncated},
                                                      {-100, 100, Boundary::truncated}};
}

TEST_CASE("zero field gives the identity flow") {
    auto field = [](const Eigen::VectorXd& z) { return Eigen::VectorXd::Zero(z.size()); };
    PhaseState z0{Eigen::Vector2d(0.3, -1.0), Eigen::Vector2d(0.5, 2.0)};
    for (Scheme s : {Scheme::explicit_euler, Scheme::rk4}) {
        PhaseState z = flow(field, z0, {s, 7, 1.25}, free_domain_2d);
        CHECK(z.q == z0.q);
        CHECK(z.p == z0.p);
    }
}

TEST_CASE("free particle is integrated exactly by explicit Euler") {
    const double m = 2.5;
    auto field = [&](const Eigen::VectorXd& z) {
        Eigen::VectorXd f(2);
        f << z[1] / m, 0.0;
        return f;
    };
    std::vector<CoordinateDomain> dom = {{-1e6, 1e6, Boundary::truncated}};
    PhaseState z0{(Eigen::VectorXd(1) << 0.7).finished(), (Eigen::VectorXd(1) << -1.3).finished()};
    PhaseState z = flow(field, z0, {Scheme::explicit_euler, 10, 3.0}, dom);
    CHECK(z.q[0] == doctest::Approx(0.7 - 1.3 * 3.0 / m).epsilon(1e-14));
    CHECK(z.p[0] == doctest::Approx(-1.3));
}

TEST_CASE("rk4 self-convergence and fourth-order energy error on the double well") {
    DoubleWell2D model;
    Rng rng(3);
    for (int t = 0; t < 5; ++t) {
        PhaseState z0{Eigen::Vector2d(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)),
                      Eigen::Vector2d(rng.uniform(-1, 1), rng.uniform(-1, 1))};
        PhaseState a = flow(model, z0, {Scheme::rk4, 1000, 1.0});
        PhaseState b = flow(model, z0, {Scheme::rk4, 2000, 1.0});
        CHECK((a.flat() - b.flat()).norm() < 1e-6);

        PhaseState ref = flow(model, z0, {Scheme::rk4, 6400, 1.0});
        const double e1 = (flow(model, z0, {Scheme::rk4, 100, 1.0}).flat() - ref.flat()).norm();
        const double e2 = (flow(model, z0, {Scheme::rk4, 200, 1.0}).flat() - ref.flat()).norm();
        if (e2 > 1e-12) {  // above rounding floor
            CHECK(e1 / e2 > 8.0);
            CHECK(e1 / e2 < 40.0);
        }
    }
}

TEST_CASE("rk4 flow is reversible") {
    DoubleWell2D model;
    Rng rng(9);
    for (int t = 0; t < 20; ++t) {
        PhaseState z0{Eigen::Vector2d(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)),
                      Eigen::Vector2d(rng.uniform(-1, 1), rng.uniform(-1, 1))};
        PhaseState fwd = flow(model, z0, {Scheme::rk4, 400, 0.5});
        PhaseState back = flow(model, fwd, {Scheme::rk4, 400, -0.5});
        CHECK((back.flat() - z0.flat()).norm() < 1e-6);
    }
}

TEST_CASE("explicit Euler energy drift is first order in the step size") {
    DoubleWell2D model;
    Rng rng(13);
    int checked = 0;
    for (int t = 0; t < 10; ++t) {
        PhaseState z0{Eigen::Vector2d(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)),
                      Eigen::Vector2d(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))};
        const double H0 = model.hamiltonian(z0);
        const double e1 = std::abs(model.hamiltonian(flow(model, z0, {Scheme::explicit_euler, 4000, 0.2})) - H0);
        const double e2 = std::abs(model.hamiltonian(flow(model, z0, {Scheme::explicit_euler, 8000, 0.2})) - H0);
        if (e2 < 1e-10) continue;
        CHECK(e1 / e2 > 1.6);
        CHECK(e1 / e2 < 2.4);
        ++checked;
    }
    CHECK(checked >= 5);
}

TEST_CASE("blow-up reports the step index") {
    // exponential runaway: qdot = q^2-style growth via p feedback
    auto field = [](const Eigen::VectorXd& z) {
        Eigen::VectorXd f(2);
        f << z[0] * z[0] * 1e10, z[0];
        return f;
    };
    std::vector<CoordinateDomain> dom = {{-1e300, 1e300, Boundary::truncated}};
    PhaseState z0{(Eigen::VectorXd(1) << 10.0).finished(), (Eigen::VectorXd(1) << 0.0).finished()};
    bool threw = false;
    try {
        flow(field, z0, {Scheme::explicit_euler, 50, 50.0}, dom);
    } catch (const BlowUpError& e) {
        threw = true;
        CHECK(e.step_index >= 0);
        CHECK(e.step_index < 50);
    }
    CHECK(threw);
}

TEST_CASE("periodic coordinates wrap during the flow") {
    // constant drift across the periodic seam
    auto field = [](const Eigen::VectorXd& z) {
        Eigen::VectorXd f(2);
        f << 1.0, 0.0;
        (void)z;
        return f;
    };
    std::vector<CoordinateDomain> dom = {{0, 2 * M_PI, Boundary::periodic}};
    PhaseState z0{(Eigen::VectorXd(1) << 6.0).finished(), (Eigen::VectorXd(1) << 0.0).finished()};
    PhaseState z = flow(field, z0, {Scheme::explicit_euler, 10, 1.0}, dom);
    CHECK(z.q[0] == doctest::Approx(std::fmod(7.0, 2 * M_PI)).epsilon(1e-12));
}

TEST_CASE("reflecting coordinates fold back and flip the conjugate momentum") {
    auto field = [](const Eigen::VectorXd& z) {
        Eigen::VectorXd f(2);
        f << z[1], 0.0;
        return f;
    };
    std::vector<CoordinateDomain> dom = {{0, 1, Boundary::reflecting}};
    PhaseState z0{(Eigen::VectorXd(1) << 0.9).finished(), (Eigen::VectorXd(1) << 1.0).finished()};
    // one Euler step of size 0.3: q -> 1.2 -> folds to 0.8, p flips to -1
    PhaseState z = flow(field, z0, {Scheme::explicit_euler, 1, 0.3}, dom);
    CHECK(z.q[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(z.p[0] == doctest::Approx(-1.0));
}

TEST_CASE("integrator spec validates and reports its step size") {
    IntegratorSpec s{Scheme::rk4, 8, 2.0};
    CHECK(s.dt() == doctest::Approx(0.25));
    CHECK(scheme_name(Scheme::rk4) == "rk4");
    CHECK(scheme_name(Scheme::explicit_euler) == "explicit-euler");
    CHECK(scheme_from_name("euler") == Scheme::explicit_euler);
    CHECK_THROWS_AS(scheme_from_name("verlet"), ConfigError);
}

TEST_CASE("flow is deterministic") {
    DoubleWell2D model;
    PhaseState z0{Eigen::Vector2d(0.4, -0.6), Eigen::Vector2d(0.1, 0.2)};
    PhaseState a = flow(model, z0, {Scheme::rk4, 100, 0.7});
    PhaseState b = flow(model, z0, {Scheme::rk4, 100, 0.7});
    CHECK(a.q == b.q);
    CHECK(a.p == b.p);
}

#include "doctest.h"

#include "sparsetrack/filter.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace sparsetrack;

namespace {

KState state_at(Point3 p, Point3 v, double pvar = 1.0, double vvar = 1.0) {
    KState s;
    s.x << p.x, p.y, p.z, v.x, v.y, v.z;
    s.P.setZero();
    s.P.topLeftCorner<3, 3>() = pvar * Mat3::Identity();
    s.P.bottomRightCorner<3, 3>() = vvar * Mat3::Identity();
    return s;
}

double min_eig(const Mat6& P) { return Eigen::SelfAdjointEigenSolver<Mat6>(P).eigenvalues().minCoeff(); }

}  // namespace

TEST_CASE("FilterConfig defaults and validation") {
    FilterConfig c;
    CHECK(c.n_models() == 3);
    CHECK_NOTHROW(c.validate());
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(c.Pi.row(i).sum() - 1.0) < 1e-12);
    c.Pi(0, 0) = 0.5;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    FilterConfig r;
    r.R(0, 0) = -1.0;
    CHECK_THROWS_AS(r.validate(), ValidationError);
}

TEST_CASE("kf_predict") {
    const KState still = state_at({1, 2, 3}, {0, 0, 0});
    CHECK(kf_predict(still, 0.5, 1.0).position() == Point3{1, 2, 3});
    const KState moving = state_at({0, 0, 0}, {1, 0, 0});
    CHECK(kf_predict(moving, 0.1, 1.0).position().x == doctest::Approx(0.1));
    Mat6 F = Mat6::Identity();
    F.topRightCorner<3, 3>() = 0.1 * Mat3::Identity();
    const Mat6 expect = F * moving.P * F.transpose();
    CHECK((kf_predict(moving, 0.1, 0.0).P - expect).cwiseAbs().maxCoeff() < 1e-15);
    KState bad = moving;
    bad.x(0) = NAN;
    CHECK_THROWS(kf_predict(bad, 0.1, 1.0));
    CHECK_THROWS(kf_predict(moving, 0.0, 1.0));
}

TEST_CASE("kf_predict process noise matches G q^2 G^T") {
    const double dt = 0.2, q = 3.0;
    const KState s = state_at({0, 0, 0}, {0, 0, 0}, 0.0, 0.0);
    const Mat6 P = kf_predict(s, dt, q).P;
    CHECK(P(0, 0) == doctest::Approx(0.25 * dt * dt * dt * dt * q * q));
    CHECK(P(0, 3) == doctest::Approx(0.5 * dt * dt * dt * q * q));
    CHECK(P(3, 3) == doctest::Approx(dt * dt * q * q));
    CHECK(P(0, 1) == 0.0);
}

TEST_CASE("kf_update hand cases") {
    const KState s = state_at({1, 2, 3}, {0, 0, 0});
    const auto zero = kf_update(s, {1, 2, 3}, Mat3::Identity());
    CHECK(zero.innovation.norm() == 0.0);
    CHECK(zero.state.position() == Point3{1, 2, 3});
    // P_pos = I, R = I: the position gain is 0.5 I.
    CHECK((zero.gain.topRows<3>() - 0.5 * Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-15);
    const auto moved = kf_update(s, {3, 2, 3}, Mat3::Identity());
    CHECK(moved.state.position().x == doctest::Approx(2.0));

    const KState sure = state_at({1, 2, 3}, {0, 0, 0}, 1e-12, 1e-12);
    const auto tiny = kf_update(sure, {5, 5, 5}, 0.01 * Mat3::Identity());
    CHECK(distance(tiny.state.position(), {1, 2, 3}) < 1e-8);
}

TEST_CASE("kf_update likelihood matches the Gaussian density") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        KState s = state_at({g(rng), g(rng), g(rng)}, {0, 0, 0}, 0.5 + std::abs(g(rng)));
        s.P(0, 1) = s.P(1, 0) = 0.1;
        const Mat3 R = 0.2 * Mat3::Identity();
        const Point3 z{g(rng), g(rng), g(rng)};
        const auto u = kf_update(s, z, R);
        const Mat3 S = s.P.topLeftCorner<3, 3>() + R;
        const Vec3 y = z.vec() - s.x.head<3>();
        const double direct =
            std::exp(-0.5 * y.dot(S.inverse() * y)) / std::sqrt(std::pow(2 * std::numbers::pi, 3) * S.determinant());
        CHECK(std::abs(u.likelihood() - direct) / direct < 1e-9);
    }
}

TEST_CASE("kf_update rejects a singular innovation covariance") {
    KState s = state_at({0, 0, 0}, {0, 0, 0}, 0.0, 1.0);
    CHECK_THROWS_AS(kf_update(s, {1, 0, 0}, Mat3::Zero()), NumericError);
}

TEST_CASE("noiseless constant-velocity track converges") {
    FilterConfig cfg;
    IMMState s = imm_init({0, 0, 0}, cfg);
    double early = 0.0, late = 0.0;
    for (int k = 1; k <= 60; ++k) {
        const Point3 truth{0.1 * k * 2.0, 0.1 * k * -1.0, 0.0};
        s = imm_step(s, 0.1, truth, cfg);
        const double err = distance(kf_predict(s.fused, 0.1, 0.0).position(), {0.1 * (k + 1) * 2.0, -0.1 * (k + 1), 0});
        if (k <= 5) early = std::max(early, err);
        if (k > 50) late = std::max(late, err);
    }
    CHECK(late < 1e-2);
    CHECK(late < 0.1 * early);
}

TEST_CASE("imm_mix") {
    FilterConfig cfg;
    IMMState s = imm_init({1, 1, 1}, cfg);
    s.models[1].x(3) = 2.0;
    s.models[2].x(0) = -1.0;

    FilterConfig ident = cfg;
    ident.Pi = Eigen::MatrixXd::Identity(3, 3);
    const auto m = imm_mix(s, ident);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(m.mixed[j].x == s.models[j].x);
        CHECK(m.mixed[j].P == s.models[j].P);
    }

    IMMState same = imm_init({1, 1, 1}, cfg);
    const auto ms = imm_mix(same, cfg);
    for (const auto& k : ms.mixed) CHECK((k.P - same.models[0].P).cwiseAbs().maxCoeff() < 1e-12);

    // Two models with distinct means: spread makes the mixed covariance exceed the average.
    FilterConfig two;
    two.q_levels = {1.0, 2.0};
    two.Pi = Eigen::MatrixXd::Constant(2, 2, 0.5);
    two.mu0 = Eigen::VectorXd::Constant(2, 0.5);
    IMMState t = imm_init({0, 0, 0}, two);
    t.models[0].x(0) = -1.0;
    t.models[1].x(0) = 1.0;
    const auto mt = imm_mix(t, two);
    const Mat6 avg = 0.5 * (t.models[0].P + t.models[1].P);
    CHECK(min_eig(mt.mixed[0].P - avg) >= -1e-12);
    CHECK(mt.mixed[0].P(0, 0) == doctest::Approx(avg(0, 0) + 1.0));
}

TEST_CASE("imm_mix falls back to uniform weights for a zero predicted probability") {
    FilterConfig cfg;
    cfg.Pi = Eigen::MatrixXd::Identity(3, 3);
    IMMState s = imm_init({0, 0, 0}, cfg);
    s.mu << 1.0, 0.0, 0.0;
    s.models[0].x(0) = 3.0;
    const auto m = imm_mix(s, cfg);
    CHECK(m.mu_pred(1) == 0.0);
    CHECK(m.mixed[1].x(0) == doctest::Approx(1.0));
}

TEST_CASE("imm_step without a measurement fuses predicted states") {
    FilterConfig cfg;
    IMMState s = imm_init({0, 0, 0}, cfg);
    s.models[0].x(3) = 1.0;
    s.mu << 0.2, 0.3, 0.5;
    const IMMPrediction pred = imm_predict(s, 0.1, cfg);
    const IMMState out = imm_step(s, 0.1, std::nullopt, cfg);
    CHECK(out.mu == pred.mu_pred);
    Vec3 expect = Vec3::Zero();
    for (std::size_t j = 0; j < 3; ++j) expect += pred.mu_pred(static_cast<Eigen::Index>(j)) * pred.models[j].x.head<3>();
    CHECK((out.fused.x.head<3>() - expect).norm() < 1e-12);
}

TEST_CASE("equal likelihoods leave probabilities unchanged") {
    Eigen::VectorXd mu(3);
    mu << 0.2, 0.3, 0.5;
    const std::vector<double> ll{-4.0, -4.0, -4.0};
    CHECK((imm_reweight(mu, ll) - mu).cwiseAbs().maxCoeff() < 1e-15);
    const std::vector<double> dead{-INFINITY, -INFINITY, -INFINITY};
    CHECK(imm_reweight(mu, dead) == mu);
    const std::vector<double> tiny{-2000.0, -2001.0, -2002.0};
    const auto r = imm_reweight(mu, tiny);
    CHECK(std::abs(r.sum() - 1.0) < 1e-12);
    CHECK(r(0) > mu(0));
}

TEST_CASE("single-model IMM equals a plain Kalman filter") {
    FilterConfig cfg;
    cfg.q_levels = {2.0};
    cfg.Pi = Eigen::MatrixXd::Identity(1, 1);
    cfg.mu0 = Eigen::VectorXd::Ones(1);
    std::mt19937_64 rng(22);
    std::normal_distribution<double> g(0.0, 0.3);
    IMMState s = imm_init({5, 0, 1}, cfg);
    KState kf = s.models[0];
    for (int k = 0; k < 300; ++k) {
        std::optional<Point3> z;
        if (k % 4 != 0) z = Point3{5 + 0.1 * k + g(rng), g(rng), 1 + g(rng)};
        s = imm_step(s, 0.1, z, cfg);
        kf = kf_predict(kf, 0.1, 2.0);
        if (z) kf = kf_update(kf, *z, cfg.R).state;
        CHECK((s.fused.x - kf.x).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((s.fused.P - kf.P).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("model probabilities stay normalised over random steps") {
    FilterConfig cfg;
    std::mt19937_64 rng(23);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    IMMState s = imm_init({10, 0, 0}, cfg);
    Point3 truth{10, 0, 0};
    for (int k = 0; k < 2000; ++k) {
        truth = truth + 0.1 * Point3{g(rng), g(rng), g(rng)};
        std::optional<Point3> z;
        if (u(rng) < 0.7) z = truth + (u(rng) < 0.1 ? 2.0 : 0.1) * Point3{g(rng), g(rng), g(rng)};
        s = imm_step(s, 0.05 + 0.1 * u(rng), z, cfg);
        CHECK(std::abs(s.mu.sum() - 1.0) < 1e-9);
        CHECK(s.mu.minCoeff() >= 0.0);
        CHECK(s.mu.maxCoeff() <= 1.0);
        CHECK((s.fused.P - s.fused.P.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(min_eig(s.fused.P) >= -1e-9);
    }
}

TEST_CASE("enforce_covariance") {
    Mat6 P = Mat6::Identity();
    P(0, 1) = 1e-3;
    enforce_covariance(P);
    CHECK(P(0, 1) == P(1, 0));
    Mat6 slightly = Mat6::Identity();
    slightly(5, 5) = -1e-12;
    enforce_covariance(slightly);
    CHECK(min_eig(slightly) >= -1e-15);
    Mat6 bad = Mat6::Identity();
    bad(5, 5) = -1e-3;
    CHECK_THROWS_AS(enforce_covariance(bad), NumericError);
}

#include "doctest.h"

#include "sparsetrack/association.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <random>

using namespace sparsetrack;

namespace {

GateTrack track_at(Point3 p, Mat3 S = Mat3::Identity(), bool dormant = false) { return {p, S, dormant}; }

double brute_force(const Eigen::MatrixXd& c) {
    const Eigen::MatrixXd m = c.rows() > c.cols() ? Eigen::MatrixXd(c.transpose()) : c;
    std::vector<int> perm(static_cast<std::size_t>(m.cols()));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i) s += m(i, perm[static_cast<std::size_t>(i)]);
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Brute-force JPDA marginals straight from the event-probability definition.
Eigen::MatrixXd brute_jpda(const BoolMatrix& feas, const Eigen::MatrixXd& lik, const JpdaParams& p) {
    const auto nt = feas.rows(), nd = feas.cols();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(nt, nd + 1);
    double total = 0.0;
    std::vector<int> owner(static_cast<std::size_t>(nd), -1);  // detection -> track
    std::function<void(Eigen::Index)> rec = [&](Eigen::Index j) {
        if (j == nd) {
            std::vector<int> det_of(static_cast<std::size_t>(nt), -1);
            double w = 1.0;
            for (Eigen::Index d = 0; d < nd; ++d) {
                const int t = owner[static_cast<std::size_t>(d)];
                if (t < 0) {
                    w *= p.lambda_c;
                } else {
                    w *= p.Pd * lik(t, d);
                    det_of[static_cast<std::size_t>(t)] = static_cast<int>(d);
                }
            }
            for (Eigen::Index t = 0; t < nt; ++t) {
                if (det_of[static_cast<std::size_t>(t)] < 0) w *= 1.0 - p.Pd;
            }
            total += w;
            for (Eigen::Index t = 0; t < nt; ++t) acc(t, det_of[static_cast<std::size_t>(t)] + 1) += w;
            return;
        }
        owner[static_cast<std::size_t>(j)] = -1;
        rec(j + 1);
        for (Eigen::Index t = 0; t < nt; ++t) {
            if (!feas(t, j) || std::find(owner.begin(), owner.begin() + j, t) != owner.begin() + j) continue;
            owner[static_cast<std::size_t>(j)] = static_cast<int>(t);
            rec(j + 1);
            owner[static_cast<std::size_t>(j)] = -1;
        }
    };
    rec(0);
    return acc / total;
}

KState prior() {
    KState s;
    s.x << 1, 2, 3, 0.5, 0, 0;
    s.P = Mat6::Identity();
    s.P(0, 3) = s.P(3, 0) = 0.2;
    return s;
}

double min_eig(const Mat6& P) { return Eigen::SelfAdjointEigenSolver<Mat6>(P).eigenvalues().minCoeff(); }

}  // namespace

TEST_CASE("gate hand cases") {
    JpdaParams p;
    const std::vector<GateTrack> t{track_at({0, 0, 0})};
    const std::vector<Point3> d{{0, 0, 0}, {1, 1, 1}};
    const auto g = gate(t, d, p);
    CHECK(g.d2(0, 0) == 0.0);
    CHECK(g.feasible(0, 0));
    CHECK(g.d2(0, 1) == doctest::Approx(3.0));
    CHECK(g.feasible(0, 1));
    p.gamma = 2.0;
    CHECK_FALSE(gate(t, d, p).feasible(0, 1));
}

TEST_CASE("dormant tracks use the widened gate") {
    JpdaParams p;
    const std::vector<Point3> d{{4, 0, 0}};
    CHECK_FALSE(gate(std::vector<GateTrack>{track_at({0, 0, 0})}, d, p).feasible(0, 0));
    CHECK(gate(std::vector<GateTrack>{track_at({0, 0, 0}, Mat3::Identity(), true)}, d, p).feasible(0, 0));
}

TEST_CASE("singular S marks the row infeasible") {
    JpdaParams p;
    const std::vector<GateTrack> t{track_at({0, 0, 0}, Mat3::Zero()), track_at({0, 0, 0})};
    const auto g = gate(t, std::vector<Point3>{{0, 0, 0}}, p);
    CHECK_FALSE(g.feasible(0, 0));
    CHECK(g.feasible(1, 0));
    CHECK_FALSE(g.diagnostics.empty());
}

TEST_CASE("gating is invariant under a common rotation") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> n(0.0, 1.0);
    JpdaParams p;
    for (int trial = 0; trial < 100; ++trial) {
        Mat3 A;
        for (int i = 0; i < 9; ++i) A(i / 3, i % 3) = n(rng);
        const Mat3 S = A * A.transpose() + 0.1 * Mat3::Identity();
        const Mat3 R = Eigen::AngleAxisd(n(rng), Vec3(n(rng), n(rng), n(rng)).normalized()).toRotationMatrix();
        const Point3 c{n(rng), n(rng), n(rng)}, z{n(rng), n(rng), n(rng)};
        const double a = gate(std::vector<GateTrack>{track_at(c, S)}, std::vector<Point3>{z}, p).d2(0, 0);
        const Point3 zr(Vec3(c.vec() + R * (z - c).vec()));
        const double b = gate(std::vector<GateTrack>{track_at(c, R * S * R.transpose())}, std::vector<Point3>{zr}, p)
                             .d2(0, 0);
        CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, a));
    }
}

TEST_CASE("build_cost") {
    JpdaParams p;
    const std::vector<GateTrack> t{track_at({0, 0, 0}), track_at({10, 0, 0})};
    const std::vector<Point3> d{{0.5, 0, 0}, {10, 1, 0}};
    const auto g = gate(t, d, p);
    const std::vector<CostTrack> ct(2);
    const auto c = build_cost(ct, d, g, CostWeights{1.0, 0.0, 0.0}, 1.0);
    CHECK(c(0, 0) == doctest::Approx(g.d2(0, 0)));
    CHECK(c(1, 1) == doctest::Approx(g.d2(1, 1)));
    CHECK(c(0, 1) == kInfeasibleCost);
    // No confident history: the anchor term vanishes.
    CHECK(build_cost(ct, d, g, CostWeights{1.0, 5.0, 0.0}, 1.0)(0, 0) == doctest::Approx(g.d2(0, 0)));
    std::vector<CostTrack> anchored(2);
    anchored[0].anchor = Point3{0, 0, 0};
    CHECK(build_cost(anchored, d, g, CostWeights{1.0, 1.0, 0.0}, 1.0)(0, 0) > g.d2(0, 0));
    // Feasible costs stay strictly below the sentinel.
    CHECK(c.maxCoeff() == kInfeasibleCost);
    CHECK(c(0, 0) < kInfeasibleCost);
}

TEST_CASE("hungarian hand cases") {
    Eigen::MatrixXd a(2, 2);
    a << 1, 2, 2, 4;
    const auto r = hungarian(a);
    CHECK(r.row_to_col == std::vector<int>{1, 0});
    CHECK(r.total_cost == 4.0);

    Eigen::MatrixXd d = Eigen::MatrixXd::Constant(4, 4, 9.0);
    d.diagonal().setZero();
    CHECK(hungarian(d).row_to_col == std::vector<int>{0, 1, 2, 3});

    Eigen::MatrixXd row(1, 3);
    row << 5, 1, 7;
    const auto rr = hungarian(row);
    CHECK(rr.row_to_col == std::vector<int>{1});
    CHECK(rr.unassigned_cols == std::vector<int>{0, 2});

    Eigen::MatrixXd col(3, 1);
    col << 5, 1, 7;
    CHECK(hungarian(col).row_to_col == std::vector<int>{-1, 0, -1});

    CHECK(hungarian(Eigen::MatrixXd(0, 3)).unassigned_cols.size() == 3);
}

TEST_CASE("hungarian drops sentinel pairs") {
    Eigen::MatrixXd c = Eigen::MatrixXd::Constant(2, 2, kInfeasibleCost);
    c(0, 0) = 1.0;
    const auto r = hungarian(c);
    CHECK(r.row_to_col == std::vector<int>{0, -1});
    CHECK(r.unassigned_rows == std::vector<int>{1});
    CHECK(r.unassigned_cols == std::vector<int>{1});
    const auto none = hungarian(Eigen::MatrixXd::Constant(3, 2, kInfeasibleCost));
    CHECK(none.unassigned_rows.size() == 3);
    CHECK(none.unassigned_cols.size() == 2);
}

TEST_CASE("hungarian is optimal on random rectangular matrices") {
    std::mt19937_64 rng(32);
    std::uniform_int_distribution<int> dim(1, 6), v(0, 20);
    for (int trial = 0; trial < 300; ++trial) {
        Eigen::MatrixXd c(dim(rng), dim(rng));
        for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = v(rng);
        const auto r = hungarian(c);
        CHECK(r.total_cost == brute_force(c));
        std::vector<int> used;
        for (int j : r.row_to_col) {
            if (j >= 0) used.push_back(j);
        }
        std::sort(used.begin(), used.end());
        CHECK(std::adjacent_find(used.begin(), used.end()) == used.end());
    }
}

TEST_CASE("jpda hand cases") {
    JpdaParams p;
    const std::vector<GateTrack> one{track_at({0, 0, 0})};
    const std::vector<Point3> d{{0.5, 0, 0}};
    const auto g = gate(one, d, p);
    const auto r = jpda(one, d, g, p);
    const double L = std::exp(log_gaussian(Vec3(0.5, 0, 0), Mat3::Identity()));
    const double expect = p.Pd * L / (p.Pd * L + (1 - p.Pd) * p.lambda_c);
    CHECK(r.assoc(0, 0) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(r.miss(0) == doctest::Approx(1 - expect).epsilon(1e-9));

    const std::vector<GateTrack> two{track_at({-1, 0, 0}), track_at({1, 0, 0})};
    const std::vector<Point3> mid{{0, 0, 0}};
    const auto r2 = jpda(two, mid, gate(two, mid, p), p);
    CHECK(r2.assoc(0, 0) == doctest::Approx(r2.assoc(1, 0)).epsilon(1e-14));

    const std::vector<Point3> far{{50, 0, 0}};
    const auto r3 = jpda(two, far, gate(two, far, p), p);
    CHECK(r3.miss(0) == 1.0);
    CHECK(r3.miss(1) == 1.0);
}

TEST_CASE("jpda matches brute-force event enumeration") {
    std::mt19937_64 rng(33);
    std::uniform_int_distribution<int> nt_d(1, 4), nd_d(0, 5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const int nt = nt_d(rng), nd = nd_d(rng);
        GateResult g;
        g.d2 = Eigen::MatrixXd::Zero(nt, nd);
        g.feasible = BoolMatrix::Constant(nt, nd, false);
        Eigen::MatrixXd lik = Eigen::MatrixXd::Zero(nt, nd);
        for (int i = 0; i < nt; ++i) {
            for (int j = 0; j < nd; ++j) {
                g.feasible(i, j) = u(rng) < 0.6;
                lik(i, j) = 0.01 + u(rng);
            }
        }
        JpdaParams p;
        p.Pd = 0.2 + 0.75 * u(rng);
        p.lambda_c = 0.01 + 0.5 * u(rng);
        const auto r = jpda(g, Eigen::MatrixXd(lik.array().log()), p);
        const auto b = brute_jpda(g.feasible, lik, p);
        CHECK((r.beta - b).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(r.beta.minCoeff() >= 0.0);
        CHECK(r.beta.maxCoeff() <= 1.0);
    }
}

TEST_CASE("jpda enforces the event cap") {
    const int n = 8;
    GateResult g;
    g.d2 = Eigen::MatrixXd::Zero(n, n);
    g.feasible = BoolMatrix::Constant(n, n, true);
    JpdaParams p;
    p.max_events = 1000;
    CHECK_THROWS_AS(jpda(g, Eigen::MatrixXd::Zero(n, n), p), CombinatorialError);
}

TEST_CASE("jpda_update degenerate weights") {
    const Mat3 R = 0.1 * Mat3::Identity();
    const KState s = prior();
    const std::vector<Point3> d{{1.5, 2, 3}, {0, 0, 0}};
    const std::vector<double> hard{1.0, 0.0};
    const KState a = jpda_update(s, d, hard, 0.0, R);
    const KState k = kf_update(s, d[0], R).state;
    CHECK((a.x - k.x).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((a.P - k.P).cwiseAbs().maxCoeff() < 1e-12);

    const std::vector<double> none{0.0, 0.0};
    const KState m = jpda_update(s, d, none, 1.0, R);
    CHECK((m.x - s.x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((m.P - s.P).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("jpda_update with two symmetric detections") {
    const Mat3 R = 0.1 * Mat3::Identity();
    const KState s = prior();
    const std::vector<Point3> d{{0, 2, 3}, {2, 2, 3}};
    const std::vector<double> half{0.5, 0.5};
    const KState a = jpda_update(s, d, half, 0.0, R);
    const KState mid = kf_update(s, {1, 2, 3}, R).state;
    CHECK((a.x - mid.x).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(min_eig(a.P - mid.P) >= -1e-12);
    CHECK(a.P(0, 0) > mid.P(0, 0));
}

TEST_CASE("jpda_update covariance stays symmetric PSD") {
    std::mt19937_64 rng(34);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        KState s = prior();
        Eigen::Matrix<double, 6, 6> A;
        for (int i = 0; i < 36; ++i) A.data()[i] = n(rng);
        s.P = A * A.transpose() + 0.01 * Mat6::Identity();
        const int nd = 1 + trial % 4;
        std::vector<Point3> d;
        std::vector<double> w;
        for (int j = 0; j < nd; ++j) {
            d.push_back({n(rng), n(rng), n(rng)});
            w.push_back(u(rng));
        }
        const double total = std::accumulate(w.begin(), w.end(), 0.0) + u(rng);
        for (auto& x : w) x /= total;
        const double beta0 = 1.0 - std::accumulate(w.begin(), w.end(), 0.0);
        const KState out = jpda_update(s, d, w, beta0, 0.05 * Mat3::Identity());
        CHECK((out.P - out.P.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(min_eig(out.P) >= -1e-9);
    }
}

#include "sparsetrack/filter.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace sparsetrack {

namespace {

constexpr double kPsdTol = 1e-9;

Mat6 transition(double dt) {
    Mat6 F = Mat6::Identity();
    F.block<3, 3>(0, 3) = dt * Mat3::Identity();
    return F;
}

Mat6 process_noise(double dt, double q) {
    Eigen::Matrix<double, 6, 3> G;
    G.topRows<3>() = 0.5 * dt * dt * Mat3::Identity();
    G.bottomRows<3>() = dt * Mat3::Identity();
    return G * (q * q) * G.transpose();
}

}  // namespace

FilterConfig::FilterConfig() {
    const int n = 3;
    Pi = Eigen::MatrixXd::Constant(n, n, 0.025);
    Pi.diagonal().setConstant(0.95);
    P0 = Mat6::Zero();
    P0.topLeftCorner<3, 3>() = 0.04 * Mat3::Identity();
    P0.bottomRightCorner<3, 3>() = 4.0 * Mat3::Identity();
    mu0 = Eigen::VectorXd::Constant(n, 1.0 / n);
}

void FilterConfig::validate() const {
    const auto n = static_cast<Eigen::Index>(q_levels.size());
    if (n == 0) throw ValidationError("filter config needs at least one model");
    for (double q : q_levels) {
        if (!(q >= 0.0) || !std::isfinite(q)) throw ValidationError("q levels must be finite and >= 0");
    }
    if (Pi.rows() != n || Pi.cols() != n) throw ValidationError("Pi must be n_models x n_models");
    if ((Pi.array() < 0.0).any()) throw ValidationError("Pi entries must be >= 0");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(Pi.row(i).sum() - 1.0) > 1e-12) throw ValidationError("Pi rows must sum to 1");
    }
    if (mu0.size() != n || (mu0.array() < 0.0).any() || std::abs(mu0.sum() - 1.0) > 1e-9) {
        throw ValidationError("mu0 must be a probability vector over the models");
    }
    if (!R.isApprox(R.transpose(), 1e-12) || R.llt().info() != Eigen::Success) {
        throw ValidationError("R must be symmetric positive definite");
    }
    if (!P0.isApprox(P0.transpose(), 1e-12)) throw ValidationError("P0 must be symmetric");
}

void enforce_covariance(Mat6& P) {
    if (!P.allFinite()) throw NumericError("covariance has non-finite entries");
    P = 0.5 * (P + P.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat6> es(P);
    const double lo = es.eigenvalues().minCoeff();
    if (lo < -kPsdTol) {
        std::ostringstream os;
        os << "covariance lost positive semi-definiteness (min eigenvalue " << lo << ")";
        throw NumericError(os.str());
    }
    if (lo < 0.0) {
        const Vec6 clamped = es.eigenvalues().cwiseMax(0.0);
        P = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
        P = 0.5 * (P + P.transpose()).eval();
    }
}

KState kf_predict(const KState& s, double dt, double q) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("kf_predict: dt must be finite and > 0");
    if (!s.x.allFinite() || !s.P.allFinite()) throw ValidationError("kf_predict: non-finite state");
    const Mat6 F = transition(dt);
    KState out;
    out.x = F * s.x;
    out.P = F * s.P * F.transpose() + process_noise(dt, q);
    out.P = 0.5 * (out.P + out.P.transpose()).eval();
    return out;
}

Mat3 innovation_covariance(const KState& s, const Mat3& R) {
    return s.P.topLeftCorner<3, 3>() + R;
}

double log_gaussian(const Vec3& innovation, const Mat3& S) {
    Eigen::LLT<Mat3> llt(S);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Mat3> es(S);
        std::ostringstream os;
        os << "innovation covariance is not positive definite (eigenvalues " << es.eigenvalues().transpose()
           << ")";
        throw NumericError(os.str());
    }
    const Vec3 w = llt.matrixL().solve(innovation);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * (w.squaredNorm() + log_det + 3.0 * std::log(2.0 * std::numbers::pi));
}

double KfUpdate::likelihood() const { return std::exp(log_likelihood); }

KfUpdate kf_update(const KState& s, Point3 z, const Mat3& R) {
    if (!z.finite()) throw ValidationError("kf_update: non-finite measurement");
    KfUpdate u;
    u.S = innovation_covariance(s, R);
    u.S = 0.5 * (u.S + u.S.transpose()).eval();
    u.innovation = z.vec() - s.x.head<3>();
    u.log_likelihood = log_gaussian(u.innovation, u.S);

    const Eigen::Matrix<double, 6, 3> PHt = s.P.leftCols<3>();
    u.gain = u.S.llt().solve(PHt.transpose()).transpose();

    Mat6 IKH = Mat6::Identity();
    IKH.leftCols<3>() -= u.gain;
    u.state.x = s.x + u.gain * u.innovation;
    u.state.P = IKH * s.P * IKH.transpose() + u.gain * R * u.gain.transpose();
    enforce_covariance(u.state.P);
    return u;
}

IMMState imm_init(Point3 z, const FilterConfig& cfg) {
    IMMState s;
    KState k;
    k.x.head<3>() = z.vec();
    k.x.tail<3>().setZero();
    k.P = cfg.P0;
    s.models.assign(cfg.n_models(), k);
    s.mu = cfg.mu0;
    s.fused = k;
    return s;
}

MixResult imm_mix(const IMMState& s, const FilterConfig& cfg) {
    const auto n = static_cast<Eigen::Index>(s.models.size());
    if (s.mu.size() != n || cfg.Pi.rows() != n) throw ValidationError("imm_mix: model count mismatch");
    MixResult r;
    r.mu_pred = cfg.Pi.transpose() * s.mu;
    r.mixed.resize(s.models.size());
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXd w(n);
        if (r.mu_pred(j) > 0.0) {
            for (Eigen::Index i = 0; i < n; ++i) w(i) = cfg.Pi(i, j) * s.mu(i) / r.mu_pred(j);
        } else {
            w.setConstant(1.0 / static_cast<double>(n));
        }
        Vec6 x = Vec6::Zero();
        for (Eigen::Index i = 0; i < n; ++i) x += w(i) * s.models[static_cast<std::size_t>(i)].x;
        Mat6 P = Mat6::Zero();
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& mi = s.models[static_cast<std::size_t>(i)];
            const Vec6 d = mi.x - x;
            P += w(i) * (mi.P + d * d.transpose());
        }
        P = 0.5 * (P + P.transpose()).eval();
        r.mixed[static_cast<std::size_t>(j)] = {x, P};
    }
    return r;
}

KState imm_fuse(std::span<const KState> models, const Eigen::VectorXd& mu) {
    KState f;
    f.x.setZero();
    for (std::size_t j = 0; j < models.size(); ++j) f.x += mu(static_cast<Eigen::Index>(j)) * models[j].x;
    f.P.setZero();
    for (std::size_t j = 0; j < models.size(); ++j) {
        const Vec6 e = models[j].x - f.x;
        f.P += mu(static_cast<Eigen::Index>(j)) * (models[j].P + e * e.transpose());
    }
    enforce_covariance(f.P);
    return f;
}

IMMPrediction imm_predict(const IMMState& s, double dt, const FilterConfig& cfg) {
    auto mix = imm_mix(s, cfg);
    IMMPrediction p;
    p.mu_pred = std::move(mix.mu_pred);
    p.models.reserve(mix.mixed.size());
    for (std::size_t j = 0; j < mix.mixed.size(); ++j) {
        p.models.push_back(kf_predict(mix.mixed[j], dt, cfg.q_levels[j]));
    }
    p.fused = imm_fuse(p.models, p.mu_pred);
    return p;
}

Eigen::VectorXd imm_reweight(const Eigen::VectorXd& mu_pred, std::span<const double> log_likelihoods) {
    const auto n = mu_pred.size();
    Eigen::VectorXd logw(n);
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
        logw(j) = mu_pred(j) > 0.0 ? log_likelihoods[static_cast<std::size_t>(j)] + std::log(mu_pred(j))
                                   : -std::numeric_limits<double>::infinity();
        top = std::max(top, logw(j));
    }
    if (!std::isfinite(top)) return mu_pred;
    Eigen::VectorXd mu(n);
    for (Eigen::Index j = 0; j < n; ++j) mu(j) = std::exp(logw(j) - top);
    return mu / mu.sum();
}

IMMState imm_update(const IMMPrediction& pred, Point3 z, const FilterConfig& cfg) {
    IMMState out;
    std::vector<double> loglik;
    out.models.reserve(pred.models.size());
    for (const auto& m : pred.models) {
        auto u = kf_update(m, z, cfg.R);
        loglik.push_back(u.log_likelihood);
        out.models.push_back(u.state);
    }
    out.mu = imm_reweight(pred.mu_pred, loglik);
    out.fused = imm_fuse(out.models, out.mu);
    return out;
}

IMMState imm_coast(const IMMPrediction& pred) {
    return {pred.models, pred.mu_pred, pred.fused};
}

IMMState imm_step(const IMMState& s, double dt, std::optional<Point3> z, const FilterConfig& cfg) {
    const auto pred = imm_predict(s, dt, cfg);
    return z ? imm_update(pred, *z, cfg) : imm_coast(pred);
}

}  // namespace sparsetrack

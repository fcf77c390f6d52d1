#pragma once

#include "sparsetrack/core.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace sparsetrack {

/// Position/velocity Gaussian state, x = [p; v].
struct KState {
    Vec6 x = Vec6::Zero();
    Mat6 P = Mat6::Identity();

    Point3 position() const { return Point3(Vec3(x.head<3>())); }
    Point3 velocity() const { return Point3(Vec3(x.tail<3>())); }
};

struct FilterConfig {
    std::vector<double> q_levels{0.5, 2.0, 8.0};  // hover, cruise, evasive [m/s^2]
    Eigen::MatrixXd Pi;                            // row-stochastic model transitions
    Mat3 R = 0.01 * Mat3::Identity();              // measurement covariance [m^2]
    Mat6 P0;                                       // covariance of a freshly spawned track
    Eigen::VectorXd mu0;

    /// Three-model defaults: 0.95 self-transition, uniform prior, zero-velocity
    /// initialisation with a wide velocity block.
    FilterConfig();

    std::size_t n_models() const { return q_levels.size(); }
    void validate() const;
};

/// Throws NumericError when P has an eigenvalue below -1e-9. Otherwise
/// symmetrizes P and clamps slightly negative eigenvalues to zero.
void enforce_covariance(Mat6& P);

KState kf_predict(const KState& s, double dt, double q);

struct KfUpdate {
    KState state;
    Vec3 innovation;
    Mat3 S;
    Eigen::Matrix<double, 6, 3> gain;
    double log_likelihood;

    double likelihood() const;
};

/// Predicted measurement and innovation covariance for state s.
Mat3 innovation_covariance(const KState& s, const Mat3& R);

/// Log of N(z; Hx, S). Throws NumericError when S is not positive definite.
double log_gaussian(const Vec3& innovation, const Mat3& S);

/// Joseph-form update with H = [I 0].
KfUpdate kf_update(const KState& s, Point3 z, const Mat3& R);

struct IMMState {
    std::vector<KState> models;
    Eigen::VectorXd mu;
    KState fused;
};

/// Fresh IMM state centred on z with zero velocity.
IMMState imm_init(Point3 z, const FilterConfig& cfg);

struct MixResult {
    std::vector<KState> mixed;
    Eigen::VectorXd mu_pred;
};

MixResult imm_mix(const IMMState& s, const FilterConfig& cfg);

/// Probability-weighted moment match of the model states.
KState imm_fuse(std::span<const KState> models, const Eigen::VectorXd& mu);

struct IMMPrediction {
    std::vector<KState> models;
    Eigen::VectorXd mu_pred;
    KState fused;
};

IMMPrediction imm_predict(const IMMState& s, double dt, const FilterConfig& cfg);

/// Per-model Kalman update and likelihood-weighted probability update.
IMMState imm_update(const IMMPrediction& pred, Point3 z, const FilterConfig& cfg);

/// Missed-detection step: probabilities stay at their predicted values.
IMMState imm_coast(const IMMPrediction& pred);

/// Reweights predicted probabilities by per-model log-likelihoods.
/// Keeps the predicted probabilities when every likelihood is zero.
Eigen::VectorXd imm_reweight(const Eigen::VectorXd& mu_pred, std::span<const double> log_likelihoods);

IMMState imm_step(const IMMState& s, double dt, std::optional<Point3> z, const FilterConfig& cfg);

}  // namespace sparsetrack

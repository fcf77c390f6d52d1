#pragma once

#include "sparsetrack/core.hpp"
#include "sparsetrack/filter.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sparsetrack {

/// Thrown when JPDA event enumeration would exceed its cap.
class CombinatorialError : public NumericError {
public:
    using NumericError::NumericError;
};

struct JpdaParams {
    double Pd = 0.7;                  // detection probability
    double lambda_c = 1e-4;           // clutter density [1/m^3]
    double gamma = 7.815;             // chi-square(3) 95% gate
    double dormant_gate_factor = 4.0; // gate multiplier for dormant tracks
    std::size_t max_events = 1'000'000;

    void validate() const;
};

/// What gating needs to know about a track.
struct GateTrack {
    Point3 predicted;  // H x
    Mat3 S;            // innovation covariance
    bool dormant = false;
};

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct GateResult {
    Eigen::MatrixXd d2;  // tracks x detections
    BoolMatrix feasible;
    std::vector<std::string> diagnostics;

    Eigen::Index tracks() const { return d2.rows(); }
    Eigen::Index detections() const { return d2.cols(); }
};

GateResult gate(std::span<const GateTrack> tracks, std::span<const Point3> detections, const JpdaParams& params);

struct CostWeights {
    double mahalanobis = 1.0;
    double anchor = 0.3;
    double velocity = 0.3;
};

/// Per-track context for the cost terms beyond Mahalanobis distance.
struct CostTrack {
    std::optional<Point3> anchor;  // last confident detection
    double anchor_t = 0.0;
    Point3 velocity;               // current velocity estimate
};

inline constexpr double kInfeasibleCost = 1e9;

Eigen::MatrixXd build_cost(std::span<const CostTrack> tracks, std::span<const Point3> detections,
                           const GateResult& gate, const CostWeights& weights, double t);

struct Assignment {
    std::vector<int> row_to_col;  // -1 when unassigned
    std::vector<int> unassigned_rows;
    std::vector<int> unassigned_cols;
    double total_cost = 0.0;      // sum over kept pairs, in row order
};

/// Minimum-cost one-to-one assignment for a rectangular cost matrix.
/// Pairs at or above kInfeasibleCost are dropped afterwards.
Assignment hungarian(const Eigen::MatrixXd& cost);

struct JpdaResult {
    Eigen::MatrixXd beta;  // tracks x (1 + detections); column 0 is the missed-detection mass
    std::size_t events = 0;

    double miss(Eigen::Index track) const { return beta(track, 0); }
    double assoc(Eigen::Index track, Eigen::Index det) const { return beta(track, det + 1); }
};

/// Marginal association probabilities from a log-likelihood matrix
/// (tracks x detections, only feasible entries are read).
JpdaResult jpda(const GateResult& gate, const Eigen::MatrixXd& log_likelihood, const JpdaParams& params);

/// Same, with likelihoods N(z; predicted, S) evaluated from the tracks.
JpdaResult jpda(std::span<const GateTrack> tracks, std::span<const Point3> detections, const GateResult& gate,
                const JpdaParams& params);

/// PDA update of one Kalman state with a combined innovation.
/// beta holds one weight per detection, beta0 the missed-detection weight.
KState jpda_update(const KState& predicted, std::span<const Point3> detections, std::span<const double> beta,
                   double beta0, const Mat3& R);

/// PDA update applied per IMM model; model probabilities are reweighted by
/// the PDA mixture likelihood of the gated detections.
IMMState imm_update_pda(const IMMPrediction& pred, std::span<const Point3> detections, std::span<const double> beta,
                        double beta0, const FilterConfig& cfg, const JpdaParams& params);

}  // namespace sparsetrack

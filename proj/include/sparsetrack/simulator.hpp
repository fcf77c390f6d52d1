#pragma once

#include "sparsetrack/core.hpp"

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace sparsetrack {

enum class ScenarioKind { occlusion, crossings, separated, moderate };

std::string_view to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(std::string_view s);

/// Frame count used by each scenario kind unless overridden.
int default_frame_count(ScenarioKind k);

struct OcclusionWindow {
    double start = 0.0;  // [s]
    double end = 0.0;    // [s], exclusive
    int target = 0;
};

struct Box {
    Point3 lo;
    Point3 hi;
};

struct SensorModel {
    double p_hit = 0.85;
    /// Weight of returning k+1 points given a hit, k = 0, 1, ...
    std::vector<double> n_return_weights{0.5, 0.5};
    double sigma_meas = 0.08;  // per-axis return scatter [m]
    double clutter_rate = 2.0; // expected clutter points per scan
    Box clutter_volume{{5.0, -15.0, -2.0}, {35.0, 15.0, 10.0}};
    std::vector<OcclusionWindow> occlusion_windows;
    Pose observer;

    /// 1-2 returns per hit, the regime of a small quadrotor beyond ~10 m.
    static SensorModel sparse();
    /// Denser returns (1-6) used for the multi-target tracking scenarios.
    static SensorModel tracking();

    double mean_returns() const;
    void validate() const;
};

/// Shape parameters of the analytic trajectories. Fields unused by a kind are ignored.
struct TrajectoryParams {
    Point3 center{18.0, 0.0, 4.0};
    double drift_amplitude = 4.0;  // common lemniscate drift [m]
    double drift_period = 60.0;    // [s]
    // crossings: relative ellipse
    double orbit_major = 2.6;
    double orbit_minor = 0.4;
    double orbit_period = 20.0;
    // separated / occlusion: lateral offset and per-target sway
    double separation = 9.0;
    double sway = 1.5;
    double sway_period = 25.0;
    // moderate: separation oscillates between near and far
    double near_separation = 1.5;
    double far_separation = 7.5;
    double phase_period = 30.0;
    double spin_period = 45.0;
};

struct Scenario {
    ScenarioKind kind = ScenarioKind::crossings;
    int n_frames = 0;
    double dt = 0.1;
    std::uint64_t seed = 0;
    int targets = 2;
    SensorModel sensor;
    TrajectoryParams trajectory;

    /// Defaults for a kind: frame count, tracking sensor, and for the
    /// occlusion kind three 3-5 s occlusion windows.
    static Scenario make(ScenarioKind kind, std::uint64_t seed = 0);

    void validate() const;
};

struct TargetState {
    int id = 0;
    Point3 position;
    Point3 velocity;
    bool visible = true;
};

struct GroundTruthFrame {
    double t = 0.0;
    std::vector<TargetState> targets;
};

using GroundTruth = std::vector<GroundTruthFrame>;

/// Analytic trajectories; throws ValidationError when the kind's separation
/// contract cannot be met with the given parameters.
GroundTruth gen_trajectories(const Scenario& sc);

Scan sample_scan(const GroundTruthFrame& frame, const SensorModel& sensor, std::mt19937_64& rng);

struct ScenarioRun {
    std::vector<Scan> scans;
    GroundTruth truth;
};

ScenarioRun run_scenario(const Scenario& sc);

/// Smallest inter-target distance per frame (two-target scenarios).
std::vector<double> pair_separation(const GroundTruth& gt);

}  // namespace sparsetrack

#include "sparsetrack/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

namespace sparsetrack {

std::string_view to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::occlusion: return "occlusion";
        case ScenarioKind::crossings: return "crossings";
        case ScenarioKind::separated: return "separated";
        case ScenarioKind::moderate: return "moderate";
    }
    return "unknown";
}

ScenarioKind scenario_kind_from_string(std::string_view s) {
    if (s == "occlusion") return ScenarioKind::occlusion;
    if (s == "crossings") return ScenarioKind::crossings;
    if (s == "separated") return ScenarioKind::separated;
    if (s == "moderate") return ScenarioKind::moderate;
    throw ValidationError("unknown scenario kind '" + std::string(s) +
                          "' (expected occlusion|crossings|separated|moderate)");
}

int default_frame_count(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::occlusion: return 968;
        case ScenarioKind::crossings: return 1708;
        case ScenarioKind::separated: return 832;
        case ScenarioKind::moderate: return 1305;
    }
    return 0;
}

SensorModel SensorModel::sparse() {
    SensorModel s;
    s.n_return_weights = {0.5, 0.5};
    return s;
}

SensorModel SensorModel::tracking() {
    SensorModel s;
    s.p_hit = 0.85;
    s.n_return_weights = {0.05, 0.15, 0.25, 0.25, 0.2, 0.1};
    s.clutter_rate = 3.0;
    return s;
}

double SensorModel::mean_returns() const {
    double total = 0.0;
    double mean = 0.0;
    for (std::size_t k = 0; k < n_return_weights.size(); ++k) {
        total += n_return_weights[k];
        mean += static_cast<double>(k + 1) * n_return_weights[k];
    }
    return total > 0.0 ? mean / total : 0.0;
}

void SensorModel::validate() const {
    if (!(p_hit >= 0.0 && p_hit <= 1.0)) throw ValidationError("p_hit must lie in [0, 1]");
    if (n_return_weights.empty()) throw ValidationError("n_return_weights must not be empty");
    double total = 0.0;
    for (double w : n_return_weights) {
        if (!(w >= 0.0)) throw ValidationError("n_return_weights must be >= 0");
        total += w;
    }
    if (!(total > 0.0)) throw ValidationError("n_return_weights must have positive mass");
    if (!(sigma_meas > 0.0)) throw ValidationError("sigma_meas must be > 0");
    if (!(clutter_rate >= 0.0)) throw ValidationError("clutter_rate must be >= 0");
    const auto& lo = clutter_volume.lo;
    const auto& hi = clutter_volume.hi;
    if (!(lo.x <= hi.x && lo.y <= hi.y && lo.z <= hi.z)) throw ValidationError("clutter box is inverted");
    for (const auto& w : occlusion_windows) {
        if (!(w.end > w.start)) throw ValidationError("occlusion window must have end > start");
    }
}

Scenario Scenario::make(ScenarioKind kind, std::uint64_t seed) {
    Scenario sc;
    sc.kind = kind;
    sc.seed = seed;
    sc.n_frames = default_frame_count(kind);
    sc.sensor = SensorModel::tracking();
    if (kind == ScenarioKind::occlusion) {
        sc.sensor.occlusion_windows = {{15.0, 19.0, 0}, {45.0, 48.5, 1}, {70.0, 75.0, 0}};
    }
    if (kind == ScenarioKind::moderate) sc.trajectory.drift_amplitude = 6.0;
    return sc;
}

void Scenario::validate() const {
    if (n_frames <= 0) throw ValidationError("n_frames must be > 0");
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    if (targets < 1 || targets > 2) throw ValidationError("scenarios support one or two targets");
    sensor.validate();
    for (const auto& w : sensor.occlusion_windows) {
        if (w.target < 0 || w.target >= targets) throw ValidationError("occlusion window names an unknown target");
        if (kind == ScenarioKind::occlusion) {
            const double len = w.end - w.start;
            if (len < 3.0 - 1e-9 || len > 5.0 + 1e-9) {
                throw ValidationError("occlusion scenario windows must last 3-5 s");
            }
        }
    }
    if (kind == ScenarioKind::occlusion && sensor.occlusion_windows.empty()) {
        throw ValidationError("occlusion scenario needs at least one occlusion window");
    }
}

namespace {

struct Kinematics {
    Vec3 p;
    Vec3 v;
};

Kinematics drift(const TrajectoryParams& tp, double t) {
    const double w = 2.0 * std::numbers::pi / tp.drift_period;
    const double a = tp.drift_amplitude;
    return {Vec3(a * std::sin(w * t), 0.5 * a * std::sin(2.0 * w * t), 0.5 * std::sin(w * t)),
            Vec3(a * w * std::cos(w * t), a * w * std::cos(2.0 * w * t), 0.5 * w * std::cos(w * t))};
}

// Offset of target 0 from the pair midpoint; target 1 sits at the mirror image
// for the symmetric kinds.
Kinematics half_offset(const Scenario& sc, double t) {
    const auto& tp = sc.trajectory;
    switch (sc.kind) {
        case ScenarioKind::crossings: {
            const double w = 2.0 * std::numbers::pi / tp.orbit_period;
            const Vec3 rel(tp.orbit_major * std::cos(w * t), tp.orbit_minor * std::sin(w * t), 0.2 * std::sin(2 * w * t));
            const Vec3 drel(-tp.orbit_major * w * std::sin(w * t), tp.orbit_minor * w * std::cos(w * t),
                            0.4 * w * std::cos(2 * w * t));
            return {0.5 * rel, 0.5 * drel};
        }
        case ScenarioKind::moderate: {
            const double wp = 2.0 * std::numbers::pi / tp.phase_period;
            const double wr = 2.0 * std::numbers::pi / tp.spin_period;
            const double mid = 0.5 * (tp.near_separation + tp.far_separation);
            const double amp = 0.5 * (tp.far_separation - tp.near_separation);
            const double r = mid + amp * std::cos(wp * t);
            const double dr = -amp * wp * std::sin(wp * t);
            const double th = wr * t;
            const Vec3 dir(std::cos(th), std::sin(th), 0.0);
            const Vec3 ddir(-std::sin(th), std::cos(th), 0.0);
            return {0.5 * r * dir, 0.5 * (dr * dir + r * wr * ddir)};
        }
        default:
            return {Vec3(0.0, -0.5 * tp.separation, 0.0), Vec3::Zero()};
    }
}

Kinematics sway(const TrajectoryParams& tp, double t, double phase) {
    const double w = 2.0 * std::numbers::pi / tp.sway_period;
    const double s = tp.sway;
    const double a = w * t + phase;
    return {Vec3(s * std::sin(a), 0.3 * s * std::cos(a), 0.2 * s * std::sin(a)),
            Vec3(s * w * std::cos(a), -0.3 * s * w * std::sin(a), 0.2 * s * w * std::cos(a))};
}

Kinematics target_kinematics(const Scenario& sc, int target, double t) {
    const auto d = drift(sc.trajectory, t);
    Kinematics k{sc.trajectory.center.vec() + d.p, d.v};
    const auto h = half_offset(sc, t);
    const double sign = target == 0 ? 1.0 : -1.0;
    k.p += sign * h.p;
    k.v += sign * h.v;
    if (sc.kind == ScenarioKind::separated || sc.kind == ScenarioKind::occlusion) {
        const auto s = sway(sc.trajectory, t, target == 0 ? 0.0 : 1.3);
        k.p += s.p;
        k.v += s.v;
    }
    return k;
}

bool occluded(const SensorModel& sensor, int target, double t) {
    return std::any_of(sensor.occlusion_windows.begin(), sensor.occlusion_windows.end(),
                       [&](const OcclusionWindow& w) { return w.target == target && t >= w.start && t < w.end; });
}

void check_contract(const Scenario& sc, const GroundTruth& gt) {
    if (sc.targets < 2) return;
    const auto sep = pair_separation(gt);
    std::ostringstream err;
    switch (sc.kind) {
        case ScenarioKind::crossings: {
            if (*std::max_element(sep.begin(), sep.end()) >= 3.0) err << "separation must stay below 3 m";
            int swaps = 0;
            for (std::size_t k = 1; k < gt.size(); ++k) {
                const double a = gt[k - 1].targets[0].position.x - gt[k - 1].targets[1].position.x;
                const double b = gt[k].targets[0].position.x - gt[k].targets[1].position.x;
                if ((a < 0.0) != (b < 0.0)) ++swaps;
            }
            if (swaps < 2) err << "need at least two crossings, got " << swaps;
            break;
        }
        case ScenarioKind::separated:
            if (*std::min_element(sep.begin(), sep.end()) <= 5.0) err << "separation must stay above 5 m";
            break;
        case ScenarioKind::moderate: {
            int phase = 0;  // -1 close, +1 far
            int switches = 0;
            bool seen_close = false, seen_far = false;
            for (double s : sep) {
                const int p = s < 3.0 ? -1 : (s > 5.0 ? 1 : 0);
                if (p == 0) continue;
                seen_close |= p < 0;
                seen_far |= p > 0;
                if (phase != 0 && p != phase) ++switches;
                phase = p;
            }
            if (!seen_close || !seen_far || switches < 2) {
                err << "moderate scenario needs alternating close (<3 m) and far (>5 m) phases";
            }
            break;
        }
        case ScenarioKind::occlusion:
            break;
    }
    const std::string msg = err.str();
    if (!msg.empty()) throw ValidationError("infeasible " + std::string(to_string(sc.kind)) + " scenario: " + msg);
}

}  // namespace

std::vector<double> pair_separation(const GroundTruth& gt) {
    std::vector<double> out;
    out.reserve(gt.size());
    for (const auto& f : gt) {
        if (f.targets.size() < 2) {
            out.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        out.push_back(distance(f.targets[0].position, f.targets[1].position));
    }
    return out;
}

GroundTruth gen_trajectories(const Scenario& sc) {
    sc.validate();
    // The seed shifts where on the (periodic) paths the run starts.
    std::mt19937_64 phase_rng(sc.seed ^ 0x5DEECE66DULL);
    const double offset = std::uniform_real_distribution<double>(0.0, 120.0)(phase_rng);
    GroundTruth gt;
    gt.reserve(static_cast<std::size_t>(sc.n_frames));
    for (int k = 0; k < sc.n_frames; ++k) {
        GroundTruthFrame f;
        f.t = k * sc.dt;
        for (int id = 0; id < sc.targets; ++id) {
            const auto kin = target_kinematics(sc, id, f.t + offset);
            f.targets.push_back({id, Point3(kin.p), Point3(kin.v), !occluded(sc.sensor, id, f.t)});
        }
        gt.push_back(std::move(f));
    }
    check_contract(sc, gt);
    return gt;
}

Scan sample_scan(const GroundTruthFrame& frame, const SensorModel& sensor, std::mt19937_64& rng) {
    Scan scan;
    scan.t = frame.t;
    scan.pose = sensor.observer;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, sensor.sigma_meas);
    std::discrete_distribution<int> returns(sensor.n_return_weights.begin(), sensor.n_return_weights.end());

    std::vector<Point3> global;
    for (const auto& tgt : frame.targets) {
        if (!tgt.visible) continue;
        if (!(unit(rng) < sensor.p_hit)) continue;
        const int n = returns(rng) + 1;
        for (int r = 0; r < n; ++r) {
            const double dx = noise(rng);
            const double dy = noise(rng);
            const double dz = noise(rng);
            global.push_back(tgt.position + Point3(dx, dy, dz));
        }
    }
    if (sensor.clutter_rate > 0.0) {
        std::poisson_distribution<int> count(sensor.clutter_rate);
        const int n = count(rng);
        const auto& lo = sensor.clutter_volume.lo;
        const auto& hi = sensor.clutter_volume.hi;
        for (int c = 0; c < n; ++c) {
            const double x = lo.x + (hi.x - lo.x) * unit(rng);
            const double y = lo.y + (hi.y - lo.y) * unit(rng);
            const double z = lo.z + (hi.z - lo.z) * unit(rng);
            global.emplace_back(x, y, z);
        }
    }
    std::shuffle(global.begin(), global.end(), rng);
    scan.points.reserve(global.size());
    for (const auto& p : global) scan.points.push_back(to_local(p, sensor.observer));
    return scan;
}

ScenarioRun run_scenario(const Scenario& sc) {
    ScenarioRun run;
    run.truth = gen_trajectories(sc);
    std::mt19937_64 rng(sc.seed);
    run.scans.reserve(run.truth.size());
    for (const auto& f : run.truth) run.scans.push_back(sample_scan(f, sc.sensor, rng));
    return run;
}

}  // namespace sparsetrack

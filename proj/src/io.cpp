#include "sparsetrack/io.hpp"

#include "sparsetrack/presets.hpp"

#include <fstream>
#include <sstream>
#include <variant>

namespace sparsetrack::io {

ParseError::ParseError(const std::string& what, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

namespace {

json point_json(Point3 p) { return json::array({p.x, p.y, p.z}); }

Point3 point_from(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3-element array");
    Point3 p{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    if (!p.finite()) throw ParseError("non-finite coordinate");
    return p;
}

template <typename M>
json matrix_json(const M& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from(const json& j) {
    if (!j.is_array() || j.empty()) throw ParseError("expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw ParseError("ragged matrix");
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    return m;
}

template <int R, int C>
Eigen::Matrix<double, R, C> fixed_matrix_from(const json& j) {
    const Eigen::MatrixXd m = matrix_from(j);
    if (m.rows() != R || m.cols() != C) throw ParseError("matrix has the wrong shape");
    return m;
}

json pose_json(const Pose& p) {
    return {{"translation", point_json(p.translation())}, {"rotation", matrix_json(p.rotation())}};
}

Pose pose_from(const json& j) {
    return Pose(point_from(j.at("translation")), fixed_matrix_from<3, 3>(j.at("rotation")));
}

template <typename T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

// Flat scalar fields shared by to_json and the overlay parsers.
template <typename C>
struct Field {
    const char* name;
    std::variant<double C::*, int C::*, bool C::*> member;
};

template <typename C, std::size_t N>
json fields_json(const C& c, const std::array<Field<C>, N>& fields) {
    json j = json::object();
    for (const auto& f : fields) {
        std::visit([&](auto ptr) { j[f.name] = c.*ptr; }, f.member);
    }
    return j;
}

template <typename C, std::size_t N>
bool set_field(C& c, const std::array<Field<C>, N>& fields, const std::string& key, const json& v) {
    for (const auto& f : fields) {
        if (key != f.name) continue;
        std::visit(
            [&](auto ptr) {
                using V = std::remove_reference_t<decltype(c.*ptr)>;
                c.*ptr = v.get<V>();
            },
            f.member);
        return true;
    }
    return false;
}

const std::array<Field<DetectorConfig>, 20> kDetectorFields{{
    {"eps0", &DetectorConfig::eps0},
    {"alpha", &DetectorConfig::alpha},
    {"r_ref", &DetectorConfig::r_ref},
    {"min_pts", &DetectorConfig::min_pts},
    {"voxel", &DetectorConfig::voxel},
    {"h_min", &DetectorConfig::h_min},
    {"r_max", &DetectorConfig::r_max},
    {"r_excl", &DetectorConfig::r_excl},
    {"layer1_enabled", &DetectorConfig::layer1_enabled},
    {"n_min", &DetectorConfig::n_min},
    {"n_max", &DetectorConfig::n_max},
    {"e_max", &DetectorConfig::e_max},
    {"layer2_enabled", &DetectorConfig::layer2_enabled},
    {"tau_min", &DetectorConfig::tau_min},
    {"v_max", &DetectorConfig::v_max},
    {"layer3_enabled", &DetectorConfig::layer3_enabled},
    {"K", &DetectorConfig::K},
    {"M", &DetectorConfig::M},
    {"d_cons", &DetectorConfig::d_cons},
    {"T_cons", &DetectorConfig::T_cons},
}};

const std::array<Field<TrackerConfig>, 7> kTrackerFields{{
    {"confirm_hits", &TrackerConfig::confirm_hits},
    {"max_misses_tentative", &TrackerConfig::max_misses_tentative},
    {"max_misses_active", &TrackerConfig::max_misses_active},
    {"max_misses_dormant", &TrackerConfig::max_misses_dormant},
    {"init_min_separation", &TrackerConfig::init_min_separation},
    {"resurrect_radius", &TrackerConfig::resurrect_radius},
    {"jpda_miss_threshold", &TrackerConfig::jpda_miss_threshold},
}};

const std::array<Field<JpdaParams>, 4> kJpdaFields{{
    {"Pd", &JpdaParams::Pd},
    {"lambda_c", &JpdaParams::lambda_c},
    {"gamma", &JpdaParams::gamma},
    {"dormant_gate_factor", &JpdaParams::dormant_gate_factor},
}};

const std::array<Field<CostWeights>, 3> kWeightFields{{
    {"mahalanobis", &CostWeights::mahalanobis},
    {"anchor", &CostWeights::anchor},
    {"velocity", &CostWeights::velocity},
}};

const std::array<Field<SensorModel>, 3> kSensorFields{{
    {"p_hit", &SensorModel::p_hit},
    {"sigma_meas", &SensorModel::sigma_meas},
    {"clutter_rate", &SensorModel::clutter_rate},
}};

const std::array<Field<TrajectoryParams>, 12> kTrajectoryFields{{
    {"drift_amplitude", &TrajectoryParams::drift_amplitude},
    {"drift_period", &TrajectoryParams::drift_period},
    {"orbit_major", &TrajectoryParams::orbit_major},
    {"orbit_minor", &TrajectoryParams::orbit_minor},
    {"orbit_period", &TrajectoryParams::orbit_period},
    {"separation", &TrajectoryParams::separation},
    {"sway", &TrajectoryParams::sway},
    {"sway_period", &TrajectoryParams::sway_period},
    {"near_separation", &TrajectoryParams::near_separation},
    {"far_separation", &TrajectoryParams::far_separation},
    {"phase_period", &TrajectoryParams::phase_period},
    {"spin_period", &TrajectoryParams::spin_period},
}};

void require_object(const json& j, const char* what) {
    if (!j.is_object()) throw ParseError(std::string(what) + " must be a JSON object");
}

[[noreturn]] void unknown_key(const char* section, const std::string& key) {
    throw ParseError("unknown " + std::string(section) + " key '" + key + "'");
}

}  // namespace

// ---- records ---------------------------------------------------------------

json to_json(const Scan& s) {
    json pts = json::array();
    for (const auto& p : s.points) pts.push_back(point_json(p));
    return {{"t", s.t}, {"pose", pose_json(s.pose)}, {"points", std::move(pts)}};
}

Scan scan_from_json(const json& j) {
    Scan s;
    s.t = j.at("t").get<double>();
    s.pose = j.contains("pose") ? pose_from(j.at("pose")) : Pose::identity();
    for (const auto& p : j.at("points")) s.points.push_back(point_from(p));
    return s;
}

json to_json(const GroundTruthFrame& f) {
    json targets = json::array();
    for (const auto& t : f.targets) {
        targets.push_back({{"id", t.id}, {"pos", point_json(t.position)}, {"vel", point_json(t.velocity)},
                           {"visible", t.visible}});
    }
    return {{"t", f.t}, {"targets", std::move(targets)}};
}

GroundTruthFrame truth_from_json(const json& j) {
    GroundTruthFrame f;
    f.t = j.at("t").get<double>();
    for (const auto& t : j.at("targets")) {
        f.targets.push_back({t.at("id").get<int>(), point_from(t.at("pos")),
                             t.contains("vel") ? point_from(t.at("vel")) : Point3{}, t.value("visible", true)});
    }
    return f;
}

json to_json(const DetectionFrame& f) {
    json dets = json::array();
    for (const auto& m : f.detections) dets.push_back({{"pos", point_json(m.position)}, {"support", m.support}});
    return {{"t", f.t}, {"detections", std::move(dets)}};
}

DetectionFrame detections_from_json(const json& j) {
    DetectionFrame f;
    f.t = j.at("t").get<double>();
    for (const auto& d : j.at("detections")) {
        Measurement m{f.t, point_from(d.at("pos")), d.value("support", 1)};
        if (m.support < 1) throw ParseError("detection support must be >= 1");
        f.detections.push_back(m);
    }
    return f;
}

json to_json(const FrameLog& f) {
    json tracks = json::array();
    for (const auto& s : f.tracks) {
        tracks.push_back({{"id", s.id},
                          {"status", std::string(to_string(s.status))},
                          {"pos", point_json(s.position)},
                          {"vel", point_json(s.velocity)},
                          {"mu", s.mu}});
    }
    json assignments = json::array();
    for (const auto& [id, j] : f.assignments) assignments.push_back(json::array({id, j}));
    json beta = json::array();
    for (const auto& b : f.beta) {
        beta.push_back({{"id", b.id}, {"beta0", b.beta0}, {"best", b.best_detection}, {"best_beta", b.best_beta}});
    }
    return {{"t", f.t},
            {"tracks", std::move(tracks)},
            {"assignments", std::move(assignments)},
            {"beta", std::move(beta)},
            {"spawned", f.spawned},
            {"resurrected", f.resurrected},
            {"deleted", f.deleted}};
}

FrameLog framelog_from_json(const json& j) {
    FrameLog f;
    f.t = j.at("t").get<double>();
    for (const auto& s : j.at("tracks")) {
        TrackSnapshot snap;
        snap.id = s.at("id").get<std::int64_t>();
        snap.status = track_status_from_string(s.at("status").get<std::string>());
        snap.position = point_from(s.at("pos"));
        snap.velocity = point_from(s.at("vel"));
        snap.mu = s.value("mu", std::vector<double>{});
        f.tracks.push_back(std::move(snap));
    }
    for (const auto& a : j.value("assignments", json::array())) {
        f.assignments.emplace_back(a.at(0).get<std::int64_t>(), a.at(1).get<int>());
    }
    for (const auto& b : j.value("beta", json::array())) {
        f.beta.push_back({b.at("id").get<std::int64_t>(), b.at("beta0").get<double>(), b.at("best").get<int>(),
                          b.at("best_beta").get<double>()});
    }
    f.spawned = j.value("spawned", std::vector<std::int64_t>{});
    f.resurrected = j.value("resurrected", std::vector<std::int64_t>{});
    f.deleted = j.value("deleted", std::vector<std::int64_t>{});
    return f;
}

json to_json(const DetectionReport& r) {
    return {{"tp", r.tp},
            {"fp", r.fp},
            {"fn", r.fn},
            {"precision", opt(r.precision)},
            {"recall", opt(r.recall)},
            {"f1", opt(r.f1)},
            {"rmse", opt(r.rmse)},
            {"det_pct", opt(r.det_pct)},
            {"visible_frames", r.visible_frames},
            {"frames_with_detection", r.frames_with_detection}};
}

DetectionReport detection_report_from_json(const json& j) {
    DetectionReport r;
    r.tp = j.at("tp").get<int>();
    r.fp = j.at("fp").get<int>();
    r.fn = j.at("fn").get<int>();
    r.precision = opt_from<double>(j, "precision");
    r.recall = opt_from<double>(j, "recall");
    r.f1 = opt_from<double>(j, "f1");
    r.rmse = opt_from<double>(j, "rmse");
    r.det_pct = opt_from<double>(j, "det_pct");
    r.visible_frames = j.value("visible_frames", 0);
    r.frames_with_detection = j.value("frames_with_detection", 0);
    return r;
}

json to_json(const MotReport& r) {
    return {{"mota", r.mota},       {"rmse", opt(r.rmse)}, {"id_switches", r.id_switches}, {"fp", r.fp},
            {"fn", r.fn},           {"gt_total", r.gt_total}, {"matches", r.matches}};
}

MotReport mot_report_from_json(const json& j) {
    MotReport r;
    r.mota = j.at("mota").get<double>();
    r.rmse = opt_from<double>(j, "rmse");
    r.id_switches = j.at("id_switches").get<int>();
    r.fp = j.at("fp").get<int>();
    r.fn = j.at("fn").get<int>();
    r.gt_total = j.at("gt_total").get<int>();
    r.matches = j.value("matches", 0);
    return r;
}

// ---- configs ---------------------------------------------------------------

json to_json(const DetectorConfig& c) { return fields_json(c, kDetectorFields); }

DetectorConfig detector_config_from_json(const json& j, DetectorConfig c) {
    require_object(j, "detector config");
    if (j.contains("preset")) c = detector_preset(j.at("preset").get<std::string>());
    for (const auto& [key, v] : j.items()) {
        if (key == "preset") continue;
        if (!set_field(c, kDetectorFields, key, v)) unknown_key("detector", key);
    }
    c.validate();
    return c;
}

json to_json(const TrackerConfig& c) {
    json j = fields_json(c, kTrackerFields);
    j["association"] = std::string(to_string(c.association_mode));
    j["jpda"] = fields_json(c.jpda, kJpdaFields);
    j["jpda"]["max_events"] = c.jpda.max_events;
    j["weights"] = fields_json(c.weights, kWeightFields);
    const auto& f = c.filter;
    j["filter"] = {{"q_levels", f.q_levels},
                   {"Pi", matrix_json(f.Pi)},
                   {"R", matrix_json(f.R)},
                   {"P0", matrix_json(f.P0)},
                   {"mu0", std::vector<double>(f.mu0.data(), f.mu0.data() + f.mu0.size())}};
    return j;
}

TrackerConfig tracker_config_from_json(const json& j, TrackerConfig c) {
    require_object(j, "tracker config");
    for (const auto& [key, v] : j.items()) {
        if (set_field(c, kTrackerFields, key, v)) continue;
        if (key == "association") {
            c.association_mode = association_mode_from_string(v.get<std::string>());
        } else if (key == "jpda") {
            require_object(v, "jpda");
            for (const auto& [k2, v2] : v.items()) {
                if (k2 == "max_events") {
                    c.jpda.max_events = v2.get<std::size_t>();
                } else if (!set_field(c.jpda, kJpdaFields, k2, v2)) {
                    unknown_key("jpda", k2);
                }
            }
        } else if (key == "weights") {
            require_object(v, "weights");
            for (const auto& [k2, v2] : v.items()) {
                if (!set_field(c.weights, kWeightFields, k2, v2)) unknown_key("weights", k2);
            }
        } else if (key == "filter") {
            require_object(v, "filter");
            for (const auto& [k2, v2] : v.items()) {
                if (k2 == "q_levels") {
                    c.filter.q_levels = v2.get<std::vector<double>>();
                } else if (k2 == "Pi") {
                    c.filter.Pi = matrix_from(v2);
                } else if (k2 == "R") {
                    c.filter.R = fixed_matrix_from<3, 3>(v2);
                } else if (k2 == "P0") {
                    c.filter.P0 = fixed_matrix_from<6, 6>(v2);
                } else if (k2 == "mu0") {
                    const auto mu = v2.get<std::vector<double>>();
                    c.filter.mu0 = Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
                } else {
                    unknown_key("filter", k2);
                }
            }
        } else {
            unknown_key("tracker", key);
        }
    }
    c.validate();
    return c;
}

json to_json(const Scenario& s) {
    json sensor = fields_json(s.sensor, kSensorFields);
    sensor["n_return_weights"] = s.sensor.n_return_weights;
    sensor["clutter_volume"] = {{"lo", point_json(s.sensor.clutter_volume.lo)},
                                {"hi", point_json(s.sensor.clutter_volume.hi)}};
    json windows = json::array();
    for (const auto& w : s.sensor.occlusion_windows) {
        windows.push_back({{"start", w.start}, {"end", w.end}, {"target", w.target}});
    }
    sensor["occlusion_windows"] = std::move(windows);
    sensor["observer"] = pose_json(s.sensor.observer);
    json traj = fields_json(s.trajectory, kTrajectoryFields);
    traj["center"] = point_json(s.trajectory.center);
    return {{"kind", std::string(to_string(s.kind))},
            {"n_frames", s.n_frames},
            {"dt", s.dt},
            {"seed", s.seed},
            {"targets", s.targets},
            {"sensor", std::move(sensor)},
            {"trajectory", std::move(traj)}};
}

Scenario scenario_from_json(const json& j, Scenario s) {
    require_object(j, "scenario");
    for (const auto& [key, v] : j.items()) {
        if (key == "kind") {
            const auto kind = scenario_kind_from_string(v.get<std::string>());
            if (kind != s.kind) {
                const auto seed = s.seed;
                s = Scenario::make(kind, seed);
            }
        } else if (key == "n_frames") {
            s.n_frames = v.get<int>();
        } else if (key == "dt") {
            s.dt = v.get<double>();
        } else if (key == "seed") {
            s.seed = v.get<std::uint64_t>();
        } else if (key == "targets") {
            s.targets = v.get<int>();
        } else if (key == "sensor") {
            require_object(v, "sensor");
            for (const auto& [k2, v2] : v.items()) {
                if (set_field(s.sensor, kSensorFields, k2, v2)) continue;
                if (k2 == "n_return_weights") {
                    s.sensor.n_return_weights = v2.get<std::vector<double>>();
                } else if (k2 == "clutter_volume") {
                    s.sensor.clutter_volume = {point_from(v2.at("lo")), point_from(v2.at("hi"))};
                } else if (k2 == "occlusion_windows") {
                    s.sensor.occlusion_windows.clear();
                    for (const auto& w : v2) {
                        s.sensor.occlusion_windows.push_back(
                            {w.at("start").get<double>(), w.at("end").get<double>(), w.at("target").get<int>()});
                    }
                } else if (k2 == "observer") {
                    s.sensor.observer = pose_from(v2);
                } else {
                    unknown_key("sensor", k2);
                }
            }
        } else if (key == "trajectory") {
            require_object(v, "trajectory");
            for (const auto& [k2, v2] : v.items()) {
                if (set_field(s.trajectory, kTrajectoryFields, k2, v2)) continue;
                if (k2 == "center") {
                    s.trajectory.center = point_from(v2);
                } else {
                    unknown_key("trajectory", k2);
                }
            }
        } else {
            unknown_key("scenario", key);
        }
    }
    s.validate();
    return s;
}

// ---- streams ---------------------------------------------------------------

std::vector<json> read_jsonl(std::istream& is) {
    std::vector<json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    return out;
}

namespace {

// Parses each non-blank line with `conv`, attaching line numbers to failures.
template <typename T, typename Conv>
std::vector<T> read_records(std::istream& is, Conv conv) {
    std::vector<T> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(conv(json::parse(line)));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno);
        } catch (const json::exception& e) {
            throw ParseError(e.what(), lineno);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    return out;
}

}  // namespace

std::vector<Scan> read_scans(std::istream& is) { return read_records<Scan>(is, scan_from_json); }
GroundTruth read_truth(std::istream& is) { return read_records<GroundTruthFrame>(is, truth_from_json); }
std::vector<DetectionFrame> read_detections(std::istream& is) {
    return read_records<DetectionFrame>(is, detections_from_json);
}
std::vector<FrameLog> read_framelog(std::istream& is) { return read_records<FrameLog>(is, framelog_from_json); }

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open '" + p.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
    out << content;
    if (!out) throw IoError("failed writing '" + p.string() + "'");
}

json read_json_file(const std::filesystem::path& p) {
    const std::string text = read_file(p);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(p.string() + ": " + e.what());
    }
}

}  // namespace sparsetrack::io

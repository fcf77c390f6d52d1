#include "sparsetrack/cli.hpp"

#include "sparsetrack/io.hpp"
#include "sparsetrack/pipeline.hpp"
#include "sparsetrack/presets.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace sparsetrack {

namespace {

namespace fs = std::filesystem;
using io::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config;
    std::string preset;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string association;
    std::string out;
    std::string report;
    std::string scans;
    std::string truth;
    std::string measurements;
    std::string log;
    std::string scenario;
    int frames = 0;
    std::vector<int> min_pts;
    std::vector<double> eps0;
    std::vector<double> voxel;
    double match_radius = 1.0;
};

// Sections allowed in a --config file.
struct FileConfig {
    std::optional<json> detector;
    std::optional<json> tracker;
    std::optional<json> scenario;
};

FileConfig load_config(const std::string& path) {
    FileConfig fc;
    if (path.empty()) return fc;
    const json j = io::read_json_file(path);
    if (!j.is_object()) throw io::ParseError(path + ": config must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "detector") {
            fc.detector = v;
        } else if (key == "tracker") {
            fc.tracker = v;
        } else if (key == "scenario") {
            fc.scenario = v;
        } else {
            throw io::ParseError(path + ": unknown config section '" + key + "'");
        }
    }
    return fc;
}

DetectorConfig resolve_detector(const Options& o, const FileConfig& fc, const char* default_preset) {
    DetectorConfig cfg;
    try {
        cfg = detector_preset(o.preset.empty() ? default_preset : o.preset);
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
    if (fc.detector) cfg = io::detector_config_from_json(*fc.detector, cfg);
    cfg.validate();
    return cfg;
}

TrackerConfig resolve_tracker(const Options& o, const FileConfig& fc) {
    TrackerConfig cfg;
    if (fc.tracker) cfg = io::tracker_config_from_json(*fc.tracker, cfg);
    if (!o.association.empty()) cfg.association_mode = association_mode_from_string(o.association);
    cfg.validate();
    return cfg;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io::IoError("cannot open '" + path + "' for reading");
    return in;
}

template <typename T, typename Reader>
std::vector<T> read_stream(const std::string& path, Reader reader) {
    auto in = open_input(path);
    try {
        return reader(in);
    } catch (const io::ParseError& e) {
        throw io::ParseError(path + ": " + e.what());
    }
}

template <typename T>
std::string jsonl(const std::vector<T>& records) {
    std::ostringstream os;
    io::write_jsonl(os, records);
    return os.str();
}

// Writes `text` to `path`, or to `out` when no path is given.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
    } else {
        io::write_file(path, text);
    }
}

json detect_summary(const std::vector<DetectionFrame>& frames, const std::optional<DetectionReport>& report) {
    std::size_t n = 0;
    for (const auto& f : frames) n += f.detections.size();
    return {{"frames", frames.size()}, {"detections", n}, {"evaluation", report ? io::to_json(*report) : json(nullptr)}};
}

int cmd_detect(const Options& o, std::ostream& out) {
    const FileConfig fc = load_config(o.config);
    const DetectorConfig cfg = resolve_detector(o, fc, "O");
    const auto scans = read_stream<Scan>(o.scans, io::read_scans);
    const auto frames = run_detector(scans, cfg);
    std::optional<DetectionReport> report;
    if (!o.truth.empty()) {
        const auto gt = read_stream<GroundTruthFrame>(o.truth, io::read_truth);
        report = eval_detection(frames, gt, o.match_radius);
    }
    emit(o.out, jsonl(frames), out);
    emit(o.report, detect_summary(frames, report).dump() + "\n", out);
    return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    const FileConfig fc = load_config(o.config);
    ScenarioKind kind = ScenarioKind::crossings;
    if (!o.scenario.empty()) {
        try {
            kind = scenario_kind_from_string(o.scenario);
        } catch (const ValidationError& e) {
            throw UsageError(e.what());
        }
    }
    Scenario sc = Scenario::make(kind, o.seed);
    if (fc.scenario) sc = io::scenario_from_json(*fc.scenario, sc);
    if (o.seed_set) sc.seed = o.seed;
    if (o.frames > 0) sc.n_frames = o.frames;
    sc.validate();

    const ScenarioRun run = run_scenario(sc);
    const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io::IoError("cannot create directory '" + dir.string() + "': " + ec.message());
    io::write_file(dir / "scans.jsonl", jsonl(run.scans));
    io::write_file(dir / "truth.jsonl", jsonl(run.truth));
    out << json{{"scenario", io::to_json(sc)},
                {"frames", run.scans.size()},
                {"scans", (dir / "scans.jsonl").string()},
                {"truth", (dir / "truth.jsonl").string()}}
               .dump()
        << '\n';
    return kExitOk;
}

int cmd_track(const Options& o, std::ostream& out) {
    if (o.scans.empty() == o.measurements.empty()) throw UsageError("track needs exactly one of --scans or --measurements");
    const FileConfig fc = load_config(o.config);
    const TrackerConfig trk = resolve_tracker(o, fc);
    std::vector<DetectionFrame> frames;
    if (!o.scans.empty()) {
        const DetectorConfig det = resolve_detector(o, fc, "A_s");
        frames = run_detector(read_stream<Scan>(o.scans, io::read_scans), det);
    } else {
        frames = read_stream<DetectionFrame>(o.measurements, io::read_detections);
    }
    std::optional<GroundTruth> gt;
    if (!o.truth.empty()) {
        gt = read_stream<GroundTruthFrame>(o.truth, io::read_truth);
        // Check alignment before spending time on tracking.
        eval_detection(frames, *gt, o.match_radius);
    }
    const auto log = track_detections(frames, trk);
    emit(o.out, jsonl(log), out);
    json summary = {{"frames", log.size()}, {"association", std::string(to_string(trk.association_mode))}};
    summary["mot"] = gt ? io::to_json(eval_mot(log, *gt, o.match_radius)) : json(nullptr);
    emit(o.report, summary.dump() + "\n", out);
    return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
    SweepGrid grid{o.min_pts, o.eps0, o.voxel};
    if (grid.empty()) throw UsageError("sweep grid is empty; give --min-pts, --eps0 and/or --voxel");
    const FileConfig fc = load_config(o.config);
    const DetectorConfig base = resolve_detector(o, fc, "O");
    const auto scans = read_stream<Scan>(o.scans, io::read_scans);
    const auto gt = read_stream<GroundTruthFrame>(o.truth, io::read_truth);
    const auto rows = run_sweep(scans, gt, base, grid, o.match_radius);
    std::ostringstream os;
    for (const auto& r : rows) {
        json row = {{"eps0", r.config.eps0}, {"min_pts", r.config.min_pts}, {"voxel", r.config.voxel}};
        row.update(io::to_json(r.report));
        os << row.dump() << '\n';
    }
    emit(o.out, os.str(), out);
    return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
    if (o.measurements.empty() == o.log.empty()) throw UsageError("evaluate needs exactly one of --measurements or --log");
    const auto gt = read_stream<GroundTruthFrame>(o.truth, io::read_truth);
    json report;
    if (!o.measurements.empty()) {
        const auto frames = read_stream<DetectionFrame>(o.measurements, io::read_detections);
        report = io::to_json(eval_detection(frames, gt, o.match_radius));
    } else {
        const auto log = read_stream<FrameLog>(o.log, io::read_framelog);
        report = io::to_json(eval_mot(log, gt, o.match_radius));
    }
    emit(o.out, report.dump() + "\n", out);
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse point-cloud UAV detection and multi-target tracking"};
    app.require_subcommand(1);
    Options o;

    const auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON config with detector/tracker/scenario sections");
        sub->add_option("--out", o.out, "Output path (stdout when omitted)");
    };
    const auto add_preset = [&](CLI::App* sub) {
        sub->add_option("--preset", o.preset, "Built-in detector preset");
        sub->add_option("--match-radius", o.match_radius, "Evaluation match radius [m]")->check(CLI::PositiveNumber);
    };

    auto* detect = app.add_subcommand("detect", "Run the detector over a scan stream");
    add_config(detect);
    add_preset(detect);
    detect->add_option("--scans", o.scans, "Scan JSONL")->required();
    detect->add_option("--truth", o.truth, "Ground-truth JSONL for evaluation");
    detect->add_option("--report", o.report, "Report path (stdout when omitted)");

    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic scenario");
    add_config(simulate);
    simulate->add_option("--scenario", o.scenario, "occlusion|crossings|separated|moderate");
    simulate->add_option("--seed", o.seed, "Random seed")->each([&](const std::string&) { o.seed_set = true; });
    simulate->add_option("--frames", o.frames, "Override the frame count")->check(CLI::PositiveNumber);

    auto* track = app.add_subcommand("track", "Track a scan or measurement stream");
    add_config(track);
    add_preset(track);
    track->add_option("--scans", o.scans, "Scan JSONL (detector runs first)");
    track->add_option("--measurements", o.measurements, "Detections JSONL");
    track->add_option("--truth", o.truth, "Ground-truth JSONL for MOT evaluation");
    track->add_option("--association", o.association, "Association mode")
        ->check(CLI::IsMember({"hungarian", "jpda"}));
    track->add_option("--report", o.report, "Report path (stdout when omitted)");

    auto* sweep = app.add_subcommand("sweep", "Detector parameter sweep");
    add_config(sweep);
    add_preset(sweep);
    sweep->add_option("--scans", o.scans, "Scan JSONL")->required();
    sweep->add_option("--truth", o.truth, "Ground-truth JSONL")->required();
    sweep->add_option("--min-pts", o.min_pts, "minPts values")->delimiter(',');
    sweep->add_option("--eps0", o.eps0, "Base radius values")->delimiter(',');
    sweep->add_option("--voxel", o.voxel, "Voxel edge values")->delimiter(',');

    auto* evaluate = app.add_subcommand("evaluate", "Score detections or a frame log against ground truth");
    evaluate->add_option("--truth", o.truth, "Ground-truth JSONL")->required();
    evaluate->add_option("--measurements", o.measurements, "Detections JSONL");
    evaluate->add_option("--log", o.log, "Frame log JSONL");
    evaluate->add_option("--out", o.out, "Output path (stdout when omitted)");
    evaluate->add_option("--match-radius", o.match_radius, "Match radius [m]")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (detect->parsed()) return cmd_detect(o, out);
        if (simulate->parsed()) return cmd_simulate(o, out);
        if (track->parsed()) return cmd_track(o, out);
        if (sweep->parsed()) return cmd_sweep(o, out);
        return cmd_evaluate(o, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const io::ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kExitData;
    } catch (const io::IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kExitData;
    } catch (const EmptyInputError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitNumeric;
    }
}

}  // namespace sparsetrack

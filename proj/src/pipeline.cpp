#include "sparsetrack/pipeline.hpp"

namespace sparsetrack {

std::vector<DetectionFrame> run_detector(std::span<const Scan> scans, const DetectorConfig& cfg) {
    Detector det(cfg);
    std::vector<DetectionFrame> out;
    out.reserve(scans.size());
    for (const auto& s : scans) out.push_back({s.t, det.process(s)});
    return out;
}

std::vector<FrameLog> track_detections(std::span<const DetectionFrame> frames, const TrackerConfig& cfg) {
    Tracker tracker(cfg);
    std::vector<FrameLog> out;
    out.reserve(frames.size());
    for (const auto& f : frames) out.push_back(tracker.step(f.detections, f.t));
    return out;
}

std::vector<SweepRow> run_sweep(std::span<const Scan> scans, const GroundTruth& gt, const DetectorConfig& base,
                                const SweepGrid& grid, double match_radius) {
    if (grid.empty()) throw ValidationError("sweep grid is empty");
    const std::vector<int> mp = grid.min_pts.empty() ? std::vector<int>{base.min_pts} : grid.min_pts;
    const std::vector<double> ep = grid.eps0.empty() ? std::vector<double>{base.eps0} : grid.eps0;
    const std::vector<double> vx = grid.voxel.empty() ? std::vector<double>{base.voxel} : grid.voxel;

    std::vector<SweepRow> rows;
    for (int m : mp) {
        for (double e : ep) {
            for (double v : vx) {
                DetectorConfig cfg = base;
                cfg.min_pts = m;
                cfg.eps0 = e;
                cfg.voxel = v;
                cfg.validate();
                const auto dets = run_detector(scans, cfg);
                rows.push_back({cfg, eval_detection(dets, gt, match_radius)});
            }
        }
    }
    return rows;
}

TrackingRun run_tracking_scenario(const Scenario& sc, const DetectorConfig& det, const TrackerConfig& trk) {
    const ScenarioRun sim = run_scenario(sc);
    TrackingRun run;
    run.detections = run_detector(sim.scans, det);
    run.log = track_detections(run.detections, trk);
    run.report = eval_mot(run.log, sim.truth);
    return run;
}

}  // namespace sparsetrack

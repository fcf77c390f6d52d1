#pragma once

#include "sparsetrack/detector.hpp"
#include "sparsetrack/metrics.hpp"
#include "sparsetrack/simulator.hpp"
#include "sparsetrack/trackman.hpp"

#include <span>
#include <vector>

namespace sparsetrack {

/// Runs a fresh Detector over a scan stream, one DetectionFrame per scan.
std::vector<DetectionFrame> run_detector(std::span<const Scan> scans, const DetectorConfig& cfg);

std::vector<FrameLog> track_detections(std::span<const DetectionFrame> frames, const TrackerConfig& cfg);

/// Cartesian grid over the swept detector parameters. Empty axes keep the base value.
struct SweepGrid {
    std::vector<int> min_pts;
    std::vector<double> eps0;
    std::vector<double> voxel;

    bool empty() const { return min_pts.empty() && eps0.empty() && voxel.empty(); }
};

struct SweepRow {
    DetectorConfig config;
    DetectionReport report;
};

/// One row per grid point, ordered min_pts-major, then eps0, then voxel.
std::vector<SweepRow> run_sweep(std::span<const Scan> scans, const GroundTruth& gt, const DetectorConfig& base,
                                const SweepGrid& grid, double match_radius = 1.0);

struct TrackingRun {
    std::vector<DetectionFrame> detections;
    std::vector<FrameLog> log;
    MotReport report;
};

/// Simulate, detect and track one scenario end to end.
TrackingRun run_tracking_scenario(const Scenario& sc, const DetectorConfig& det, const TrackerConfig& trk);

}  // namespace sparsetrack

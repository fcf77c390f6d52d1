#pragma once

#include "sparsetrack/core.hpp"
#include "sparsetrack/simulator.hpp"
#include "sparsetrack/trackman.hpp"

#include <optional>
#include <span>
#include <vector>

namespace sparsetrack {

struct DetectionFrame {
    double t = 0.0;
    std::vector<Measurement> detections;
};

struct DetectionReport {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    std::optional<double> precision;  // absent when nothing was detected
    std::optional<double> recall;     // absent when nothing was visible
    std::optional<double> f1;
    std::optional<double> rmse;       // over true positives [m]
    std::optional<double> det_pct;    // visible frames with >= 1 detection [%]
    int visible_frames = 0;
    int frames_with_detection = 0;

    /// Ratios from a confusion triple alone; rmse and det_pct stay absent.
    static DetectionReport from_counts(int tp, int fp, int fn);
};

/// Greedy nearest-first one-to-one matching per frame within match_radius.
/// Frames are aligned by index and must agree in timestamp.
DetectionReport eval_detection(std::span<const DetectionFrame> detections, const GroundTruth& gt,
                               double match_radius = 1.0);

struct MotReport {
    double mota = 0.0;
    std::optional<double> rmse;
    int id_switches = 0;
    int fp = 0;
    int fn = 0;
    int gt_total = 0;
    int matches = 0;
};

/// CLEAR-MOT over confirmed tracks. Previous correspondences are kept when
/// still within match_radius; the rest are matched greedily nearest-first.
/// Every ground-truth target counts toward GT, visible or not.
MotReport eval_mot(std::span<const FrameLog> log, const GroundTruth& gt, double match_radius = 1.0);

double mota_from_counts(int fp, int fn, int id_switches, int gt_total);

}  // namespace sparsetrack

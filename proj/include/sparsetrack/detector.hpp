#pragma once

#include "sparsetrack/core.hpp"

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace sparsetrack {

/// Parameters of the detection pipeline. Values not pinned by a named preset
/// are repo defaults and should be retuned per platform.
struct DetectorConfig {
    // clustering
    double eps0 = 0.60;      // base DBSCAN radius [m]
    double alpha = 0.0;      // range-growth rate [m/m]
    double r_ref = 10.0;     // range where growth starts [m]
    int min_pts = 2;
    double voxel = 0.05;     // voxel edge [m]
    // ROI
    double h_min = -1.0;     // lowest kept local z [m]
    double r_max = 40.0;
    double r_excl = 1.0;     // self-return exclusion cylinder radius [m]
    // Layer 1
    bool layer1_enabled = true;
    int n_min = 1;
    int n_max = 40;
    double e_max = 1.5;
    // Layer 2
    bool layer2_enabled = true;
    double tau_min = 0.5;
    double v_max = 15.0;
    // Layer 3
    bool layer3_enabled = false;
    int K = 5;
    int M = 2;
    double d_cons = 1.5;
    double T_cons = 1.0;

    /// Throws ValidationError on violated invariants.
    void validate() const;
};

struct Cluster {
    std::vector<Point3> points;  // local frame
    Point3 extents;              // axis-aligned bounding box side lengths

    static Cluster from_points(std::vector<Point3> pts);
    int count() const { return static_cast<int>(points.size()); }
};

struct HistoryEntry {
    Point3 position;  // global frame
    double t = 0.0;
};

/// Ring buffer of the last K accepted candidates, oldest first.
class TemporalHistory {
public:
    explicit TemporalHistory(std::size_t capacity = 5) : capacity_(capacity) {}

    void push(HistoryEntry e);
    void clear() { entries_.clear(); }

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::deque<HistoryEntry>& entries() const { return entries_; }

    /// Nearest entry to p among those sharing the newest timestamp.
    std::optional<HistoryEntry> latest_nearest(Point3 p) const;

private:
    std::size_t capacity_;
    std::deque<HistoryEntry> entries_;
};

Scan roi_filter(const Scan& scan, const DetectorConfig& cfg);

/// Voxel grid anchored at the origin with half-open cells [i*v, (i+1)*v).
/// Output order follows first occupancy in the input.
std::vector<Point3> voxel_downsample(std::span<const Point3> points, double voxel);

double adaptive_epsilon(double range, const DetectorConfig& cfg);

/// Per-point cluster labels, -1 for noise. Neighbourhoods are closed balls
/// (d <= eps) and include the query point.
std::vector<int> dbscan_labels(std::span<const Point3> points, double eps, int min_pts);

std::vector<Cluster> dbscan(std::span<const Point3> points, double eps, int min_pts);

bool validate_geometric(const Cluster& c, const DetectorConfig& cfg);
bool validate_jump(Point3 z_now, std::optional<Point3> z_prev, double dt, const DetectorConfig& cfg);
bool validate_temporal(Point3 z, double t, const TemporalHistory& hist, const DetectorConfig& cfg);

/// Component-wise median for >= 3 points, arithmetic mean otherwise.
Point3 estimate_centroid(const Cluster& c);

/// Runs the whole pipeline on one scan and updates `state` with the
/// candidates that passed Layers 1 and 2.
std::vector<Measurement> detect(const Scan& scan, const DetectorConfig& cfg, TemporalHistory& state);

/// Stateful wrapper bound to one scan stream.
class Detector {
public:
    explicit Detector(DetectorConfig cfg);

    std::vector<Measurement> process(const Scan& scan);
    const DetectorConfig& config() const { return cfg_; }
    const TemporalHistory& history() const { return history_; }

private:
    DetectorConfig cfg_;
    TemporalHistory history_;
    std::optional<double> last_t_;
};

}  // namespace sparsetrack

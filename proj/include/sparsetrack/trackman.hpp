#pragma once

#include "sparsetrack/association.hpp"
#include "sparsetrack/core.hpp"
#include "sparsetrack/filter.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace sparsetrack {

enum class TrackStatus { tentative, confirmed, dormant, deleted };

std::string_view to_string(TrackStatus s);
TrackStatus track_status_from_string(std::string_view s);

enum class AssociationMode { hungarian, jpda };

std::string_view to_string(AssociationMode m);
AssociationMode association_mode_from_string(std::string_view s);

struct Anchor {
    Point3 position;
    double t = 0.0;
};

struct Track {
    std::int64_t id = 0;
    IMMState imm;
    TrackStatus status = TrackStatus::tentative;
    int hits = 0;           // consecutive
    int misses = 0;         // consecutive, while active
    int dormant_frames = 0;
    std::optional<Anchor> last_confident;
    double created_at = 0.0;

    bool live() const { return status == TrackStatus::tentative || status == TrackStatus::confirmed; }
};

struct TrackerConfig {
    int confirm_hits = 3;
    int max_misses_tentative = 3;
    int max_misses_active = 10;
    int max_misses_dormant = 50;
    double init_min_separation = 1.0;  // [m]
    double resurrect_radius = 4.0;     // [m]
    double jpda_miss_threshold = 0.5;  // beta0 above this counts as a miss
    FilterConfig filter;
    JpdaParams jpda;
    CostWeights weights;
    AssociationMode association_mode = AssociationMode::hungarian;

    void validate() const;
};

/// Pure lifecycle transition for one frame's hit/miss outcome.
TrackStatus lifecycle_advance(Track& track, bool hit, const TrackerConfig& cfg);

struct TrackSnapshot {
    std::int64_t id = 0;
    TrackStatus status = TrackStatus::tentative;
    Point3 position;
    Point3 velocity;
    std::vector<double> mu;
};

struct FrameLog {
    double t = 0.0;
    std::vector<TrackSnapshot> tracks;  // every non-deleted track after the step
    // Hungarian mode: (track id, detection index) pairs.
    std::vector<std::pair<std::int64_t, int>> assignments;
    // JPDA mode: per track id, the missed-detection mass and its most likely detection.
    struct BetaSummary {
        std::int64_t id = 0;
        double beta0 = 1.0;
        int best_detection = -1;
        double best_beta = 0.0;
    };
    std::vector<BetaSummary> beta;
    std::vector<std::int64_t> spawned;
    std::vector<std::int64_t> resurrected;
    std::vector<std::int64_t> deleted;
};

class Tracker {
public:
    explicit Tracker(TrackerConfig cfg);

    /// Advances all tracks to time t and folds in the frame's measurements.
    /// Throws ValidationError for non-increasing timestamps.
    FrameLog step(std::span<const Measurement> measurements, double t);

    const std::vector<Track>& tracks() const { return tracks_; }
    const TrackerConfig& config() const { return cfg_; }

private:
    Track spawn(Point3 z, double t);

    TrackerConfig cfg_;
    std::vector<Track> tracks_;
    std::int64_t next_id_ = 1;
    std::optional<double> last_t_;
};

/// Convenience: run a tracker over a whole measurement stream.
std::vector<FrameLog> run_tracker(const TrackerConfig& cfg, std::span<const std::vector<Measurement>> frames,
                                  std::span<const double> times);

}  // namespace sparsetrack

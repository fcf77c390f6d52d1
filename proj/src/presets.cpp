#include "sparsetrack/presets.hpp"

#include <array>

namespace sparsetrack {

namespace {

// Growth rate used when a preset enables range adaptation.
constexpr double kAdaptiveAlpha = 0.02;
// Simulated sensor voxel edge.
constexpr double kSimVoxel = 0.05;

struct PresetRow {
    std::string_view name;
    double eps0;
    int min_pts;
    double voxel;
    bool adaptive;
    bool layer3;
    bool layer1;
    bool layer2;
};

constexpr std::array<PresetRow, 11> kPresets{{
    {"O", 0.60, 2, 0.05, false, false, true, true},
    {"A", 0.45, 3, 0.04, false, false, true, true},
    // B runs without geometric validation.
    {"B", 0.70, 2, 0.06, false, false, false, true},
    {"C", 0.60, 2, 0.04, true, false, true, true},
    {"D", 0.55, 2, 0.05, true, false, true, true},
    {"S1", 0.80, 1, 0.06, false, true, true, true},
    {"S4", 0.50, 4, 0.04, false, true, true, true},
    {"MR", 0.80, 2, 0.07, false, true, true, true},
    // Multi-target simulation presets leave jump filtering to the tracker.
    {"A_s", 0.50, 3, kSimVoxel, false, false, true, false},
    {"B_s", 0.40, 2, kSimVoxel, false, false, true, false},
    {"C_s", 0.45, 3, kSimVoxel, false, false, true, false},
}};

}  // namespace

DetectorConfig detector_preset(std::string_view name) {
    for (const auto& row : kPresets) {
        if (row.name != name) continue;
        DetectorConfig cfg;
        cfg.eps0 = row.eps0;
        cfg.min_pts = row.min_pts;
        cfg.voxel = row.voxel;
        cfg.r_ref = 10.0;
        cfg.alpha = row.adaptive ? kAdaptiveAlpha : 0.0;
        cfg.layer1_enabled = row.layer1;
        cfg.layer2_enabled = row.layer2;
        cfg.layer3_enabled = row.layer3;
        return cfg;
    }
    throw ValidationError("unknown detector preset '" + std::string(name) + "'");
}

std::vector<std::string> detector_preset_names() {
    std::vector<std::string> names;
    for (const auto& row : kPresets) names.emplace_back(row.name);
    return names;
}

}  // namespace sparsetrack

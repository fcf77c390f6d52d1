#pragma once

#include "sparsetrack/detector.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace sparsetrack {

/// Named detector configurations. The field set is O, A, B, C, D, S1, S4 and
/// MR; the simulation set is A_s, B_s and C_s. Each preset pins eps0, min_pts,
/// voxel, r_ref, the alpha on/off switch and the Layer 3 switch; everything
/// else is a repo default.
DetectorConfig detector_preset(std::string_view name);

std::vector<std::string> detector_preset_names();

}  // namespace sparsetrack

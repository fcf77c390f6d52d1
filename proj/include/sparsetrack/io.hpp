#pragma once

#include "sparsetrack/core.hpp"
#include "sparsetrack/detector.hpp"
#include "sparsetrack/metrics.hpp"
#include "sparsetrack/simulator.hpp"
#include "sparsetrack/trackman.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsetrack::io {

using nlohmann::json;

/// Malformed input; carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Records. Each stream format is JSON Lines, one record per line.
json to_json(const Scan& s);
Scan scan_from_json(const json& j);

json to_json(const GroundTruthFrame& f);
GroundTruthFrame truth_from_json(const json& j);

json to_json(const DetectionFrame& f);
DetectionFrame detections_from_json(const json& j);

json to_json(const FrameLog& f);
FrameLog framelog_from_json(const json& j);

json to_json(const DetectionReport& r);
DetectionReport detection_report_from_json(const json& j);
json to_json(const MotReport& r);
MotReport mot_report_from_json(const json& j);

// Configs. *_from_json overlays the keys present onto `base` and rejects unknown keys.
json to_json(const DetectorConfig& c);
DetectorConfig detector_config_from_json(const json& j, DetectorConfig base = {});
json to_json(const TrackerConfig& c);
TrackerConfig tracker_config_from_json(const json& j, TrackerConfig base = {});
json to_json(const Scenario& s);
Scenario scenario_from_json(const json& j, Scenario base);

/// Writes one compact JSON document per line.
template <typename T>
void write_jsonl(std::ostream& os, const std::vector<T>& records) {
    for (const auto& r : records) os << to_json(r).dump() << '\n';
}

/// Reads a JSON Lines stream; blank lines are skipped.
std::vector<json> read_jsonl(std::istream& is);

std::vector<Scan> read_scans(std::istream& is);
GroundTruth read_truth(std::istream& is);
std::vector<DetectionFrame> read_detections(std::istream& is);
std::vector<FrameLog> read_framelog(std::istream& is);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& content);
json read_json_file(const std::filesystem::path& p);

}  // namespace sparsetrack::io

#include "sparsetrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace sparsetrack {

namespace {

constexpr double kTimeTol = 1e-6;

void check_aligned(std::size_t n_frames, const GroundTruth& gt, auto time_of) {
    if (n_frames != gt.size()) {
        std::ostringstream os;
        os << "frame count mismatch: " << n_frames << " frames vs " << gt.size() << " ground-truth frames";
        throw ValidationError(os.str());
    }
    for (std::size_t k = 0; k < n_frames; ++k) {
        if (std::abs(time_of(k) - gt[k].t) > kTimeTol) {
            std::ostringstream os;
            os << "timestamp misalignment at frame " << k << ": " << time_of(k) << " vs ground truth " << gt[k].t;
            throw ValidationError(os.str());
        }
    }
}

struct Candidate {
    double d;
    std::size_t a;
    std::size_t b;
};

// Greedy nearest-first one-to-one matching; ties resolve in index order.
std::vector<std::pair<std::size_t, std::size_t>> greedy_match(std::vector<Candidate> pairs, std::vector<char>& used_a,
                                                              std::vector<char>& used_b) {
    std::stable_sort(pairs.begin(), pairs.end(), [](const Candidate& x, const Candidate& y) { return x.d < y.d; });
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& c : pairs) {
        if (used_a[c.a] || used_b[c.b]) continue;
        used_a[c.a] = used_b[c.b] = 1;
        out.emplace_back(c.a, c.b);
    }
    return out;
}

}  // namespace

DetectionReport DetectionReport::from_counts(int tp, int fp, int fn) {
    DetectionReport r;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    if (tp + fp > 0) r.precision = static_cast<double>(tp) / (tp + fp);
    if (tp + fn > 0) r.recall = static_cast<double>(tp) / (tp + fn);
    if (r.precision && r.recall && (*r.precision + *r.recall) > 0.0) {
        r.f1 = 2.0 * *r.precision * *r.recall / (*r.precision + *r.recall);
    }
    return r;
}

DetectionReport eval_detection(std::span<const DetectionFrame> detections, const GroundTruth& gt,
                               double match_radius) {
    check_aligned(detections.size(), gt, [&](std::size_t k) { return detections[k].t; });
    int tp = 0, fp = 0, fn = 0;
    int visible_frames = 0, frames_with_detection = 0;
    double sq_err = 0.0;
    for (std::size_t k = 0; k < gt.size(); ++k) {
        const auto& dets = detections[k].detections;
        std::vector<std::size_t> visible;
        for (std::size_t g = 0; g < gt[k].targets.size(); ++g) {
            if (gt[k].targets[g].visible) visible.push_back(g);
        }
        if (!visible.empty()) {
            ++visible_frames;
            if (!dets.empty()) ++frames_with_detection;
        }
        std::vector<Candidate> pairs;
        for (std::size_t d = 0; d < dets.size(); ++d) {
            for (std::size_t v = 0; v < visible.size(); ++v) {
                const double dist = distance(dets[d].position, gt[k].targets[visible[v]].position);
                if (dist <= match_radius) pairs.push_back({dist, d, v});
            }
        }
        std::vector<char> used_d(dets.size(), 0), used_v(visible.size(), 0);
        const auto matched = greedy_match(std::move(pairs), used_d, used_v);
        for (const auto& [d, v] : matched) {
            const double dist = distance(dets[d].position, gt[k].targets[visible[v]].position);
            sq_err += dist * dist;
        }
        tp += static_cast<int>(matched.size());
        fp += static_cast<int>(dets.size() - matched.size());
        fn += static_cast<int>(visible.size() - matched.size());
    }
    DetectionReport r = DetectionReport::from_counts(tp, fp, fn);
    r.visible_frames = visible_frames;
    r.frames_with_detection = frames_with_detection;
    if (tp > 0) r.rmse = std::sqrt(sq_err / tp);
    if (visible_frames > 0) r.det_pct = 100.0 * frames_with_detection / visible_frames;
    return r;
}

double mota_from_counts(int fp, int fn, int id_switches, int gt_total) {
    if (gt_total <= 0) throw ValidationError("MOTA undefined without ground-truth objects");
    return 1.0 - static_cast<double>(fp + fn + id_switches) / gt_total;
}

MotReport eval_mot(std::span<const FrameLog> log, const GroundTruth& gt, double match_radius) {
    if (gt.empty()) throw ValidationError("eval_mot: empty ground truth");
    check_aligned(log.size(), gt, [&](std::size_t k) { return log[k].t; });

    MotReport r;
    std::map<int, std::int64_t> last_match;  // ground-truth id -> track id
    double sq_err = 0.0;
    for (std::size_t k = 0; k < gt.size(); ++k) {
        const auto& targets = gt[k].targets;
        std::vector<const TrackSnapshot*> hyps;
        for (const auto& s : log[k].tracks) {
            if (s.status == TrackStatus::confirmed) hyps.push_back(&s);
        }
        std::vector<char> used_g(targets.size(), 0), used_h(hyps.size(), 0);
        std::vector<std::pair<std::size_t, std::size_t>> matches;

        for (std::size_t g = 0; g < targets.size(); ++g) {
            const auto prev = last_match.find(targets[g].id);
            if (prev == last_match.end()) continue;
            for (std::size_t h = 0; h < hyps.size(); ++h) {
                if (used_h[h] || hyps[h]->id != prev->second) continue;
                if (distance(hyps[h]->position, targets[g].position) <= match_radius) {
                    used_g[g] = used_h[h] = 1;
                    matches.emplace_back(g, h);
                }
                break;
            }
        }
        std::vector<Candidate> pairs;
        for (std::size_t g = 0; g < targets.size(); ++g) {
            if (used_g[g]) continue;
            for (std::size_t h = 0; h < hyps.size(); ++h) {
                if (used_h[h]) continue;
                const double d = distance(hyps[h]->position, targets[g].position);
                if (d <= match_radius) pairs.push_back({d, g, h});
            }
        }
        for (const auto& m : greedy_match(std::move(pairs), used_g, used_h)) matches.push_back(m);

        for (const auto& [g, h] : matches) {
            const int gid = targets[g].id;
            const auto prev = last_match.find(gid);
            if (prev != last_match.end() && prev->second != hyps[h]->id) ++r.id_switches;
            last_match[gid] = hyps[h]->id;
            const double d = distance(hyps[h]->position, targets[g].position);
            sq_err += d * d;
        }
        r.matches += static_cast<int>(matches.size());
        r.fp += static_cast<int>(hyps.size() - matches.size());
        r.fn += static_cast<int>(targets.size() - matches.size());
        r.gt_total += static_cast<int>(targets.size());
    }
    r.mota = mota_from_counts(r.fp, r.fn, r.id_switches, r.gt_total);
    if (r.matches > 0) r.rmse = std::sqrt(sq_err / r.matches);
    return r;
}

}  // namespace sparsetrack

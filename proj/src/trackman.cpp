#include "sparsetrack/trackman.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <string>

namespace sparsetrack {

std::string_view to_string(TrackStatus s) {
    switch (s) {
        case TrackStatus::tentative: return "tentative";
        case TrackStatus::confirmed: return "confirmed";
        case TrackStatus::dormant: return "dormant";
        case TrackStatus::deleted: return "deleted";
    }
    return "unknown";
}

TrackStatus track_status_from_string(std::string_view s) {
    if (s == "tentative") return TrackStatus::tentative;
    if (s == "confirmed") return TrackStatus::confirmed;
    if (s == "dormant") return TrackStatus::dormant;
    if (s == "deleted") return TrackStatus::deleted;
    throw ValidationError("unknown track status '" + std::string(s) + "'");
}

std::string_view to_string(AssociationMode m) {
    return m == AssociationMode::hungarian ? "hungarian" : "jpda";
}

AssociationMode association_mode_from_string(std::string_view s) {
    if (s == "hungarian") return AssociationMode::hungarian;
    if (s == "jpda") return AssociationMode::jpda;
    throw ValidationError("unknown association mode '" + std::string(s) + "' (expected hungarian|jpda)");
}

void TrackerConfig::validate() const {
    if (confirm_hits < 1) throw ValidationError("confirm_hits must be >= 1");
    if (max_misses_tentative < 1 || max_misses_active < 1 || max_misses_dormant < 1) {
        throw ValidationError("miss thresholds must be >= 1");
    }
    if (!(init_min_separation > 0.0) || !(resurrect_radius > 0.0)) {
        throw ValidationError("init_min_separation and resurrect_radius must be > 0");
    }
    if (!(jpda_miss_threshold >= 0.0 && jpda_miss_threshold <= 1.0)) {
        throw ValidationError("jpda_miss_threshold must lie in [0, 1]");
    }
    filter.validate();
    jpda.validate();
}

TrackStatus lifecycle_advance(Track& track, bool hit, const TrackerConfig& cfg) {
    if (track.status == TrackStatus::deleted) throw ValidationError("lifecycle_advance on a deleted track");
    if (hit) {
        ++track.hits;
        track.misses = 0;
        if (track.status == TrackStatus::dormant) {
            track.status = TrackStatus::confirmed;
            track.dormant_frames = 0;
        } else if (track.status == TrackStatus::tentative && track.hits >= cfg.confirm_hits) {
            track.status = TrackStatus::confirmed;
        }
        return track.status;
    }
    track.hits = 0;
    switch (track.status) {
        case TrackStatus::tentative:
            if (++track.misses >= cfg.max_misses_tentative) track.status = TrackStatus::deleted;
            break;
        case TrackStatus::confirmed:
            if (++track.misses >= cfg.max_misses_active) {
                track.status = TrackStatus::dormant;
                track.dormant_frames = 0;
            }
            break;
        case TrackStatus::dormant:
            if (++track.dormant_frames >= cfg.max_misses_dormant) track.status = TrackStatus::deleted;
            break;
        case TrackStatus::deleted:
            break;
    }
    return track.status;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

Track Tracker::spawn(Point3 z, double t) {
    Track trk;
    trk.id = next_id_++;
    trk.imm = imm_init(z, cfg_.filter);
    trk.hits = 1;
    trk.status = trk.hits >= cfg_.confirm_hits ? TrackStatus::confirmed : TrackStatus::tentative;
    trk.last_confident = Anchor{z, t};
    trk.created_at = t;
    return trk;
}

FrameLog Tracker::step(std::span<const Measurement> measurements, double t) {
    if (last_t_ && !(t > *last_t_)) {
        std::ostringstream os;
        os << "tracker: frame time " << t << " does not follow " << *last_t_;
        throw ValidationError(os.str());
    }
    const double dt = last_t_ ? t - *last_t_ : 0.0;
    last_t_ = t;

    FrameLog log;
    log.t = t;

    std::vector<Point3> dets;
    dets.reserve(measurements.size());
    for (const auto& m : measurements) dets.push_back(m.position);

    const std::size_t nt = tracks_.size();
    std::vector<IMMPrediction> preds;
    preds.reserve(nt);
    std::vector<GateTrack> gate_in;
    gate_in.reserve(nt);
    for (const auto& trk : tracks_) {
        preds.push_back(dt > 0.0 ? imm_predict(trk.imm, dt, cfg_.filter)
                                 : IMMPrediction{trk.imm.models, trk.imm.mu, trk.imm.fused});
        const auto& f = preds.back().fused;
        gate_in.push_back({f.position(), innovation_covariance(f, cfg_.filter.R), trk.status == TrackStatus::dormant});
    }
    const GateResult g = gate(gate_in, dets, cfg_.jpda);

    std::vector<char> claimed(dets.size(), 0);
    std::vector<char> hit(nt, 0);

    if (cfg_.association_mode == AssociationMode::hungarian) {
        std::vector<CostTrack> cost_in;
        cost_in.reserve(nt);
        for (std::size_t i = 0; i < nt; ++i) {
            CostTrack c;
            if (tracks_[i].last_confident) {
                c.anchor = tracks_[i].last_confident->position;
                c.anchor_t = tracks_[i].last_confident->t;
            }
            c.velocity = preds[i].fused.velocity();
            cost_in.push_back(c);
        }
        const auto cost = build_cost(cost_in, dets, g, cfg_.weights, t);
        const auto a = hungarian(cost);
        for (std::size_t i = 0; i < nt; ++i) {
            const int j = a.row_to_col[i];
            if (j >= 0) {
                const Point3 z = dets[static_cast<std::size_t>(j)];
                tracks_[i].imm = imm_update(preds[i], z, cfg_.filter);
                tracks_[i].last_confident = Anchor{z, t};
                claimed[static_cast<std::size_t>(j)] = 1;
                hit[i] = 1;
                log.assignments.emplace_back(tracks_[i].id, j);
            } else {
                tracks_[i].imm = imm_coast(preds[i]);
            }
        }
    } else {
        const auto r = jpda(gate_in, dets, g, cfg_.jpda);
        std::vector<double> beta(dets.size());
        for (std::size_t i = 0; i < nt; ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            int best = -1;
            double best_beta = 0.0;
            for (std::size_t j = 0; j < dets.size(); ++j) {
                beta[j] = r.assoc(row, static_cast<Eigen::Index>(j));
                if (beta[j] > best_beta) {
                    best_beta = beta[j];
                    best = static_cast<int>(j);
                }
            }
            const double beta0 = r.miss(row);
            tracks_[i].imm = best >= 0 ? imm_update_pda(preds[i], dets, beta, beta0, cfg_.filter, cfg_.jpda)
                                       : imm_coast(preds[i]);
            if (beta0 <= cfg_.jpda_miss_threshold && best >= 0) {
                hit[i] = 1;
                tracks_[i].last_confident = Anchor{dets[static_cast<std::size_t>(best)], t};
            }
            log.beta.push_back({tracks_[i].id, beta0, best, best_beta});
        }
        for (std::size_t j = 0; j < dets.size(); ++j) {
            double mass = 0.0;
            for (std::size_t i = 0; i < nt; ++i) {
                mass += r.assoc(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
            if (mass >= 0.5) claimed[j] = 1;
        }
    }

    for (std::size_t i = 0; i < nt; ++i) {
        const bool was_dormant = tracks_[i].status == TrackStatus::dormant;
        lifecycle_advance(tracks_[i], hit[i] != 0, cfg_);
        if (was_dormant && tracks_[i].status == TrackStatus::confirmed) log.resurrected.push_back(tracks_[i].id);
    }

    // Dormant tracks reclaim nearby unclaimed measurements, nearest pairs first.
    struct Pair {
        double d;
        std::size_t track;
        std::size_t det;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < nt; ++i) {
        if (tracks_[i].status != TrackStatus::dormant || !tracks_[i].last_confident) continue;
        for (std::size_t j = 0; j < dets.size(); ++j) {
            if (claimed[j]) continue;
            const double d = distance(dets[j], tracks_[i].last_confident->position);
            if (d <= cfg_.resurrect_radius) pairs.push_back({d, i, j});
        }
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.d < b.d; });
    for (const auto& p : pairs) {
        Track& trk = tracks_[p.track];
        if (claimed[p.det] || trk.status != TrackStatus::dormant) continue;
        const Point3 z = dets[p.det];
        trk.imm = imm_update(preds[p.track], z, cfg_.filter);
        trk.last_confident = Anchor{z, t};
        lifecycle_advance(trk, true, cfg_);
        claimed[p.det] = 1;
        log.resurrected.push_back(trk.id);
    }

    // Unclaimed measurements far from every live track start tentative tracks.
    std::vector<Point3> occupied;
    for (const auto& trk : tracks_) {
        if (trk.live()) occupied.push_back(trk.imm.fused.position());
    }
    for (std::size_t j = 0; j < dets.size(); ++j) {
        if (claimed[j]) continue;
        const bool clear = std::all_of(occupied.begin(), occupied.end(), [&](const Point3& p) {
            return distance(p, dets[j]) >= cfg_.init_min_separation;
        });
        if (!clear) continue;
        tracks_.push_back(spawn(dets[j], t));
        occupied.push_back(dets[j]);
        log.spawned.push_back(tracks_.back().id);
    }

    for (const auto& trk : tracks_) {
        if (trk.status == TrackStatus::deleted) log.deleted.push_back(trk.id);
    }
    std::erase_if(tracks_, [](const Track& trk) { return trk.status == TrackStatus::deleted; });

    log.tracks.reserve(tracks_.size());
    for (const auto& trk : tracks_) {
        TrackSnapshot s;
        s.id = trk.id;
        s.status = trk.status;
        s.position = trk.imm.fused.position();
        s.velocity = trk.imm.fused.velocity();
        s.mu.assign(trk.imm.mu.data(), trk.imm.mu.data() + trk.imm.mu.size());
        log.tracks.push_back(std::move(s));
    }
    return log;
}

std::vector<FrameLog> run_tracker(const TrackerConfig& cfg, std::span<const std::vector<Measurement>> frames,
                                  std::span<const double> times) {
    if (frames.size() != times.size()) throw ValidationError("run_tracker: frames and times differ in length");
    Tracker tracker(cfg);
    std::vector<FrameLog> logs;
    logs.reserve(frames.size());
    for (std::size_t k = 0; k < frames.size(); ++k) logs.push_back(tracker.step(frames[k], times[k]));
    return logs;
}

}  // namespace sparsetrack

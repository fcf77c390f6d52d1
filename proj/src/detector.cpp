#include "sparsetrack/detector.hpp"

#include "sparsetrack/soa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace sparsetrack {

void DetectorConfig::validate() const {
    std::ostringstream err;
    if (!(eps0 > 0.0)) err << "eps0 must be > 0; ";
    if (!(alpha >= 0.0)) err << "alpha must be >= 0; ";
    if (!(r_ref >= 0.0)) err << "r_ref must be >= 0; ";
    if (min_pts < 1) err << "min_pts must be >= 1; ";
    if (!(voxel > 0.0)) err << "voxel must be > 0; ";
    if (!(r_max > 0.0)) err << "r_max must be > 0; ";
    if (!(r_excl >= 0.0)) err << "r_excl must be >= 0; ";
    if (n_min < 1 || n_min > n_max) err << "need 1 <= n_min <= n_max; ";
    if (!(e_max > 0.0)) err << "e_max must be > 0; ";
    if (!(tau_min > 0.0) || !(v_max > 0.0)) err << "tau_min and v_max must be > 0; ";
    if (K < 1 || M < 1 || M > K) err << "need 1 <= M <= K; ";
    if (!(d_cons > 0.0) || !(T_cons > 0.0)) err << "d_cons and T_cons must be > 0; ";
    if (!std::isfinite(h_min)) err << "h_min must be finite; ";
    const std::string msg = err.str();
    if (!msg.empty()) throw ValidationError("invalid detector config: " + msg);
}

Cluster Cluster::from_points(std::vector<Point3> pts) {
    Cluster c;
    c.points = std::move(pts);
    if (!c.points.empty()) {
        Point3 lo = c.points.front();
        Point3 hi = lo;
        for (const auto& p : c.points) {
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
        }
        c.extents = hi - lo;
    }
    return c;
}

void TemporalHistory::push(HistoryEntry e) {
    entries_.push_back(e);
    while (entries_.size() > capacity_) entries_.pop_front();
}

std::optional<HistoryEntry> TemporalHistory::latest_nearest(Point3 p) const {
    if (entries_.empty()) return std::nullopt;
    const double newest = entries_.back().t;
    std::optional<HistoryEntry> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& e : entries_) {
        if (e.t != newest) continue;
        const double d = distance(e.position, p);
        if (d < best_d) {
            best_d = d;
            best = e;
        }
    }
    return best;
}

Scan roi_filter(const Scan& scan, const DetectorConfig& cfg) {
    Scan out;
    out.t = scan.t;
    out.pose = scan.pose;
    out.points.reserve(scan.points.size());
    for (const auto& p : scan.points) {
        if (p.z < cfg.h_min) continue;
        if (p.norm() > cfg.r_max) continue;
        if (std::sqrt(p.x * p.x + p.y * p.y) <= cfg.r_excl) continue;
        out.points.push_back(p);
    }
    return out;
}

namespace {

struct VoxelKey {
    long long ix, iy, iz;
    bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
    std::size_t operator()(const VoxelKey& k) const noexcept {
        std::size_t h = static_cast<std::size_t>(k.ix) * 0x9E3779B97F4A7C15ull;
        h ^= static_cast<std::size_t>(k.iy) + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
        h ^= static_cast<std::size_t>(k.iz) + 0x94D049BB133111EBull + (h << 6) + (h >> 2);
        return h;
    }
};

}  // namespace

std::vector<Point3> voxel_downsample(std::span<const Point3> points, double voxel) {
    if (!(voxel > 0.0)) throw ValidationError("voxel edge must be > 0");
    const std::size_t n = points.size();
    if (n == 0) return {};

    const kernels::PointsSoA soa(points);
    std::vector<double> cx(n), cy(n), cz(n);
    kernels::active().voxel_coords(soa.view(), voxel, cx.data(), cy.data(), cz.data());

    struct Acc {
        double sx = 0, sy = 0, sz = 0;
        int count = 0;
    };
    std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> index;
    std::vector<Acc> acc;
    for (std::size_t i = 0; i < n; ++i) {
        const VoxelKey key{static_cast<long long>(cx[i]), static_cast<long long>(cy[i]),
                           static_cast<long long>(cz[i])};
        auto [it, inserted] = index.try_emplace(key, acc.size());
        if (inserted) acc.emplace_back();
        Acc& a = acc[it->second];
        a.sx += points[i].x;
        a.sy += points[i].y;
        a.sz += points[i].z;
        ++a.count;
    }
    std::vector<Point3> out;
    out.reserve(acc.size());
    for (const auto& a : acc) {
        const double c = static_cast<double>(a.count);
        out.emplace_back(a.sx / c, a.sy / c, a.sz / c);
    }
    return out;
}

double adaptive_epsilon(double range, const DetectorConfig& cfg) {
    return cfg.eps0 + cfg.alpha * std::max(range - cfg.r_ref, 0.0);
}

std::vector<int> dbscan_labels(std::span<const Point3> points, double eps, int min_pts) {
    if (!(eps > 0.0)) throw ValidationError("dbscan: eps must be > 0");
    if (min_pts < 1) throw ValidationError("dbscan: min_pts must be >= 1");
    const std::size_t n = points.size();
    std::vector<int> labels(n, -1);
    if (n == 0) return labels;

    const kernels::PointsSoA soa(points);
    const auto& k = kernels::active();
    const double eps2 = eps * eps;

    std::vector<std::vector<std::size_t>> neighbors(n);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        k.squared_distances(soa.view(), points[i].x, points[i].y, points[i].z, d2.data());
        for (std::size_t j = 0; j < n; ++j) {
            if (d2[j] <= eps2) neighbors[i].push_back(j);
        }
    }
    std::vector<char> core(n);
    for (std::size_t i = 0; i < n; ++i) {
        core[i] = neighbors[i].size() >= static_cast<std::size_t>(min_pts);
    }

    // Cores expand in input order; a border point keeps the first cluster
    // that reaches it.
    int next_label = 0;
    std::vector<std::size_t> frontier;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (!core[seed] || labels[seed] != -1) continue;
        const int label = next_label++;
        labels[seed] = label;
        frontier.assign(1, seed);
        while (!frontier.empty()) {
            const std::size_t p = frontier.back();
            frontier.pop_back();
            for (std::size_t q : neighbors[p]) {
                if (labels[q] != -1) continue;
                labels[q] = label;
                if (core[q]) frontier.push_back(q);
            }
        }
    }
    return labels;
}

std::vector<Cluster> dbscan(std::span<const Point3> points, double eps, int min_pts) {
    const auto labels = dbscan_labels(points, eps, min_pts);
    int n_clusters = 0;
    for (int l : labels) n_clusters = std::max(n_clusters, l + 1);
    std::vector<std::vector<Point3>> groups(static_cast<std::size_t>(n_clusters));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= 0) groups[static_cast<std::size_t>(labels[i])].push_back(points[i]);
    }
    std::vector<Cluster> out;
    out.reserve(groups.size());
    for (auto& g : groups) out.push_back(Cluster::from_points(std::move(g)));
    return out;
}

bool validate_geometric(const Cluster& c, const DetectorConfig& cfg) {
    const int n = c.count();
    if (n < cfg.n_min || n > cfg.n_max) return false;
    const double widest = std::max({c.extents.x, c.extents.y, c.extents.z});
    return widest < cfg.e_max;
}

bool validate_jump(Point3 z_now, std::optional<Point3> z_prev, double dt, const DetectorConfig& cfg) {
    if (!z_prev) return true;
    return distance(z_now, *z_prev) <= std::max(cfg.tau_min, cfg.v_max * dt);
}

bool validate_temporal(Point3 z, double t, const TemporalHistory& hist, const DetectorConfig& cfg) {
    if (hist.size() < static_cast<std::size_t>(cfg.M)) return false;
    int consistent = 0;
    const auto& e = hist.entries();
    const std::size_t window = std::min<std::size_t>(e.size(), static_cast<std::size_t>(cfg.K));
    for (std::size_t i = e.size() - window; i < e.size(); ++i) {
        if (distance(z, e[i].position) < cfg.d_cons && (t - e[i].t) < cfg.T_cons) ++consistent;
    }
    return consistent >= cfg.M;
}

namespace {

double median(std::vector<double> v) {
    const std::size_t n = v.size();
    std::sort(v.begin(), v.end());
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Point3 estimate_centroid(const Cluster& c) {
    const std::size_t n = c.points.size();
    if (n == 0) throw ValidationError("estimate_centroid of an empty cluster");
    if (n >= 3) {
        std::vector<double> xs, ys, zs;
        xs.reserve(n);
        ys.reserve(n);
        zs.reserve(n);
        for (const auto& p : c.points) {
            xs.push_back(p.x);
            ys.push_back(p.y);
            zs.push_back(p.z);
        }
        return {median(std::move(xs)), median(std::move(ys)), median(std::move(zs))};
    }
    Point3 sum;
    for (const auto& p : c.points) sum = sum + p;
    return (1.0 / static_cast<double>(n)) * sum;
}

std::vector<Measurement> detect(const Scan& scan, const DetectorConfig& cfg, TemporalHistory& state) {
    const Scan roi = roi_filter(scan, cfg);
    const auto points = voxel_downsample(roi.points, cfg.voxel);
    if (points.empty()) return {};

    const double eps = adaptive_epsilon(mean_range(points), cfg);
    const auto clusters = dbscan(points, eps, cfg.min_pts);

    struct Candidate {
        Point3 global;
        int support;
    };
    std::vector<Candidate> survivors;
    for (const auto& c : clusters) {
        if (cfg.layer1_enabled && !validate_geometric(c, cfg)) continue;
        const Point3 z = to_global(estimate_centroid(c), scan.pose);
        if (cfg.layer2_enabled) {
            const auto prev = state.latest_nearest(z);
            std::optional<Point3> prev_pos;
            double dt = 0.0;
            if (prev && scan.t > prev->t) {
                prev_pos = prev->position;
                dt = scan.t - prev->t;
            }
            if (!validate_jump(z, prev_pos, dt, cfg)) continue;
        }
        survivors.push_back({z, c.count()});
    }

    // Layer 3 is judged against the history as it stood before this scan.
    std::vector<Measurement> out;
    for (const auto& s : survivors) {
        if (cfg.layer3_enabled && !validate_temporal(s.global, scan.t, state, cfg)) continue;
        out.push_back({scan.t, s.global, s.support});
    }
    for (const auto& s : survivors) state.push({s.global, scan.t});
    return out;
}

Detector::Detector(DetectorConfig cfg) : cfg_(cfg), history_(static_cast<std::size_t>(cfg.K)) {
    cfg_.validate();
}

std::vector<Measurement> Detector::process(const Scan& scan) {
    if (last_t_ && !(scan.t > *last_t_)) {
        std::ostringstream os;
        os << "scan timestamps must increase strictly (" << scan.t << " after " << *last_t_ << ")";
        throw ValidationError(os.str());
    }
    last_t_ = scan.t;
    return detect(scan, cfg_, history_);
}

}  // namespace sparsetrack

#include "sparsetrack/association.hpp"

#include "sparsetrack/soa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace sparsetrack {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void JpdaParams::validate() const {
    if (!(Pd > 0.0 && Pd <= 1.0)) throw ValidationError("Pd must lie in (0, 1]");
    if (!(lambda_c > 0.0)) throw ValidationError("lambda_c must be > 0");
    if (!(gamma > 0.0)) throw ValidationError("gamma must be > 0");
    if (!(dormant_gate_factor > 1.0)) throw ValidationError("dormant_gate_factor must be > 1");
    if (max_events == 0) throw ValidationError("max_events must be positive");
}

GateResult gate(std::span<const GateTrack> tracks, std::span<const Point3> detections, const JpdaParams& params) {
    const auto nt = static_cast<Eigen::Index>(tracks.size());
    const auto nd = static_cast<Eigen::Index>(detections.size());
    GateResult g;
    g.d2 = Eigen::MatrixXd::Constant(nt, nd, std::numeric_limits<double>::infinity());
    g.feasible = BoolMatrix::Constant(nt, nd, false);
    if (nt == 0 || nd == 0) return g;

    const kernels::PointsSoA soa(detections);
    std::vector<double> row(detections.size());
    for (Eigen::Index i = 0; i < nt; ++i) {
        const auto& trk = tracks[static_cast<std::size_t>(i)];
        Eigen::LLT<Mat3> llt(trk.S);
        if (llt.info() != Eigen::Success || !trk.S.allFinite()) {
            std::ostringstream os;
            os << "track row " << i << ": innovation covariance is singular or not positive definite";
            g.diagnostics.push_back(os.str());
            continue;
        }
        Mat3 inv = llt.solve(Mat3::Identity());
        inv = 0.5 * (inv + inv.transpose()).eval();
        const kernels::Sym3 a{inv(0, 0), inv(0, 1), inv(0, 2), inv(1, 1), inv(1, 2), inv(2, 2)};
        kernels::active().mahalanobis(soa.view(), trk.predicted.x, trk.predicted.y, trk.predicted.z, a, row.data());
        const double limit = trk.dormant ? params.dormant_gate_factor * params.gamma : params.gamma;
        for (Eigen::Index j = 0; j < nd; ++j) {
            const double d2 = std::max(row[static_cast<std::size_t>(j)], 0.0);
            g.d2(i, j) = d2;
            g.feasible(i, j) = std::isfinite(d2) && d2 <= limit;
        }
    }
    return g;
}

Eigen::MatrixXd build_cost(std::span<const CostTrack> tracks, std::span<const Point3> detections,
                           const GateResult& gate, const CostWeights& weights, double t) {
    const auto nt = static_cast<Eigen::Index>(tracks.size());
    const auto nd = static_cast<Eigen::Index>(detections.size());
    Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(nt, nd, kInfeasibleCost);
    for (Eigen::Index i = 0; i < nt; ++i) {
        const auto& trk = tracks[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < nd; ++j) {
            if (!gate.feasible(i, j)) continue;
            const Point3 z = detections[static_cast<std::size_t>(j)];
            double c = weights.mahalanobis * gate.d2(i, j);
            if (trk.anchor) {
                c += weights.anchor * distance(z, *trk.anchor);
                if (t > trk.anchor_t) {
                    const Point3 implied = (1.0 / (t - trk.anchor_t)) * (z - *trk.anchor);
                    c += weights.velocity * distance(implied, trk.velocity);
                }
            }
            cost(i, j) = std::min(c, 0.5 * kInfeasibleCost);
        }
    }
    return cost;
}

namespace {

// Shortest augmenting path with potentials; requires rows <= cols.
// Returns the column assigned to each row.
std::vector<int> solve_assignment(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    const int m = static_cast<int>(a.cols());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    std::vector<char> used(m + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= m; ++j) {
        if (p[j] != 0) row_to_col[static_cast<std::size_t>(p[j] - 1)] = j - 1;
    }
    return row_to_col;
}

}  // namespace

Assignment hungarian(const Eigen::MatrixXd& cost) {
    if (!cost.allFinite()) throw ValidationError("hungarian: cost matrix must be finite");
    const auto nr = cost.rows();
    const auto nc = cost.cols();
    Assignment out;
    out.row_to_col.assign(static_cast<std::size_t>(nr), -1);
    if (nr > 0 && nc > 0) {
        if (nr <= nc) {
            out.row_to_col = solve_assignment(cost);
        } else {
            const auto col_to_row = solve_assignment(cost.transpose());
            for (std::size_t j = 0; j < col_to_row.size(); ++j) {
                if (col_to_row[j] >= 0) out.row_to_col[static_cast<std::size_t>(col_to_row[j])] = static_cast<int>(j);
            }
        }
    }
    std::vector<char> col_used(static_cast<std::size_t>(nc), 0);
    for (Eigen::Index i = 0; i < nr; ++i) {
        int& j = out.row_to_col[static_cast<std::size_t>(i)];
        if (j >= 0 && cost(i, j) >= kInfeasibleCost) j = -1;
        if (j >= 0) {
            out.total_cost += cost(i, j);
            col_used[static_cast<std::size_t>(j)] = 1;
        } else {
            out.unassigned_rows.push_back(static_cast<int>(i));
        }
    }
    for (Eigen::Index j = 0; j < nc; ++j) {
        if (!col_used[static_cast<std::size_t>(j)]) out.unassigned_cols.push_back(static_cast<int>(j));
    }
    return out;
}

namespace {

// Joint-event enumeration over one connected component of the gate graph.
class EventEnumerator {
public:
    EventEnumerator(std::vector<int> tracks, std::vector<int> dets, const GateResult& gate,
                    const Eigen::MatrixXd& loglik, const JpdaParams& params)
        : tracks_(std::move(tracks)), dets_(std::move(dets)), params_(params) {
        // Candidate tracks per detection, as local track indices.
        options_.resize(dets_.size());
        for (std::size_t d = 0; d < dets_.size(); ++d) {
            for (std::size_t k = 0; k < tracks_.size(); ++k) {
                if (gate.feasible(tracks_[k], dets_[d])) {
                    options_[d].push_back({k, std::log(params.Pd) + loglik(tracks_[k], dets_[d])});
                }
            }
        }
        log_clutter_ = std::log(params.lambda_c);
        log_miss_ = params.Pd < 1.0 ? std::log1p(-params.Pd) : kNegInf;
        track_used_.assign(tracks_.size(), -1);
    }

    // First pass: count events and find the largest log weight.
    void scan(std::size_t& events_total) {
        max_logw_ = kNegInf;
        mode_ = Mode::scan;
        events_total_ = &events_total;
        recurse(0, 0.0, 0);
    }

    // Second pass: accumulate normalized marginals into beta.
    void accumulate(Eigen::MatrixXd& beta) {
        mode_ = Mode::accumulate;
        assoc_.assign(tracks_.size(), std::vector<double>(dets_.size(), 0.0));
        total_ = 0.0;
        recurse(0, 0.0, 0);
        for (std::size_t k = 0; k < tracks_.size(); ++k) {
            double assigned = 0.0;
            for (std::size_t d = 0; d < dets_.size(); ++d) {
                const double b = total_ > 0.0 ? assoc_[k][d] / total_ : 0.0;
                beta(tracks_[k], dets_[d] + 1) = b;
                assigned += b;
            }
            beta(tracks_[k], 0) = std::max(0.0, 1.0 - assigned);
        }
    }

private:
    enum class Mode { scan, accumulate };

    void recurse(std::size_t d, double logw, std::size_t n_assigned) {
        if (d == dets_.size()) {
            const double w = logw + static_cast<double>(tracks_.size() - n_assigned) * log_miss_;
            leaf(tracks_.size() == n_assigned ? logw : w);
            return;
        }
        recurse(d + 1, logw + log_clutter_, n_assigned);
        for (const auto& [k, lw] : options_[d]) {
            if (track_used_[k] >= 0) continue;
            track_used_[k] = static_cast<int>(d);
            recurse(d + 1, logw + lw, n_assigned + 1);
            track_used_[k] = -1;
        }
    }

    void leaf(double logw) {
        if (mode_ == Mode::scan) {
            if (++*events_total_ > params_.max_events) {
                std::ostringstream os;
                os << "JPDA enumeration exceeded " << params_.max_events
                   << " joint events; tighten the gate (lower gamma) or reduce clutter";
                throw CombinatorialError(os.str());
            }
            max_logw_ = std::max(max_logw_, logw);
            return;
        }
        if (!std::isfinite(max_logw_)) return;
        const double w = std::exp(logw - max_logw_);
        total_ += w;
        if (w == 0.0) return;
        for (std::size_t k = 0; k < tracks_.size(); ++k) {
            if (track_used_[k] >= 0) assoc_[k][static_cast<std::size_t>(track_used_[k])] += w;
        }
    }

    struct Option {
        std::size_t track;
        double logw;
    };

    std::vector<int> tracks_;
    std::vector<int> dets_;
    const JpdaParams& params_;
    std::vector<std::vector<Option>> options_;
    std::vector<int> track_used_;  // detection index per local track, -1 if missed
    double log_clutter_ = 0.0;
    double log_miss_ = 0.0;
    Mode mode_ = Mode::scan;
    double max_logw_ = kNegInf;
    std::size_t* events_total_ = nullptr;
    std::vector<std::vector<double>> assoc_;
    double total_ = 0.0;
};

}  // namespace

JpdaResult jpda(const GateResult& gate, const Eigen::MatrixXd& log_likelihood, const JpdaParams& params) {
    params.validate();
    const auto nt = gate.tracks();
    const auto nd = gate.detections();
    JpdaResult r;
    r.beta = Eigen::MatrixXd::Zero(nt, nd + 1);
    r.beta.col(0).setOnes();

    // Connected components of the bipartite gate graph; events factorize over them.
    std::vector<int> track_comp(static_cast<std::size_t>(nt), -1);
    std::vector<int> det_comp(static_cast<std::size_t>(nd), -1);
    int n_comp = 0;
    for (Eigen::Index seed = 0; seed < nt; ++seed) {
        if (track_comp[static_cast<std::size_t>(seed)] >= 0) continue;
        if (!gate.feasible.row(seed).any()) continue;
        const int c = n_comp++;
        std::vector<std::pair<bool, Eigen::Index>> stack{{true, seed}};
        track_comp[static_cast<std::size_t>(seed)] = c;
        while (!stack.empty()) {
            const auto [is_track, idx] = stack.back();
            stack.pop_back();
            if (is_track) {
                for (Eigen::Index j = 0; j < nd; ++j) {
                    if (gate.feasible(idx, j) && det_comp[static_cast<std::size_t>(j)] < 0) {
                        det_comp[static_cast<std::size_t>(j)] = c;
                        stack.push_back({false, j});
                    }
                }
            } else {
                for (Eigen::Index i = 0; i < nt; ++i) {
                    if (gate.feasible(i, idx) && track_comp[static_cast<std::size_t>(i)] < 0) {
                        track_comp[static_cast<std::size_t>(i)] = c;
                        stack.push_back({true, i});
                    }
                }
            }
        }
    }

    for (int c = 0; c < n_comp; ++c) {
        std::vector<int> tr, de;
        for (Eigen::Index i = 0; i < nt; ++i) {
            if (track_comp[static_cast<std::size_t>(i)] == c) tr.push_back(static_cast<int>(i));
        }
        for (Eigen::Index j = 0; j < nd; ++j) {
            if (det_comp[static_cast<std::size_t>(j)] == c) de.push_back(static_cast<int>(j));
        }
        EventEnumerator e(std::move(tr), std::move(de), gate, log_likelihood, params);
        std::size_t events = 0;
        e.scan(events);
        r.events += events;
        e.accumulate(r.beta);
    }
    return r;
}

JpdaResult jpda(std::span<const GateTrack> tracks, std::span<const Point3> detections, const GateResult& g,
                const JpdaParams& params) {
    const auto nt = g.tracks();
    const auto nd = g.detections();
    Eigen::MatrixXd loglik = Eigen::MatrixXd::Constant(nt, nd, kNegInf);
    for (Eigen::Index i = 0; i < nt; ++i) {
        for (Eigen::Index j = 0; j < nd; ++j) {
            if (!g.feasible(i, j)) continue;
            const auto& trk = tracks[static_cast<std::size_t>(i)];
            const Vec3 y = (detections[static_cast<std::size_t>(j)] - trk.predicted).vec();
            loglik(i, j) = log_gaussian(y, trk.S);
        }
    }
    return jpda(g, loglik, params);
}

KState jpda_update(const KState& predicted, std::span<const Point3> detections, std::span<const double> beta,
                   double beta0, const Mat3& R) {
    if (beta.size() != detections.size()) throw ValidationError("jpda_update: beta/detection size mismatch");
    Mat3 S = innovation_covariance(predicted, R);
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::LLT<Mat3> llt(S);
    if (llt.info() != Eigen::Success) throw NumericError("jpda_update: innovation covariance not positive definite");
    const Eigen::Matrix<double, 6, 3> K = llt.solve(predicted.P.topRows<3>()).transpose();

    const Vec3 zhat = predicted.x.head<3>();
    Vec3 nu = Vec3::Zero();
    Mat3 spread = Mat3::Zero();
    for (std::size_t j = 0; j < detections.size(); ++j) {
        if (beta[j] == 0.0) continue;
        const Vec3 nj = detections[j].vec() - zhat;
        nu += beta[j] * nj;
        spread += beta[j] * (nj * nj.transpose());
    }
    spread -= nu * nu.transpose();

    Mat6 IKH = Mat6::Identity();
    IKH.leftCols<3>() -= K;
    const Mat6 P_upd = IKH * predicted.P * IKH.transpose() + K * R * K.transpose();

    KState out;
    out.x = predicted.x + K * nu;
    out.P = beta0 * predicted.P + (1.0 - beta0) * P_upd + K * spread * K.transpose();
    enforce_covariance(out.P);
    return out;
}

IMMState imm_update_pda(const IMMPrediction& pred, std::span<const Point3> detections, std::span<const double> beta,
                        double beta0, const FilterConfig& cfg, const JpdaParams& params) {
    IMMState out;
    std::vector<double> loglik;
    out.models.reserve(pred.models.size());
    const double log_clutter_miss = params.Pd < 1.0 ? std::log1p(-params.Pd) + std::log(params.lambda_c) : kNegInf;
    for (const auto& m : pred.models) {
        out.models.push_back(jpda_update(m, detections, beta, beta0, cfg.R));
        Mat3 S = innovation_covariance(m, cfg.R);
        S = 0.5 * (S + S.transpose()).eval();
        double top = log_clutter_miss;
        std::vector<double> terms{log_clutter_miss};
        for (std::size_t j = 0; j < detections.size(); ++j) {
            if (beta[j] == 0.0) continue;
            const double t = std::log(params.Pd) + log_gaussian((detections[j].vec() - m.x.head<3>()), S);
            terms.push_back(t);
            top = std::max(top, t);
        }
        double sum = 0.0;
        for (double t : terms) sum += std::exp(t - top);
        loglik.push_back(top + std::log(sum));
    }
    out.mu = imm_reweight(pred.mu_pred, loglik);
    out.fused = imm_fuse(out.models, out.mu);
    return out;
}

}  // namespace sparsetrack

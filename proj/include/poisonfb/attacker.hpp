#pragma once

// Construction of the forged feedback row h_a. The attacker sees the honest
// legitimate CSI and picks h_a (||h_a||^2 >= beta) to hurt the legitimate
// receivers under whichever objective the transmitter optimizes.

#include "poisonfb/model.hpp"
#include "poisonfb/numerics/hermitian.hpp"
#include "poisonfb/transmitter.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace poisonfb::attacker {

enum class Strategy { honest, power_drain, orthogonal_starvation, maxmin_poison };

inline std::string_view to_string(Strategy s)
{
    switch (s) {
    case Strategy::honest: return "honest";
    case Strategy::power_drain: return "power_drain";
    case Strategy::orthogonal_starvation: return "orthogonal_starvation";
    case Strategy::maxmin_poison: return "maxmin_poison";
    }
    return "unknown";
}

inline std::optional<Strategy> parse_strategy(std::string_view name)
{
    for (Strategy s : {Strategy::honest, Strategy::power_drain, Strategy::orthogonal_starvation,
                       Strategy::maxmin_poison})
        if (to_string(s) == name)
            return s;
    return std::nullopt;
}

/// Default gain on beta for the orthogonal-starvation row.
inline constexpr double default_amplification = 2.7;

struct AttackConfig {
    Strategy strategy = Strategy::honest;
    /// beta; unset means N_t, the mean squared norm of an honest CN(0,1) row.
    std::optional<double> norm_floor;
    double amplification = default_amplification;
    /// Unset picks the per-strategy default (50 for power_drain, 30 for maxmin_poison).
    std::optional<int> outer_max_iters;
    int line_search_steps = 4;
    double step_scale = 0.5;
    double stop_tol = 1e-3;
    int n_starts = 8;
    /// maxmin_poison: how many of the ranked starts get the local descent.
    int n_refine = 3;
    /// Randomization draws for each inner power-min solve of the search.
    int inner_draws = 200;

    [[nodiscard]] double beta(std::size_t n_tx) const { return norm_floor.value_or(static_cast<double>(n_tx)); }

    [[nodiscard]] int max_iters() const
    {
        return outer_max_iters.value_or(strategy == Strategy::maxmin_poison ? 30 : 50);
    }

    void validate() const
    {
        if (norm_floor && !(*norm_floor > 0.0))
            throw std::invalid_argument("AttackConfig: beta must be positive");
        if (!(amplification >= 1.0))
            throw std::invalid_argument("AttackConfig: amplification must be >= 1");
        if (outer_max_iters && *outer_max_iters < 1)
            throw std::invalid_argument("AttackConfig: outer_max_iters must be >= 1");
        if (line_search_steps < 1 || !(step_scale > 0.0))
            throw std::invalid_argument("AttackConfig: invalid line search schedule");
        if (!(stop_tol > 0.0))
            throw std::invalid_argument("AttackConfig: stop_tol must be positive");
        if (n_starts < 1 || n_refine < 1 || inner_draws < 1)
            throw std::invalid_argument("AttackConfig: n_starts, n_refine and inner_draws must be >= 1");
    }
};

struct AttackResult {
    ChannelVector reported_channel;
    /// Required power (power_drain), legitimate leakage sum_k |<h_a,h_k>|^2
    /// (orthogonal_starvation) or the predicted legitimate min SNR (maxmin_poison).
    double attacker_objective = 0.0;
    int iterations = 0;
    /// Best-so-far objective after each outer iteration.
    std::vector<double> trace;
    bool converged = true;
    /// power_drain only: every candidate pushed the transmitter over its budget.
    bool all_infeasible = false;
    std::string diagnostic;
};

namespace detail {

inline CVector project_floor(CVector v, double beta)
{
    const double n2 = v.squaredNorm();
    if (n2 == 0.0) {
        v = CVector::Zero(v.size());
        v(0) = std::sqrt(beta);
    } else if (n2 < beta) {
        v *= std::sqrt(beta / n2);
    }
    return v;
}

inline CVector to_sphere(const CVector& v, double beta) { return v * std::sqrt(beta / v.squaredNorm()); }

// Unit direction of v with the radial (a) and global-phase (i a) components
// removed; neither changes any SNR on the beta-sphere. nullopt if nothing is left.
inline std::optional<CVector> tangent(const CVector& a, CVector v)
{
    const double a2 = a.squaredNorm();
    v -= (a.dot(v).real() / a2) * a;
    const CVector ia = a * Complex(0.0, 1.0);
    v -= (ia.dot(v).real() / a2) * ia;
    const double nv = v.norm();
    if (!(nv > 1e-12 * std::sqrt(a2)))
        return std::nullopt;
    return CVector(v / nv);
}

// Unit vector orthogonal to every row (Gram-Schmidt of e_1, e_2, ... against
// the row span); nullopt when the rows span the whole space.
inline std::optional<CVector> null_direction(const ChannelMatrix& h)
{
    const auto n = static_cast<Eigen::Index>(h.n_tx());
    std::vector<CVector> basis;
    for (const auto& r : h.rows()) {
        CVector v = r.entries();
        for (const auto& q : basis)
            v -= q.dot(v) * q;
        for (const auto& q : basis)
            v -= q.dot(v) * q;
        const double nv = v.norm();
        if (nv > 1e-10 * std::max(1.0, r.entries().norm()))
            basis.push_back(v / nv);
    }
    for (Eigen::Index axis = 0; axis < n; ++axis) {
        CVector v = CVector::Zero(n);
        v(axis) = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis)
                v -= q.dot(v) * q;
        const double nv = v.norm();
        if (nv > 1e-6)
            return CVector(v / nv);
    }
    return std::nullopt;
}

inline double leakage(const ChannelMatrix& h_legit, const CVector& a)
{
    double s = 0.0;
    for (const auto& r : h_legit.rows())
        s += std::norm(r.entries().dot(a));
    return s;
}

} // namespace detail

/// Average-SNR attack: a row of squared norm amplification * beta along the
/// direction the legitimate users leak least into (exactly orthogonal when
/// K~ < N_t), so the transmitter's principal eigenvector turns toward it.
inline AttackResult attack_orthogonal_starvation(const ChannelMatrix& h_legit, double beta,
                                                 double amplification = default_amplification)
{
    if (!(beta > 0.0) || !(amplification >= 1.0))
        throw std::invalid_argument("attack_orthogonal_starvation: invalid beta or amplification");
    CVector dir;
    if (auto d = detail::null_direction(h_legit)) {
        dir = *d;
    } else {
        const CMatrix hd = h_legit.dense();
        const CMatrix m = hd.transpose() * hd.conjugate();
        dir = numerics::least_eigenvector(numerics::HermitianMatrix(m)).vector;
    }
    numerics::canonicalize_phase(dir);
    const CVector a = dir * std::sqrt(amplification * beta);
    AttackResult out{ChannelVector(a)};
    out.attacker_objective = detail::leakage(h_legit, a);
    out.trace.push_back(out.attacker_objective);
    return out;
}

inline AttackResult attack_orthogonal_starvation(const ChannelMatrix& h_legit, const AttackConfig& cfg)
{
    cfg.validate();
    return attack_orthogonal_starvation(h_legit, cfg.beta(h_legit.n_tx()), cfg.amplification);
}

/// Power-minimization attack. Multi-start over the beta-sphere (the
/// orthogonal direction plus random directions), then coordinate-wise line
/// search over Re/Im of h_a, each candidate scored by the transmitter's
/// actual power-min response. Candidates that keep the transmitter within
/// its budget outrank those that push it into outage.
inline AttackResult attack_power_drain(const ChannelMatrix& h_legit, double gamma, double noise, double power,
                                       const AttackConfig& cfg, const RandomStream& rng)
{
    cfg.validate();
    const auto n = static_cast<Eigen::Index>(h_legit.n_tx());
    const double beta = cfg.beta(h_legit.n_tx());
    const RandomStream inner = rng.child(0xD0);

    struct Score {
        bool feasible = false;
        double power = -1.0;
        [[nodiscard]] bool beats(const Score& o) const
        {
            if (feasible != o.feasible)
                return feasible;
            return power > o.power;
        }
    };
    auto evaluate = [&](const CVector& a) {
        const auto sol = transmitter::solve_power_min(h_legit.with_adversary(ChannelVector(a)), gamma, noise, power,
                                                      {cfg.inner_draws, inner, {}});
        Score s;
        s.feasible = sol.feasible;
        s.power = std::isfinite(sol.required_power) ? sol.required_power : -1.0;
        return s;
    };

    std::vector<CVector> starts;
    if (auto d = detail::null_direction(h_legit))
        starts.push_back(*d);
    for (int i = 0; static_cast<int>(starts.size()) < cfg.n_starts; ++i) {
        RandomStream s = rng.child(static_cast<std::uint64_t>(i) + 1);
        CVector v(n);
        for (Eigen::Index j = 0; j < n; ++j)
            v(j) = s.complex_normal();
        starts.push_back(v);
    }

    CVector best;
    Score best_score;
    for (auto& v : starts) {
        v = detail::to_sphere(v, beta);
        const Score s = evaluate(v);
        if (best.size() == 0 || s.beats(best_score)) {
            best = v;
            best_score = s;
        }
    }

    AttackResult out{ChannelVector(best)};
    out.trace.push_back(best_score.power);
    out.converged = false;
    const double radius = std::sqrt(beta);
    int it = 0;
    for (; it < cfg.max_iters(); ++it) {
        const double before = best_score.power;
        const bool was_feasible = best_score.feasible;
        for (Eigen::Index c = 0; c < 2 * n; ++c) {
            bool moved = false;
            double step = cfg.step_scale * radius;
            for (int k = 0; k < cfg.line_search_steps && !moved; ++k, step *= 0.5) {
                for (double sign : {1.0, -1.0}) {
                    CVector cand = best;
                    if (c < n)
                        cand(c) += sign * step;
                    else
                        cand(c - n) += Complex(0.0, sign * step);
                    if (cand.squaredNorm() == 0.0)
                        continue;
                    cand = detail::to_sphere(cand, beta);
                    const Score s = evaluate(cand);
                    if (s.beats(best_score)) {
                        best = cand;
                        best_score = s;
                        moved = true;
                        break;
                    }
                }
            }
        }
        out.trace.push_back(best_score.power);
        if (best_score.feasible == was_feasible && best_score.power - before <= cfg.stop_tol * std::abs(before)) {
            ++it;
            out.converged = true;
            break;
        }
    }
    out.iterations = it;
    out.reported_channel = ChannelVector(best);
    out.attacker_objective = best_score.power;
    if (!best_score.feasible) {
        out.all_infeasible = true;
        out.diagnostic = "every candidate exceeds the transmit power budget";
    }
    return out;
}

/// Max-min attack. Alternates between the transmitter's response u to the
/// current reported row and a backtracking step of h_a along the negative
/// central-difference gradient of the resulting legitimate min SNR. The
/// response is the iterative solver started from the relaxation solution,
/// so the attacker predicts the transmitter's global answer rather than a
/// local one; the gradient probes warm start from that u. Starts (one row
/// orthogonal to each legitimate user, then n_starts random rows) are ranked
/// and the best n_refine of them are refined. The trace is best-so-far over
/// all refinements.
inline AttackResult attack_maxmin_poison(const ChannelMatrix& h_legit, double power, double noise,
                                         const AttackConfig& cfg, const RandomStream& rng)
{
    cfg.validate();
    const auto n = static_cast<Eigen::Index>(h_legit.n_tx());
    const double beta = cfg.beta(h_legit.n_tx());
    constexpr int inner_iters = 300;
    constexpr double inner_tol = 1e-10;
    const RandomStream inner = rng.child(0xA0);

    auto legit_value = [&](const Beamformer& u) { return min_snr(h_legit, u, noise); };
    // Full response: relaxation, randomization, iterative refinement.
    auto respond = [&](const CVector& a) {
        return transmitter::solve_max_min_sdr(h_legit.with_adversary(ChannelVector(a)), power, noise,
                                              {cfg.inner_draws, inner, {}})
            .beamformer;
    };
    // Local response near u0, used for gradient probes.
    auto probe = [&](const CVector& a, const CVector& u0) {
        return legit_value(transmitter::solve_max_min_iterative(h_legit.with_adversary(ChannelVector(a)), power,
                                                                noise, Beamformer(u0), inner_iters, inner_tol)
                               .beamformer);
    };

    struct Point {
        CVector a;
        Beamformer u;
        double f = 0.0;
    };
    // Candidate first rows. A row orthogonal to a legitimate h_k makes
    // every beam toward the attacker useless to user k, so each user gets
    // one such start (also made blind to the honest beamformer u0, h_a u0 = 0,
    // when N_t > 2 leaves room). Half of the random starts are blind to u0.
    const CVector u0 = transmitter::solve_max_min_sdr(h_legit, power, noise, {cfg.inner_draws, inner, {}})
                           .beamformer.weights();
    const CVector blind = u0.conjugate() / std::max(u0.norm(), std::numeric_limits<double>::min());
    std::vector<Point> starts;
    auto add_start = [&](CVector cand) {
        if (!(cand.norm() > 1e-9))
            return;
        cand = detail::to_sphere(cand, beta);
        const Beamformer uc = respond(cand);
        starts.push_back({cand, uc, legit_value(uc)});
    };
    for (std::size_t k = 0; k < h_legit.size(); ++k) {
        RandomStream s = rng.child(0x5000 + k);
        CVector cand(n);
        for (Eigen::Index j = 0; j < n; ++j)
            cand(j) = s.complex_normal();
        const CVector hk = h_legit.row(k).entries().normalized();
        if (n > 2)
            cand -= blind.dot(cand) * blind;
        cand -= hk.dot(cand) * hk;
        add_start(cand);
    }
    for (int i = 0; i < cfg.n_starts; ++i) {
        RandomStream s = rng.child(static_cast<std::uint64_t>(i) + 1);
        CVector cand(n);
        for (Eigen::Index j = 0; j < n; ++j)
            cand(j) = s.complex_normal();
        if (i % 2 == 0 && n > 1)
            cand -= blind.dot(cand) * blind;
        add_start(cand);
    }
    std::stable_sort(starts.begin(), starts.end(), [](const Point& x, const Point& y) { return x.f < y.f; });

    AttackResult out{ChannelVector(starts.front().a)};
    double best = starts.front().f;
    CVector best_a = starts.front().a;
    out.trace.push_back(best);
    out.converged = true;

    const int refine = std::min(cfg.n_refine, static_cast<int>(starts.size()));
    for (int r = 0; r < refine; ++r) {
        Point p = starts[static_cast<std::size_t>(r)];

        // Tries p.a + step * dir for each step in `steps`; returns the
        // relative improvement of the first success or -1.
        auto line_search = [&](const CVector& dir, const std::vector<double>& steps) {
            for (double step : steps) {
                const CVector cand = detail::to_sphere(p.a + step * dir, beta);
                // Cheap local screen first; the full response decides.
                if (!(probe(cand, p.u.weights()) < p.f))
                    continue;
                const Beamformer uc = respond(cand);
                const double fc = legit_value(uc);
                if (fc < p.f) {
                    const double rel = (p.f - fc) / std::max(p.f, std::numeric_limits<double>::min());
                    p = {cand, uc, fc};
                    return rel;
                }
            }
            return -1.0;
        };
        std::vector<double> schedule;
        for (int k = 0; k < cfg.line_search_steps; ++k)
            schedule.push_back(cfg.step_scale * std::sqrt(beta) * std::pow(0.5, k));

        bool done = false;
        for (int it = 0; it < cfg.max_iters() && !done; ++it) {
            ++out.iterations;
            const double h_step = 1e-4 * p.a.norm();
            Eigen::VectorXd grad(2 * n);
            for (Eigen::Index c = 0; c < 2 * n; ++c) {
                const Complex e = c < n ? Complex(h_step, 0.0) : Complex(0.0, h_step);
                const Eigen::Index idx = c < n ? c : c - n;
                CVector ap = p.a;
                CVector am = p.a;
                ap(idx) += e;
                am(idx) -= e;
                grad(c) = (probe(ap, p.u.weights()) - probe(am, p.u.weights())) / (2.0 * h_step);
            }
            double rel = -1.0;
            CVector gdir(n);
            gdir.real() = -grad.head(n);
            gdir.imag() = -grad.tail(n);
            if (const auto dir = detail::tangent(p.a, gdir))
                rel = line_search(*dir, schedule);
            // The objective is nonsmooth where the binding users change and
            // the gradient can mislead there; poll the coordinate directions
            // on a shrinking mesh below the finest step before giving up.
            for (int level = 0; level < cfg.line_search_steps && rel < 0.0; ++level) {
                const std::vector<double> mesh{schedule.back() * std::pow(0.5, level)};
                for (Eigen::Index c = 0; c < 2 * n && rel < 0.0; ++c)
                    for (double sign : {1.0, -1.0}) {
                        CVector e = CVector::Zero(n);
                        e(c < n ? c : c - n) = c < n ? Complex(sign, 0.0) : Complex(0.0, sign);
                        if (const auto dir = detail::tangent(p.a, e))
                            rel = line_search(*dir, mesh);
                        if (rel >= 0.0)
                            break;
                    }
            }
            if (p.f < best) {
                best = p.f;
                best_a = p.a;
            }
            out.trace.push_back(best);
            done = rel < cfg.stop_tol;
        }
        out.converged = out.converged && done;
    }
    out.reported_channel = ChannelVector(best_a);
    out.attacker_objective = best;
    return out;
}

/// Parameters of the transmitter the attacker is targeting.
struct TargetSystem {
    double gamma = 0.0;
    double power = 0.0;
    double noise = 1.0;
};

/// Dispatches on cfg.strategy. Returns nullopt for the honest strategy (no
/// forged row is reported).
inline std::optional<AttackResult> forge(const ChannelMatrix& h_legit, const TargetSystem& sys,
                                         const AttackConfig& cfg, const RandomStream& rng)
{
    switch (cfg.strategy) {
    case Strategy::honest: return std::nullopt;
    case Strategy::power_drain: return attack_power_drain(h_legit, sys.gamma, sys.noise, sys.power, cfg, rng);
    case Strategy::orthogonal_starvation: return attack_orthogonal_starvation(h_legit, cfg);
    case Strategy::maxmin_poison: return attack_maxmin_poison(h_legit, sys.power, sys.noise, cfg, rng);
    }
    return std::nullopt;
}

} // namespace poisonfb::attacker

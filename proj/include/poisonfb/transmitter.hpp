#pragma once

// Transmit beamformer design for one multicast group. All solvers consume
// the full reported CSI, including any poisoned row; the transmitter cannot
// tell which row is forged.

#include "poisonfb/model.hpp"
#include "poisonfb/numerics/hermitian.hpp"
#include "poisonfb/numerics/randomize.hpp"
#include "poisonfb/numerics/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace poisonfb::transmitter {

struct SolverOptions {
    /// Gaussian randomization draws after each relaxed solve.
    int n_draws = 1000;
    RandomStream stream{};
    numerics::SdpOptions sdp{};
};

/// Objective 1: minimum power meeting SNR >= gamma at every reported receiver.
struct QosSolution {
    /// Capped to the budget P when the instance is infeasible.
    Beamformer beamformer;
    /// ||u||^2 needed to meet every target (uncapped).
    double required_power = std::numeric_limits<double>::infinity();
    bool feasible = false;
    /// Randomized power over the SDP lower bound (>= 1).
    double sdr_gap = std::numeric_limits<double>::quiet_NaN();
    double sdp_bound = std::numeric_limits<double>::quiet_NaN();
    numerics::SdpStatus sdp_status = numerics::SdpStatus::max_iterations;
    std::string diagnostic;
};

/// Objective 3: max-min SNR under the power budget.
struct MaxMinSolution {
    Beamformer beamformer;
    double min_snr = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Relaxation upper bound on min_snr (SDR solver only).
    double sdp_bound = std::numeric_limits<double>::quiet_NaN();
    /// min SNR after each accepted update (iterative solver only).
    std::vector<double> trace;
};

namespace detail {

inline numerics::SdpProblem qos_problem(const ChannelMatrix& h, const NoisePowers& noise, double target)
{
    const auto n = static_cast<Eigen::Index>(h.n_tx());
    numerics::SdpProblem p{numerics::HermitianMatrix::identity(n), {}, numerics::OptimizationSense::minimize};
    for (std::size_t k = 0; k < h.size(); ++k)
        p.constraints.push_back({numerics::HermitianMatrix(h.row(k).gram()),
                                 numerics::ConstraintSense::greater_equal, target * noise.at(k)});
    return p;
}

inline std::vector<double> snr_of(const ChannelMatrix& h, const CVector& u, const NoisePowers& noise)
{
    std::vector<double> s(h.size());
    for (std::size_t k = 0; k < h.size(); ++k)
        s[k] = std::norm(h.row(k).gain(u)) / noise.at(k);
    return s;
}

inline double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

// Min-norm point of the convex hull of the columns of `g` (Wolfe's
// algorithm; finite termination, exact up to rounding).
inline Eigen::VectorXd min_norm_hull(const Eigen::MatrixXd& g)
{
    const Eigen::Index m = g.cols();
    const Eigen::MatrixXd q = g.transpose() * g;
    const double scale = std::max(q.diagonal().maxCoeff(), std::numeric_limits<double>::min());
    const double eps = 1e-12 * scale;

    Eigen::Index j0 = 0;
    q.diagonal().minCoeff(&j0);
    std::vector<Eigen::Index> set{j0};
    std::vector<double> lambda{1.0};
    auto point = [&] {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(g.rows());
        for (std::size_t i = 0; i < set.size(); ++i)
            x += lambda[i] * g.col(set[i]);
        return x;
    };
    Eigen::VectorXd x = point();

    for (int major = 0; major < 4 * m + 10; ++major) {
        const Eigen::VectorXd gx = g.transpose() * x;
        Eigen::Index j = 0;
        gx.minCoeff(&j);
        if (x.squaredNorm() - gx(j) <= eps || std::find(set.begin(), set.end(), j) != set.end())
            break;
        set.push_back(j);
        lambda.push_back(0.0);

        for (int minor = 0; minor < 4 * m + 10; ++minor) {
            // Affine min-norm point over the current set: [Q 1; 1' 0][mu; t] = [0; 1].
            const auto s = static_cast<Eigen::Index>(set.size());
            Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(s + 1, s + 1);
            for (Eigen::Index a = 0; a < s; ++a) {
                for (Eigen::Index b = 0; b < s; ++b)
                    kkt(a, b) = q(set[static_cast<std::size_t>(a)], set[static_cast<std::size_t>(b)]);
                kkt(a, s) = 1.0;
                kkt(s, a) = 1.0;
            }
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
            rhs(s) = 1.0;
            const Eigen::VectorXd mu = kkt.completeOrthogonalDecomposition().solve(rhs).head(s);
            if (mu.minCoeff() > 1e-14) {
                for (Eigen::Index a = 0; a < s; ++a)
                    lambda[static_cast<std::size_t>(a)] = mu(a);
                break;
            }
            double theta = 1.0;
            for (Eigen::Index a = 0; a < s; ++a) {
                const double la = lambda[static_cast<std::size_t>(a)];
                if (mu(a) <= 1e-14 && la - mu(a) > 0.0)
                    theta = std::min(theta, la / (la - mu(a)));
            }
            std::vector<Eigen::Index> keep_set;
            std::vector<double> keep_lambda;
            for (Eigen::Index a = 0; a < s; ++a) {
                const double la = lambda[static_cast<std::size_t>(a)];
                const double v = la + theta * (mu(a) - la);
                if (v > 1e-14) {
                    keep_set.push_back(set[static_cast<std::size_t>(a)]);
                    keep_lambda.push_back(v);
                }
            }
            if (keep_set.empty())
                break;
            const double total = std::accumulate(keep_lambda.begin(), keep_lambda.end(), 0.0);
            for (double& v : keep_lambda)
                v /= total;
            set = std::move(keep_set);
            lambda = std::move(keep_lambda);
        }
        const Eigen::VectorXd next = point();
        if (next.squaredNorm() >= x.squaredNorm() - eps * 1e-3 && major > 0) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

} // namespace detail

/// min tr(U) s.t. tr(U G_k) >= gamma sigma_k^2, U psd, followed by Gaussian
/// randomization. `feasible` is false when the SDP fails or the randomized
/// power exceeds the cap.
inline QosSolution solve_power_min(const ChannelMatrix& h, double gamma, const NoisePowers& noise,
                                   double power_cap, const SolverOptions& opt = {})
{
    if (!(gamma > 0.0) || !(power_cap > 0.0))
        throw std::invalid_argument("solve_power_min: gamma and P must be positive");
    QosSolution out;
    out.beamformer = Beamformer(CVector::Zero(static_cast<Eigen::Index>(h.n_tx())));

    const auto sol = numerics::sdp_solve(detail::qos_problem(h, noise, gamma), opt.sdp);
    out.sdp_status = sol.status;
    if (sol.status != numerics::SdpStatus::optimal) {
        out.diagnostic = "sdp " + std::string(numerics::to_string(sol.status));
        return out;
    }
    out.sdp_bound = sol.objective;

    numerics::RankOneProblem rp;
    rp.rescale = [&](const CVector& c) -> std::optional<CVector> {
        double scale2 = 0.0;
        for (std::size_t k = 0; k < h.size(); ++k) {
            const double g = std::norm(h.row(k).gain(c));
            if (g == 0.0)
                return std::nullopt;
            scale2 = std::max(scale2, gamma * noise.at(k) / g);
        }
        return CVector(c * std::sqrt(scale2));
    };
    rp.feasible = [&](const CVector& c) {
        for (double s : detail::snr_of(h, c, noise))
            if (s < gamma * (1.0 - 1e-12))
                return false;
        return true;
    };
    rp.cost = [](const CVector& c) { return c.squaredNorm(); };

    const auto r = numerics::randomize_rank1(sol.solution, rp, out.sdp_bound, {opt.n_draws, opt.stream});
    if (r.status != numerics::RandomizationStatus::found) {
        out.diagnostic = "randomization found no feasible candidate";
        return out;
    }
    out.required_power = r.cost;
    out.sdr_gap = r.bound_ratio;
    if (r.cost <= power_cap * (1.0 + 1e-9)) {
        out.feasible = true;
        out.beamformer = Beamformer(r.vector);
    } else {
        out.diagnostic = "required power exceeds the budget";
        out.beamformer = Beamformer(r.vector * std::sqrt(power_cap / r.cost));
    }
    return out;
}

/// sqrt(P) times the principal eigenvector of sum_k h_k^H h_k / sigma_k^2,
/// which maximizes the sum (hence the average) of the reported SNRs.
inline Beamformer solve_max_avg_snr(const ChannelMatrix& h, double power, const NoisePowers& noise = 1.0)
{
    if (!(power > 0.0))
        throw std::invalid_argument("solve_max_avg_snr: P must be positive");
    const auto top = numerics::principal_eigenvector(numerics::HermitianMatrix(h.gram(noise)));
    return Beamformer(top.vector * std::sqrt(power));
}

inline MaxMinSolution solve_max_min_iterative(const ChannelMatrix& h, double power, const NoisePowers& noise,
                                              const Beamformer& u_init, int max_iters, double tol);

/// Max-min SNR by semidefinite relaxation. The epigraph problem
/// max t s.t. tr(U G_k) >= t sigma_k^2, tr(U) <= P is solved through its
/// scaled QoS form min tr(U) s.t. tr(U G_k) >= sigma_k^2, whose solution
/// scaled to trace P is optimal with t* = P / tr(U*). The best randomized
/// candidate is then refined by the local ascent below, which matters when
/// U* has rank above one.
inline MaxMinSolution solve_max_min_sdr(const ChannelMatrix& h, double power, const NoisePowers& noise = 1.0,
                                        const SolverOptions& opt = {})
{
    if (!(power > 0.0))
        throw std::invalid_argument("solve_max_min_sdr: P must be positive");
    MaxMinSolution out;
    const auto sol = numerics::sdp_solve(detail::qos_problem(h, noise, 1.0), opt.sdp);
    out.iterations = sol.iterations;
    if (sol.status != numerics::SdpStatus::optimal || !(sol.objective > 0.0)) {
        out.beamformer = solve_max_avg_snr(h, power, noise);
        out.min_snr = min_snr(h, out.beamformer, noise);
        return out;
    }
    out.sdp_bound = power / sol.objective;
    const numerics::HermitianMatrix scaled(sol.solution.matrix() * (power / sol.objective));

    numerics::RankOneProblem rp;
    rp.rescale = [&](const CVector& c) -> std::optional<CVector> { return CVector(c * std::sqrt(power) / c.norm()); };
    rp.feasible = [&](const CVector& c) { return c.squaredNorm() <= power * (1.0 + 1e-9); };
    rp.cost = [&](const CVector& c) { return -detail::min_of(detail::snr_of(h, c, noise)); };

    const auto r = numerics::randomize_rank1(scaled, rp, -out.sdp_bound, {opt.n_draws, opt.stream});
    const auto polished = solve_max_min_iterative(h, power, noise, Beamformer(r.vector), 500, 1e-12);
    if (polished.min_snr > -r.cost) {
        out.beamformer = polished.beamformer;
        out.min_snr = polished.min_snr;
    } else {
        out.beamformer = Beamformer(r.vector);
        out.min_snr = -r.cost;
    }
    out.converged = true;
    return out;
}

/// Iterative SNR-increasing max-min update. Each iteration moves u along the
/// steepest common ascent direction of the near-active users (min-norm point
/// of their projected gradients), on the sphere ||u||^2 = P, and is accepted
/// only if the minimum SNR strictly increases.
inline MaxMinSolution solve_max_min_iterative(const ChannelMatrix& h, double power, const NoisePowers& noise,
                                              const Beamformer& u_init, int max_iters = 200, double tol = 1e-6)
{
    if (!(power > 0.0))
        throw std::invalid_argument("solve_max_min_iterative: P must be positive");
    if (u_init.n_tx() != h.n_tx())
        throw std::invalid_argument("solve_max_min_iterative: dimension mismatch");
    if (u_init.power() > power * (1.0 + 1e-9))
        throw std::invalid_argument("solve_max_min_iterative: u_init exceeds the power budget");

    constexpr double active_band = 0.05;
    const auto n = static_cast<Eigen::Index>(h.n_tx());

    MaxMinSolution out;
    CVector u = u_init.weights();
    if (u.norm() == 0.0) {
        out.beamformer = u_init;
        out.min_snr = 0.0;
        out.converged = true;
        out.trace.push_back(0.0);
        return out;
    }
    u *= std::sqrt(power) / u.norm();
    std::vector<double> s = detail::snr_of(h, u, noise);
    double f = detail::min_of(s);
    out.trace.push_back(f);

    double step = 0.5;
    bool stopped = false;
    int it = 0;
    for (; it < max_iters; ++it) {
        // Shrink the active band when the wide band stalls: near-active users
        // that sit slightly above the minimum can cancel the ascent direction.
        bool accepted = false;
        CVector cand;
        std::vector<double> cs;
        double fc = f;
        std::vector<Eigen::Index> tried;
        for (double band = active_band; !accepted; band *= 0.1) {
            if (band < 1e-9)
                band = 0.0;
            std::vector<Eigen::Index> active;
            for (std::size_t k = 0; k < s.size(); ++k)
                if (s[k] <= f * (1.0 + band))
                    active.push_back(static_cast<Eigen::Index>(k));
            if (active == tried) {
                if (band == 0.0)
                    break;
                continue;
            }
            tried = active;
            Eigen::MatrixXd grads(2 * n, static_cast<Eigen::Index>(active.size()));
            const Complex unorm2 = u.squaredNorm();
            for (std::size_t j = 0; j < active.size(); ++j) {
                const auto& row = h.row(static_cast<std::size_t>(active[j]));
                CVector g = row.entries().conjugate() * (row.gain(u) / noise.at(static_cast<std::size_t>(active[j])));
                g -= (u.dot(g) / unorm2) * u;
                grads.col(static_cast<Eigen::Index>(j)) << g.real(), g.imag();
            }
            const Eigen::VectorXd dr = detail::min_norm_hull(grads);
            CVector d(n);
            d.real() = dr.head(n);
            d.imag() = dr.tail(n);
            const double dn = d.norm();
            if (dn > 1e-14 * std::max(1.0, f)) {
                double trial = step;
                while (trial > 1e-10) {
                    cand = u + (trial * u.norm() / dn) * d;
                    cand *= std::sqrt(power) / cand.norm();
                    cs = detail::snr_of(h, cand, noise);
                    fc = detail::min_of(cs);
                    if (fc > f) {
                        accepted = true;
                        step = trial;
                        break;
                    }
                    trial *= 0.5;
                }
            }
            if (band == 0.0)
                break;
        }
        if (!accepted) {
            stopped = true;
            break;
        }
        const double rel = (fc - f) / std::max(f, std::numeric_limits<double>::min());
        u = cand;
        s = cs;
        f = fc;
        out.trace.push_back(f);
        step = std::min(2.0 * step, 1.0);
        if (rel < tol) {
            ++it;
            stopped = true;
            break;
        }
    }
    out.beamformer = Beamformer(u);
    out.min_snr = f;
    out.iterations = it;
    out.converged = stopped;
    return out;
}

/// Objective 4 (max-min rate); a monotone transform of objective 3.
inline double min_rate_objective(const ChannelMatrix& h_legit, const Beamformer& u, const NoisePowers& noise = 1.0)
{
    return min_rate(h_legit, u, noise);
}

} // namespace poisonfb::transmitter

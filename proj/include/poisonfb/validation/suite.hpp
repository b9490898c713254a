#pragma once

// Numerics self-check run by `poisonfb validate` and the acceptance binary:
// eigen solver against residuals and the 2x2 characteristic roots, the SDP
// solver against the Cholesky grid and closed forms, and randomization
// feasibility.

#include "poisonfb/numerics/hermitian.hpp"
#include "poisonfb/numerics/randomize.hpp"
#include "poisonfb/numerics/sdp.hpp"
#include "poisonfb/validation/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace poisonfb::validation {

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SuiteOptions {
    /// Multiplies every tolerance. 0 makes every inexact check fail (test hook).
    double tolerance_scale = 1.0;
    int sdp_instances = 20;
    double grid_step = 0.02;
};

namespace detail {

inline std::string printf_string(const char* fmt, double a, double b = 0.0)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, fmt, a, b);
    return buf;
}

inline CVector random_vector(RandomStream& s, Eigen::Index n)
{
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = s.complex_normal();
    return v;
}

inline numerics::HermitianMatrix gram_of(const CVector& h) { return numerics::HermitianMatrix(ChannelVector(h).gram()); }

inline numerics::RankOneProblem qos_hooks(std::vector<CVector> rows, double gamma)
{
    numerics::RankOneProblem rp;
    rp.rescale = [rows, gamma](const CVector& c) -> std::optional<CVector> {
        double s2 = 0.0;
        for (const auto& h : rows) {
            const double g = oracles::gain2(h, c);
            if (g == 0.0)
                return std::nullopt;
            s2 = std::max(s2, gamma / g);
        }
        return CVector(c * std::sqrt(s2));
    };
    rp.feasible = [rows, gamma](const CVector& c) {
        for (const auto& h : rows)
            if (oracles::gain2(h, c) < gamma * (1.0 - 1e-12))
                return false;
        return true;
    };
    rp.cost = [](const CVector& c) { return c.squaredNorm(); };
    return rp;
}

} // namespace detail

/// 100 random PSD matrices of dimension 1..8: ||A v - lambda v|| <= 1e-10 lambda.
/// 100 random 2x2 Hermitian matrices: top eigenvalue equals the quadratic root to 1e-10.
inline std::vector<Check> eigen_checks(const SuiteOptions& opt = {})
{
    std::vector<Check> out;
    RandomStream s(0xE16E);
    double worst = 0.0;
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 1 + trial % 8;
        CMatrix a = CMatrix::Zero(n, n);
        for (int r = 0; r < 1 + trial % 5; ++r) {
            const CVector v = detail::random_vector(s, n);
            a += v * v.adjoint();
        }
        const auto e = numerics::principal_eigenvector(numerics::HermitianMatrix(a));
        const double ratio = (a * e.vector - e.value * e.vector).norm() / e.value;
        worst = std::max(worst, ratio);
        ok = ok && ratio <= 1e-10 * opt.tolerance_scale;
    }
    out.push_back({"eigen residual, 100 PSD matrices up to 8x8", ok,
                   detail::printf_string("max |Av - lv| / l = %.3e", worst)});

    worst = 0.0;
    ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        const double a = 3.0 * s.normal();
        const double d = 3.0 * s.normal();
        const Complex b = 2.0 * s.complex_normal();
        CMatrix m(2, 2);
        m << a, b, std::conj(b), d;
        const double got = numerics::principal_eigenvector(numerics::HermitianMatrix(m)).value;
        const double want = oracles::eigenvalues_2x2(a, b, d).second;
        const double err = std::abs(got - want) / std::max(1.0, std::abs(want));
        worst = std::max(worst, err);
        ok = ok && err <= 1e-10 * opt.tolerance_scale;
    }
    out.push_back({"eigen 2x2 vs quadratic root, 100 matrices", ok,
                   detail::printf_string("max relative error %.3e", worst)});
    return out;
}

/// Seeded N_t = 2 two-user QoS instances against the Cholesky grid (1%),
/// then the closed forms: one rank-one constraint, an infeasible instance
/// and the rank-one fixed point of randomization.
inline std::vector<Check> sdp_checks(const SuiteOptions& opt = {})
{
    using namespace numerics;
    std::vector<Check> out;
    RandomStream s(0x5D9);
    for (int i = 0; i < opt.sdp_instances; ++i) {
        const CVector h1 = detail::random_vector(s, 2);
        const CVector h2 = detail::random_vector(s, 2);
        const double g1 = 1.0 + s.uniform();
        const double g2 = 1.0 + 2.0 * s.uniform();
        const SdpProblem p{HermitianMatrix::identity(2),
                           {{detail::gram_of(h1), ConstraintSense::greater_equal, g1},
                            {detail::gram_of(h2), ConstraintSense::greater_equal, g2}}};
        const auto sol = sdp_solve(p);
        const double oracle = oracles::cholesky_grid_qos({h1, h2}, {g1, g2}, opt.grid_step);
        const bool ok = sol.status == SdpStatus::optimal &&
                        std::abs(sol.objective - oracle) <= 0.01 * opt.tolerance_scale * oracle;
        out.push_back({"sdp vs grid oracle, instance " + std::to_string(i + 1), ok,
                       detail::printf_string("sdp %.6f oracle %.6f", sol.objective, oracle)});
    }

    {
        CVector h(2);
        h << Complex(1.0, 0.5), Complex(-0.25, 1.0);
        const double gamma = 3.0;
        const auto sol = sdp_solve({HermitianMatrix::identity(2), {{detail::gram_of(h), ConstraintSense::greater_equal, gamma}}});
        const double want = gamma / h.squaredNorm();
        out.push_back({"closed form: single rank-one constraint", sol.status == SdpStatus::optimal &&
                           std::abs(sol.objective - want) <= 1e-6 * opt.tolerance_scale * want,
                       detail::printf_string("sdp %.9f closed form %.9f", sol.objective, want)});
    }
    {
        const SdpProblem p{HermitianMatrix::identity(2),
                           {{HermitianMatrix(CMatrix::Zero(2, 2)), ConstraintSense::greater_equal, 1.0}}};
        const auto st = sdp_solve(p).status;
        out.push_back({"closed form: infeasible instance", st == SdpStatus::infeasible,
                       "status " + std::string(to_string(st))});
    }
    {
        CVector v(3);
        v << 1.0, Complex(0.5, -0.5), 0.25;
        const CVector h = v.conjugate();
        const double gamma = std::norm((h.transpose() * v)(0));
        const auto r = randomize_rank1(HermitianMatrix::outer(v), detail::qos_hooks({h}, gamma), v.squaredNorm(),
                                       {1000, RandomStream(1)});
        const double dev = r.status == RandomizationStatus::found
                               ? (r.vector * r.vector.adjoint() - v * v.adjoint()).norm() / (v * v.adjoint()).norm()
                               : std::numeric_limits<double>::infinity();
        out.push_back({"closed form: rank-one fixed point", dev <= 1e-6 * opt.tolerance_scale,
                       detail::printf_string("relative deviation %.3e", dev)});
    }
    return out;
}

/// Randomized rank-one points are feasible and never beat the relaxation.
inline std::vector<Check> randomization_checks(const SuiteOptions& opt = {})
{
    using namespace numerics;
    RandomStream s(0x7A2D);
    bool ok = true;
    double worst = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<CVector> rows;
        SdpProblem p{HermitianMatrix::identity(3), {}};
        for (int k = 0; k < 6; ++k) {
            rows.push_back(detail::random_vector(s, 3));
            p.constraints.push_back({detail::gram_of(rows.back()), ConstraintSense::greater_equal, 2.0});
        }
        const auto sol = sdp_solve(p);
        const auto hooks = detail::qos_hooks(rows, 2.0);
        const auto r = randomize_rank1(sol.solution, hooks, sol.objective, {1000, s.child(trial)});
        const bool found = sol.status == SdpStatus::optimal && r.status == RandomizationStatus::found;
        ok = ok && found && hooks.feasible(r.vector) && r.bound_ratio >= 1.0 - 1e-6 * opt.tolerance_scale;
        if (found)
            worst = std::min(worst, r.bound_ratio);
    }
    return {{"randomization feasibility, 10 instances N_t=3 K=6", ok,
             detail::printf_string("min randomized / relaxed power %.6f", worst)}};
}

inline std::vector<Check> run_all(const SuiteOptions& opt = {})
{
    std::vector<Check> all = eigen_checks(opt);
    for (auto& c : sdp_checks(opt))
        all.push_back(std::move(c));
    for (auto& c : randomization_checks(opt))
        all.push_back(std::move(c));
    return all;
}

} // namespace poisonfb::validation

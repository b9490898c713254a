#pragma once

// Small dense semidefinite programs over Hermitian matrices:
//
//     min / max  tr(C U)
//     s.t.       tr(A_i U)  {>=, <=, =}  b_i,   U >= 0
//
// Hermitian data is embedded as real symmetric matrices of twice the size
// via [[Re, -Im], [Im, Re]], inequalities get nonnegative slacks, and the
// resulting standard-form problem is solved by an infeasible-start
// primal-dual interior point method (HKM search direction with Mehrotra
// predictor-corrector steps).

#include "poisonfb/numerics/hermitian.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace poisonfb::numerics {

enum class ConstraintSense { greater_equal, less_equal, equal };
enum class OptimizationSense { minimize, maximize };
enum class SdpStatus { optimal, infeasible, unbounded, max_iterations };

inline std::string_view to_string(SdpStatus s)
{
    switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::unbounded: return "unbounded";
    case SdpStatus::max_iterations: return "max_iterations";
    }
    return "unknown";
}

struct SdpConstraint {
    HermitianMatrix matrix;
    ConstraintSense sense = ConstraintSense::greater_equal;
    double bound = 0.0;
};

struct SdpProblem {
    HermitianMatrix objective;
    std::vector<SdpConstraint> constraints;
    OptimizationSense sense = OptimizationSense::minimize;

    [[nodiscard]] Eigen::Index dim() const noexcept { return objective.dim(); }

    void validate() const
    {
        if (dim() < 1)
            throw std::invalid_argument("SdpProblem: empty objective matrix");
        if (constraints.empty())
            throw std::invalid_argument("SdpProblem: at least one constraint required");
        for (const auto& c : constraints) {
            if (c.matrix.dim() != dim())
                throw std::invalid_argument("SdpProblem: constraint dimension mismatch");
            if (!std::isfinite(c.bound))
                throw std::invalid_argument("SdpProblem: non-finite bound");
        }
    }
};

struct SdpSolution {
    SdpStatus status = SdpStatus::max_iterations;
    HermitianMatrix solution;
    /// tr(C U) at the returned point, in the caller's units.
    double objective = 0.0;
    /// Constraint violations of the normalized problem (each row divided by
    /// its Frobenius norm and by the common right-hand-side scale).
    std::vector<double> residuals;
    int iterations = 0;
};

struct SdpOptions {
    int max_iterations = 100;
    double tolerance = 1e-9;
    /// Fallback acceptance when the iteration cap or a stall is hit.
    double acceptable_tolerance = 1e-6;
    double divergence_threshold = 1e8;
    double step_fraction = 0.95;
};

namespace detail {

using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Half-scaled real embedding: <embed(A), embed(U)> = tr(A U).
inline RMatrix embed(const CMatrix& a)
{
    const Eigen::Index n = a.rows();
    RMatrix out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = a.real();
    out.bottomRightCorner(n, n) = a.real();
    out.topRightCorner(n, n) = -a.imag();
    out.bottomLeftCorner(n, n) = a.imag();
    return out * 0.5;
}

inline CMatrix unembed(const RMatrix& x)
{
    const Eigen::Index n = x.rows() / 2;
    const RMatrix re = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
    const RMatrix im = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
    CMatrix u(n, n);
    u.real() = re;
    u.imag() = im;
    return u;
}

inline double dot(const RMatrix& a, const RMatrix& b) { return a.cwiseProduct(b).sum(); }

// Largest alpha with X + alpha dX still positive definite.
inline double max_step_psd(const RMatrix& x, const RMatrix& dx)
{
    Eigen::LLT<RMatrix> llt(x);
    if (llt.info() != Eigen::Success)
        return 0.0;
    const RMatrix linv_dx = llt.matrixL().solve(dx);
    const RMatrix w = llt.matrixL().solve(linv_dx.transpose());
    Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (w + w.transpose()), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

inline double max_step_lp(const RVector& x, const RVector& dx)
{
    double alpha = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (dx(i) < 0.0)
            alpha = std::min(alpha, -x(i) / dx(i));
    return alpha;
}

// Standard form: min <C, X> s.t. <A_i, X> + slack_coef_i * x[slack_i] = b_i,
// X psd, x >= 0.
struct StandardForm {
    RMatrix c;
    std::vector<RMatrix> a;
    std::vector<int> slack;       // -1 when the row is an equality
    std::vector<double> slack_coef;
    RVector b;
    Eigen::Index n_lp = 0;
};

struct IpmResult {
    SdpStatus status = SdpStatus::max_iterations;
    RMatrix x;
    RVector x_lp;
    int iterations = 0;
};

inline IpmResult interior_point(const StandardForm& sf, const SdpOptions& opt)
{
    const Eigen::Index n = sf.c.rows();
    const Eigen::Index nl = sf.n_lp;
    const Eigen::Index m = sf.b.size();
    const double cnorm = sf.c.norm();
    const double bnorm = sf.b.norm();

    double xi = std::max({10.0, std::sqrt(static_cast<double>(n)), static_cast<double>(n)});
    for (Eigen::Index i = 0; i < m; ++i)
        xi = std::max(xi, static_cast<double>(n) * (1.0 + std::abs(sf.b(i))) / (1.0 + sf.a[static_cast<std::size_t>(i)].norm()));
    const double eta = std::max({10.0, std::sqrt(static_cast<double>(n)), cnorm});

    RMatrix X = xi * RMatrix::Identity(n, n);
    RMatrix Z = eta * RMatrix::Identity(n, n);
    RVector x = RVector::Constant(nl, xi);
    RVector z = RVector::Constant(nl, eta);
    RVector y = RVector::Zero(m);

    auto apply_a = [&](const RMatrix& mat, const RVector& lp) {
        RVector out(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            out(i) = dot(sf.a[ui], mat);
            if (sf.slack[ui] >= 0)
                out(i) += sf.slack_coef[ui] * lp(sf.slack[ui]);
        }
        return out;
    };
    auto apply_at = [&](const RVector& v, RMatrix& mat, RVector& lp) {
        mat.setZero(n, n);
        lp.setZero(nl);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            mat += v(i) * sf.a[ui];
            if (sf.slack[ui] >= 0)
                lp(sf.slack[ui]) += sf.slack_coef[ui] * v(i);
        }
    };

    IpmResult res;
    const double total = static_cast<double>(n + nl);
    double best_merit = std::numeric_limits<double>::infinity();
    RMatrix best_x = X;
    RVector best_xlp = x;

    for (int iter = 0; iter <= opt.max_iterations; ++iter) {
        res.iterations = iter;
        const RVector rp = sf.b - apply_a(X, x);
        RMatrix aty;
        RVector aty_lp;
        apply_at(y, aty, aty_lp);
        const RMatrix Rd = sf.c - Z - aty;
        const RVector rd = -z - aty_lp;

        const double pobj = dot(sf.c, X);
        const double dobj = sf.b.dot(y);
        const double compl_gap = dot(X, Z) + x.dot(z);
        const double mu = compl_gap / total;
        const double pinf = rp.norm() / (1.0 + bnorm);
        const double dinf = std::sqrt(Rd.squaredNorm() + rd.squaredNorm()) / (1.0 + cnorm);
        const double relgap = std::max(std::abs(pobj - dobj), compl_gap) / (1.0 + std::abs(pobj) + std::abs(dobj));

        const double merit = std::max({pinf, dinf, relgap});
        if (merit < best_merit) {
            best_merit = merit;
            best_x = X;
            best_xlp = x;
        }
        if (pinf < opt.tolerance && dinf < opt.tolerance && relgap < opt.tolerance) {
            res.status = SdpStatus::optimal;
            break;
        }
        if (dobj > opt.divergence_threshold && dinf * (1.0 + cnorm) < 1e-6 * dobj) {
            res.status = SdpStatus::infeasible;
            return res;
        }
        if (-pobj > opt.divergence_threshold && pinf * (1.0 + bnorm) < 1e-6 * -pobj) {
            res.status = SdpStatus::unbounded;
            return res;
        }
        if (iter == opt.max_iterations)
            break;

        Eigen::LLT<RMatrix> zllt(Z);
        if (zllt.info() != Eigen::Success)
            break;
        const RMatrix Zinv = zllt.solve(RMatrix::Identity(n, n));
        const RVector zinv_lp = z.cwiseInverse();

        // Schur complement M_ij = tr(A_i X A_j Z^-1) + sum_l a_il a_jl x_l / z_l.
        RMatrix M(m, m);
        std::vector<RMatrix> xaz(static_cast<std::size_t>(m));
        for (Eigen::Index j = 0; j < m; ++j)
            xaz[static_cast<std::size_t>(j)] = X * sf.a[static_cast<std::size_t>(j)] * Zinv;
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = i; j < m; ++j) {
                double v = dot(sf.a[static_cast<std::size_t>(i)], xaz[static_cast<std::size_t>(j)]);
                const int si = sf.slack[static_cast<std::size_t>(i)];
                if (si >= 0 && si == sf.slack[static_cast<std::size_t>(j)])
                    v += sf.slack_coef[static_cast<std::size_t>(i)] * sf.slack_coef[static_cast<std::size_t>(j)] * x(si) * zinv_lp(si);
                M(i, j) = v;
                M(j, i) = v;
            }
        }
        Eigen::LLT<RMatrix> mllt(M);
        Eigen::LDLT<RMatrix> mldlt;
        const bool use_llt = mllt.info() == Eigen::Success;
        if (!use_llt) {
            const double reg = 1e-14 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
            mldlt.compute(M + reg * RMatrix::Identity(m, m));
        }
        auto solve_m = [&](const RVector& rhs) -> RVector {
            if (use_llt)
                return mllt.solve(rhs);
            return mldlt.solve(rhs);
        };

        const RMatrix xrdz = X * Rd * Zinv;
        const RVector xrdz_lp = x.cwiseProduct(rd).cwiseProduct(zinv_lp);

        // Given the complementarity target G (matrix) and g (lp), return the
        // full search direction.
        struct Direction {
            RMatrix dX, dZ;
            RVector dx, dz, dy;
        };
        auto direction = [&](const RMatrix& G, const RVector& g) {
            Direction d;
            const RVector h = rp - apply_a(G - xrdz, g - xrdz_lp);
            d.dy = solve_m(h);
            RMatrix atdy;
            RVector atdy_lp;
            apply_at(d.dy, atdy, atdy_lp);
            d.dZ = Rd - atdy;
            d.dz = rd - atdy_lp;
            const RMatrix raw = G - X * d.dZ * Zinv;
            d.dX = 0.5 * (raw + raw.transpose());
            d.dx = g - x.cwiseProduct(d.dz).cwiseProduct(zinv_lp);
            return d;
        };
        auto step_lengths = [&](const Direction& d) {
            const double ap = std::min(max_step_psd(X, d.dX), max_step_lp(x, d.dx));
            const double ad = std::min(max_step_psd(Z, d.dZ), max_step_lp(z, d.dz));
            return std::pair{ap, ad};
        };

        // Predictor (affine scaling).
        const Direction aff = direction(-X, -x);
        auto [ap_aff, ad_aff] = step_lengths(aff);
        ap_aff = std::min(1.0, ap_aff);
        ad_aff = std::min(1.0, ad_aff);
        const double mu_aff = (dot(X + ap_aff * aff.dX, Z + ad_aff * aff.dZ) +
                               (x + ap_aff * aff.dx).dot(z + ad_aff * aff.dz)) / total;
        const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

        // Corrector.
        const RMatrix G = sigma * mu * Zinv - X - aff.dX * aff.dZ * Zinv;
        const RVector g = sigma * mu * zinv_lp - x - aff.dx.cwiseProduct(aff.dz).cwiseProduct(zinv_lp);
        const Direction dir = direction(G, g);
        auto [ap, ad] = step_lengths(dir);
        ap = std::min(1.0, opt.step_fraction * ap);
        ad = std::min(1.0, opt.step_fraction * ad);
        if (ap < 1e-12 && ad < 1e-12)
            break;

        X += ap * dir.dX;
        x += ap * dir.dx;
        Z += ad * dir.dZ;
        z += ad * dir.dz;
        y += ad * dir.dy;
        X = 0.5 * (X + X.transpose()).eval();
        Z = 0.5 * (Z + Z.transpose()).eval();
    }

    if (res.status == SdpStatus::optimal) {
        res.x = X;
        res.x_lp = x;
        return res;
    }
    res.x = best_x;
    res.x_lp = best_xlp;
    res.status = best_merit < opt.acceptable_tolerance ? SdpStatus::optimal : SdpStatus::max_iterations;
    return res;
}

inline double violation(double value, ConstraintSense sense, double bound)
{
    switch (sense) {
    case ConstraintSense::greater_equal: return std::max(0.0, bound - value);
    case ConstraintSense::less_equal: return std::max(0.0, value - bound);
    case ConstraintSense::equal: return std::abs(value - bound);
    }
    return 0.0;
}

} // namespace detail

/// Solves the problem; infeasible/unbounded instances and iteration caps are
/// reported through `status`, never thrown. Deterministic.
inline SdpSolution sdp_solve(const SdpProblem& p, const SdpOptions& opt = {})
{
    using detail::RMatrix;
    using detail::RVector;
    p.validate();
    const Eigen::Index n = p.dim();

    SdpSolution out;
    out.solution = HermitianMatrix::zero(n);
    out.residuals.assign(p.constraints.size(), 0.0);

    // Row normalization; rows with a zero matrix are decided up front.
    detail::StandardForm sf;
    std::vector<std::size_t> kept;
    std::vector<double> row_norm(p.constraints.size(), 0.0);
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
        const auto& c = p.constraints[i];
        const RMatrix a = detail::embed(c.matrix.matrix());
        const double nrm = a.norm();
        row_norm[i] = nrm;
        if (nrm == 0.0) {
            if (detail::violation(0.0, c.sense, c.bound) > 0.0) {
                out.status = SdpStatus::infeasible;
                return out;
            }
            continue;
        }
        kept.push_back(i);
        sf.a.push_back(a / nrm);
    }

    if (kept.empty()) {
        // Only trivially satisfied rows: the cone alone bounds the problem.
        const double sign = p.sense == OptimizationSense::minimize ? 1.0 : -1.0;
        const EigenPair e = least_eigenvector(HermitianMatrix(p.objective.matrix() * sign));
        out.status = e.value < 0.0 ? SdpStatus::unbounded : SdpStatus::optimal;
        return out;
    }

    const auto m = static_cast<Eigen::Index>(kept.size());
    RVector b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto idx = kept[static_cast<std::size_t>(i)];
        b(i) = p.constraints[idx].bound / row_norm[idx];
    }
    const double bscale = std::max(b.cwiseAbs().maxCoeff(), 0.0) > 0.0 ? b.cwiseAbs().maxCoeff() : 1.0;
    sf.b = b / bscale;

    RMatrix c = detail::embed(p.objective.matrix());
    if (p.sense == OptimizationSense::maximize)
        c = -c;
    const double cscale = c.norm() > 0.0 ? c.norm() : 1.0;
    sf.c = c / cscale;

    for (Eigen::Index i = 0; i < m; ++i) {
        const auto sense = p.constraints[kept[static_cast<std::size_t>(i)]].sense;
        if (sense == ConstraintSense::equal) {
            sf.slack.push_back(-1);
            sf.slack_coef.push_back(0.0);
        } else {
            sf.slack.push_back(static_cast<int>(sf.n_lp++));
            sf.slack_coef.push_back(sense == ConstraintSense::greater_equal ? -1.0 : 1.0);
        }
    }

    const detail::IpmResult r = detail::interior_point(sf, opt);
    out.status = r.status;
    out.iterations = r.iterations;
    if (r.status == SdpStatus::infeasible || r.status == SdpStatus::unbounded)
        return out;

    out.solution = HermitianMatrix(detail::unembed(r.x * bscale));
    out.objective = p.objective.inner(out.solution);
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
        const auto& ci = p.constraints[i];
        if (row_norm[i] == 0.0)
            continue;
        const double v = ci.matrix.inner(out.solution);
        out.residuals[i] = detail::violation(v, ci.sense, ci.bound) / (row_norm[i] * bscale);
    }
    return out;
}

} // namespace poisonfb::numerics

#pragma once

// Gaussian randomization: recovers a rank-one point u from a relaxed SDP
// solution U by sampling u ~ CN(0, U), repairing each sample with a
// problem-specific minimal rescaling, and keeping the cheapest feasible one.

#include "poisonfb/numerics/hermitian.hpp"
#include "poisonfb/rng.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>

namespace poisonfb::numerics {

/// Problem-specific hooks. `rescale` returns the minimally scaled candidate
/// (or nullopt when no scaling can repair it), `feasible` is the acceptance
/// predicate, `cost` is minimized.
struct RankOneProblem {
    std::function<std::optional<CVector>(const CVector&)> rescale;
    std::function<bool(const CVector&)> feasible;
    std::function<double(const CVector&)> cost;
};

struct RandomizationOptions {
    int n_draws = 1000;
    RandomStream stream{};
};

enum class RandomizationStatus { found, no_feasible_candidate };

struct RandomizationResult {
    RandomizationStatus status = RandomizationStatus::no_feasible_candidate;
    CVector vector;
    double cost = std::numeric_limits<double>::infinity();
    /// cost / sdp_bound; >= 1 for minimization problems with a positive bound.
    double bound_ratio = std::numeric_limits<double>::quiet_NaN();
    int feasible_candidates = 0;
};

/// The scaled principal eigenvector is always tried first; when U is
/// numerically rank one every sample is collinear with it, so sampling is
/// skipped.
inline RandomizationResult randomize_rank1(const HermitianMatrix& u_opt, const RankOneProblem& problem,
                                           double sdp_bound, const RandomizationOptions& opt = {})
{
    if (opt.n_draws < 1)
        throw std::invalid_argument("randomize_rank1: n_draws must be >= 1");
    if (!problem.rescale || !problem.feasible || !problem.cost)
        throw std::invalid_argument("randomize_rank1: incomplete problem hooks");

    const Spectrum s = eigen_decompose(u_opt);
    const Eigen::Index n = u_opt.dim();
    const double lmax = std::max(s.values(n - 1), 0.0);

    RandomizationResult out;
    auto consider = [&](const CVector& raw) {
        if (!raw.allFinite() || raw.squaredNorm() == 0.0)
            return;
        const std::optional<CVector> c = problem.rescale(raw);
        if (!c || !problem.feasible(*c))
            return;
        ++out.feasible_candidates;
        const double cost = problem.cost(*c);
        if (cost < out.cost) {
            out.cost = cost;
            out.vector = *c;
            out.status = RandomizationStatus::found;
        }
    };

    const EigenPair top = principal_eigenvector(u_opt);
    consider(top.vector * std::sqrt(lmax));

    const bool rank_one = n == 1 || std::max(s.values(n - 2), 0.0) <= 1e-9 * lmax;
    if (!rank_one) {
        // Columns of V diag(sqrt(lambda)) give a square root of U.
        CMatrix root = s.vectors;
        for (Eigen::Index j = 0; j < n; ++j)
            root.col(j) *= std::sqrt(std::max(s.values(j), 0.0));
        RandomStream stream = opt.stream;
        CVector w(n);
        for (int d = 0; d < opt.n_draws; ++d) {
            for (Eigen::Index i = 0; i < n; ++i)
                w(i) = stream.complex_normal();
            consider(root * w);
        }
    }
    if (out.status == RandomizationStatus::found && sdp_bound != 0.0)
        out.bound_ratio = out.cost / sdp_bound;
    return out;
}

} // namespace poisonfb::numerics

#pragma once

// Brute-force reference computations used by the test suites and by the
// `validate` command. Nothing here calls the solvers it is used to check.

#include "poisonfb/model.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

namespace poisonfb::oracles {

/// Eigenvalues of a 2x2 Hermitian [[a, b], [conj(b), d]] from the
/// characteristic polynomial, ascending.
inline std::pair<double, double> eigenvalues_2x2(double a, std::complex<double> b, double d)
{
    const double mean = 0.5 * (a + d);
    const double half_diff = 0.5 * (a - d);
    const double r = std::sqrt(half_diff * half_diff + std::norm(b));
    return {mean - r, mean + r};
}

/// Unit-norm beamformers on a grid over C^2 modulo global phase:
/// u = [cos(theta), sin(theta) e^{j phi}], theta in [0, pi/2], phi in [0, 2 pi).
inline std::vector<CVector> unit_grid_2(int n_theta = 100, int n_phi = 100)
{
    std::vector<CVector> out;
    out.reserve(static_cast<std::size_t>(n_theta * n_phi));
    for (int i = 0; i < n_theta; ++i) {
        const double th = 0.5 * std::numbers::pi * i / (n_theta - 1);
        for (int j = 0; j < n_phi; ++j) {
            const double ph = 2.0 * std::numbers::pi * j / n_phi;
            CVector u(2);
            u << std::cos(th), std::sin(th) * std::polar(1.0, ph);
            out.push_back(std::move(u));
        }
    }
    return out;
}

inline double gain2(const CVector& h, const CVector& u)
{
    std::complex<double> acc = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i)
        acc += h(i) * u(i);
    return std::norm(acc);
}

/// Minimum power of a rank-one beamformer meeting |h_k u|^2 >= gamma_k,
/// over the unit grid scaled minimally.
inline double grid_power_min(const std::vector<CVector>& rows, const std::vector<double>& gamma,
                             const std::vector<CVector>& grid)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& u : grid) {
        double scale = 0.0;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const double g = gain2(rows[k], u);
            scale = g > 0.0 ? std::max(scale, gamma[k] / g) : std::numeric_limits<double>::infinity();
        }
        best = std::min(best, scale);
    }
    return best;
}

/// Best min_k |h_k u|^2 / sigma^2 with ||u||^2 = P over the grid.
inline double grid_max_min(const std::vector<CVector>& rows, double power, double noise,
                           const std::vector<CVector>& grid)
{
    double best = 0.0;
    for (const auto& u : grid) {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& h : rows)
            m = std::min(m, gain2(h, u));
        best = std::max(best, m * power / noise);
    }
    return best;
}

/// Best sum_k |h_k u|^2 / sigma^2 with ||u||^2 = P over the grid.
inline double grid_max_sum(const std::vector<CVector>& rows, double power, double noise,
                           const std::vector<CVector>& grid)
{
    double best = 0.0;
    for (const auto& u : grid) {
        double s = 0.0;
        for (const auto& h : rows)
            s += gain2(h, u);
        best = std::max(best, s * power / noise);
    }
    return best;
}

/// Brute-force optimum of the 2x2 relaxed QoS problem
///     min tr(U) s.t. tr(U h_k^H h_k) >= gamma_k, U psd,
/// over Cholesky factors L = [[a, 0], [c + j d, e]] on a grid of the given
/// step (a, e in [0, 1], c, d in [-1, 1]); each U = L L^H is scaled
/// minimally to feasibility, which is exact because the constraints are
/// homogeneous.
inline double cholesky_grid_qos(const std::vector<CVector>& rows, const std::vector<double>& gamma,
                                double step = 0.02)
{
    const int n_pos = static_cast<int>(std::lround(1.0 / step));
    const int n_sym = 2 * n_pos;
    // tr(U G) for G = h^H h equals |h L|^2 summed over columns of L.
    double best = std::numeric_limits<double>::infinity();
    for (int ia = 0; ia <= n_pos; ++ia) {
        const double a = ia * step;
        for (int ie = 0; ie <= n_pos; ++ie) {
            const double e = ie * step;
            for (int ic = 0; ic <= n_sym; ++ic) {
                const double c = -1.0 + ic * step;
                for (int id = 0; id <= n_sym; ++id) {
                    const double d = -1.0 + id * step;
                    const std::complex<double> l10(c, d);
                    const double trace = a * a + std::norm(l10) + e * e;
                    if (trace == 0.0)
                        continue;
                    double scale = 0.0;
                    for (std::size_t k = 0; k < rows.size(); ++k) {
                        const auto& h = rows[k];
                        // h L: column 0 = h0 a + h1 l10, column 1 = h1 e
                        const double g = std::norm(h(0) * a + h(1) * l10) + std::norm(h(1) * e);
                        if (g <= 0.0) {
                            scale = std::numeric_limits<double>::infinity();
                            break;
                        }
                        scale = std::max(scale, gamma[k] / g);
                    }
                    best = std::min(best, scale * trace);
                }
            }
        }
    }
    return best;
}

} // namespace poisonfb::oracles

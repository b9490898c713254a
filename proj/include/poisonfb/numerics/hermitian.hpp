#pragma once

#include "poisonfb/model.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace poisonfb::numerics {

/// Square complex matrix with A = A^H. Construction checks the symmetry to
/// 1e-12 (relative to the largest entry) and then removes the rounding-level
/// skew part.
class HermitianMatrix {
public:
    HermitianMatrix() = default;

    explicit HermitianMatrix(CMatrix a) : a_(std::move(a))
    {
        if (a_.rows() != a_.cols())
            throw std::invalid_argument("HermitianMatrix: matrix is not square");
        if (!a_.allFinite())
            throw std::invalid_argument("HermitianMatrix: non-finite entry");
        const double scale = std::max(1.0, a_.cwiseAbs().maxCoeff());
        if (a_.size() > 0 && (a_ - a_.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw std::invalid_argument("HermitianMatrix: matrix is not Hermitian");
        CMatrix sym = (a_ + a_.adjoint()) * 0.5;
        a_ = std::move(sym);
    }

    static HermitianMatrix zero(Eigen::Index n) { return HermitianMatrix(CMatrix::Zero(n, n)); }
    static HermitianMatrix identity(Eigen::Index n) { return HermitianMatrix(CMatrix::Identity(n, n)); }

    /// v v^H
    static HermitianMatrix outer(const CVector& v) { return HermitianMatrix(v * v.adjoint()); }

    [[nodiscard]] Eigen::Index dim() const noexcept { return a_.rows(); }
    [[nodiscard]] const CMatrix& matrix() const noexcept { return a_; }
    [[nodiscard]] double trace() const { return a_.trace().real(); }

    /// Re tr(A B); exact tr(A B) for Hermitian A, B.
    [[nodiscard]] double inner(const HermitianMatrix& b) const
    {
        if (b.dim() != dim())
            throw std::invalid_argument("HermitianMatrix: dimension mismatch");
        return (a_.conjugate().cwiseProduct(b.a_)).sum().real();
    }

    [[nodiscard]] double frobenius_norm() const { return a_.norm(); }

private:
    CMatrix a_;
};

struct EigenPair {
    double value = 0.0;
    CVector vector;
};

/// Full spectrum, eigenvalues ascending, eigenvectors as columns.
struct Spectrum {
    Eigen::VectorXd values;
    CMatrix vectors;
};

inline Spectrum eigen_decompose(const HermitianMatrix& a)
{
    if (a.dim() == 0)
        throw std::invalid_argument("eigen_decompose: empty matrix");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a.matrix());
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigen_decompose: eigensolver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

/// Rotates v by a unit-modulus phase so that its largest-magnitude entry
/// (first one on ties) is real and nonnegative.
inline void canonicalize_phase(CVector& v)
{
    if (v.size() == 0)
        return;
    Eigen::Index best = 0;
    double best_mag = std::abs(v(0));
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        const double m = std::abs(v(i));
        if (m > best_mag * (1.0 + 1e-12)) {
            best = i;
            best_mag = m;
        }
    }
    if (best_mag > 0.0) {
        v *= std::conj(v(best)) / best_mag;
        v(best) = Complex(std::abs(v(best)), 0.0);
    }
}

namespace detail {

// Picks a deterministic unit vector from the eigenspace spanned by the
// columns of `basis`: the normalized projection of the first coordinate axis
// with a nonzero component (the member with largest |first coordinate|).
inline CVector tie_broken_vector(const CMatrix& basis)
{
    const Eigen::Index n = basis.rows();
    for (Eigen::Index axis = 0; axis < n; ++axis) {
        CVector proj = basis * basis.row(axis).adjoint();
        const double norm = proj.norm();
        if (norm > 1e-8) {
            proj /= norm;
            canonicalize_phase(proj);
            return proj;
        }
    }
    CVector v = basis.col(0);
    canonicalize_phase(v);
    return v;
}

inline EigenPair extreme_eigenvector(const HermitianMatrix& a, bool largest)
{
    const Eigen::Index n = a.dim();
    if (n == 0)
        throw std::invalid_argument("eigenvector: empty matrix");
    const double scale = a.matrix().cwiseAbs().maxCoeff();
    if (scale == 0.0) {
        CVector e = CVector::Zero(n);
        e(0) = 1.0;
        return {0.0, e};
    }
    const Spectrum s = eigen_decompose(a);
    const double target = largest ? s.values(n - 1) : s.values(0);
    const double cluster = 1e-12 * std::max(std::abs(s.values(0)), std::abs(s.values(n - 1)));
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(s.values(i) - target) <= cluster)
            members.push_back(i);
    CMatrix basis(n, static_cast<Eigen::Index>(members.size()));
    for (std::size_t j = 0; j < members.size(); ++j)
        basis.col(static_cast<Eigen::Index>(j)) = s.vectors.col(members[j]);
    return {target, tie_broken_vector(basis)};
}

} // namespace detail

/// Largest eigenvalue and a unit eigenvector. Repeated eigenvalues are
/// resolved deterministically (largest-magnitude first coordinate), and the
/// phase is canonicalized. The zero matrix yields (0, e_1).
inline EigenPair principal_eigenvector(const HermitianMatrix& a)
{
    return detail::extreme_eigenvector(a, true);
}

/// Smallest eigenvalue counterpart of principal_eigenvector.
inline EigenPair least_eigenvector(const HermitianMatrix& a)
{
    return detail::extreme_eigenvector(a, false);
}

} // namespace poisonfb::numerics

#include <catch2/catch_amalgamated.hpp>

#include "poisonfb/numerics/hermitian.hpp"
#include "poisonfb/numerics/randomize.hpp"
#include "poisonfb/numerics/sdp.hpp"
#include "poisonfb/validation/oracles.hpp"

#include <cmath>

using namespace poisonfb;
using namespace poisonfb::numerics;
using Catch::Approx;

namespace {

CVector random_vector(RandomStream& s, Eigen::Index n)
{
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = s.complex_normal();
    return v;
}

HermitianMatrix random_psd(RandomStream& s, Eigen::Index n, Eigen::Index rank)
{
    CMatrix a = CMatrix::Zero(n, n);
    for (Eigen::Index r = 0; r < rank; ++r) {
        const CVector v = random_vector(s, n);
        a += v * v.adjoint();
    }
    return HermitianMatrix(a);
}

HermitianMatrix gram_of(const CVector& h) { return HermitianMatrix(ChannelVector(h).gram()); }

} // namespace

TEST_CASE("HermitianMatrix rejects non-Hermitian input", "[numerics]")
{
    CMatrix a(2, 2);
    a << 1.0, Complex(0.0, 1.0), Complex(0.0, 1.0), 1.0;
    CHECK_THROWS_AS(HermitianMatrix(a), std::invalid_argument);
    CHECK_THROWS_AS(HermitianMatrix(CMatrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("principal_eigenvector", "[numerics][eigen]")
{
    SECTION("identity: tie broken toward e_1")
    {
        const auto e = principal_eigenvector(HermitianMatrix::identity(3));
        CHECK(e.value == Approx(1.0));
        CHECK(e.vector(0) == Complex(1.0, 0.0));
        CHECK(std::abs(e.vector(1)) == 0.0);
        CHECK(std::abs(e.vector(2)) == 0.0);
    }
    SECTION("diagonal")
    {
        CMatrix d = CMatrix::Zero(2, 2);
        d(0, 0) = 2.0;
        d(1, 1) = 1.0;
        const auto e = principal_eigenvector(HermitianMatrix(d));
        CHECK(e.value == Approx(2.0));
        CHECK(std::abs(e.vector(0) - Complex(1.0, 0.0)) < 1e-15);
    }
    SECTION("zero matrix convention")
    {
        const auto e = principal_eigenvector(HermitianMatrix::zero(3));
        CHECK(e.value == 0.0);
        CHECK(e.vector(0) == Complex(1.0, 0.0));
    }
    SECTION("2x2 eigenvalue matches the characteristic-polynomial root")
    {
        RandomStream s(21);
        for (int trial = 0; trial < 100; ++trial) {
            const double a = 3.0 * s.normal();
            const double d = 3.0 * s.normal();
            const Complex b = 2.0 * s.complex_normal();
            CMatrix m(2, 2);
            m << a, b, std::conj(b), d;
            const auto e = principal_eigenvector(HermitianMatrix(m));
            const double expected = oracles::eigenvalues_2x2(a, b, d).second;
            CHECK(std::abs(e.value - expected) <= 1e-10 * std::max(1.0, std::abs(expected)));
        }
    }
    SECTION("residual and phase canonicalization on random PSD matrices")
    {
        RandomStream s(22);
        for (int trial = 0; trial < 100; ++trial) {
            const Eigen::Index n = 1 + trial % 8;
            const auto a = random_psd(s, n, 1 + trial % 5);
            const auto e = principal_eigenvector(a);
            CHECK((a.matrix() * e.vector - e.value * e.vector).norm() <= 1e-10 * e.value);
            CHECK(e.vector.norm() == Approx(1.0).epsilon(1e-12));
            Eigen::Index imax = 0;
            e.vector.cwiseAbs().maxCoeff(&imax);
            CHECK(e.vector(imax).imag() == 0.0);
            CHECK(e.vector(imax).real() > 0.0);
        }
    }
    SECTION("trace equals the eigenvalue sum")
    {
        RandomStream s(23);
        for (int trial = 0; trial < 50; ++trial) {
            const auto a = random_psd(s, 1 + trial % 8, 3);
            const auto sp = eigen_decompose(a);
            CHECK(sp.values.sum() == Approx(a.trace()).epsilon(1e-9));
        }
    }
    SECTION("deterministic output under a degenerate top eigenvalue")
    {
        CMatrix m = CMatrix::Zero(3, 3);
        m(1, 1) = 4.0;
        m(2, 2) = 4.0;
        const auto e1 = principal_eigenvector(HermitianMatrix(m));
        const auto e2 = principal_eigenvector(HermitianMatrix(m));
        CHECK(e1.vector == e2.vector);
        CHECK(e1.value == Approx(4.0));
        CHECK(std::abs(e1.vector(1) - Complex(1.0, 0.0)) < 1e-12);
    }
}

TEST_CASE("sdp_solve closed forms", "[numerics][sdp]")
{
    SECTION("single rank-one constraint: optimum gamma / ||h||^2")
    {
        CVector h(2);
        h << 1.0, 1.0;
        SdpProblem p{HermitianMatrix::identity(2), {{gram_of(h), ConstraintSense::greater_equal, 2.0}}};
        const auto sol = sdp_solve(p);
        REQUIRE(sol.status == SdpStatus::optimal);
        CHECK(sol.objective == Approx(1.0).epsilon(1e-6));
        // U* = gamma h^H h / ||h||^4
        const CMatrix expected = ChannelVector(h).gram() * (2.0 / 4.0);
        CHECK((sol.solution.matrix() - expected).norm() < 1e-6);
        for (double r : sol.residuals)
            CHECK(r <= 1e-6);
    }
    SECTION("zero constraint matrix with positive bound is infeasible")
    {
        SdpProblem p{HermitianMatrix::identity(2),
                     {{HermitianMatrix::zero(2), ConstraintSense::greater_equal, 1.0}}};
        CHECK(sdp_solve(p).status == SdpStatus::infeasible);
    }
    SECTION("negative trace bound is infeasible")
    {
        SdpProblem p{HermitianMatrix::identity(3),
                     {{HermitianMatrix::identity(3), ConstraintSense::less_equal, -1.0}}};
        CHECK(sdp_solve(p).status == SdpStatus::infeasible);
    }
    SECTION("conflicting trace constraints are infeasible")
    {
        CVector h(2);
        h << 1.0, 0.0;
        SdpProblem p{HermitianMatrix::identity(2),
                     {{gram_of(h), ConstraintSense::greater_equal, 2.0},
                      {HermitianMatrix::identity(2), ConstraintSense::less_equal, 1.0}}};
        CHECK(sdp_solve(p).status == SdpStatus::infeasible);
    }
    SECTION("maximizing trace with only a lower bound is unbounded")
    {
        CVector h(2);
        h << 1.0, 0.5;
        SdpProblem p{HermitianMatrix::identity(2), {{gram_of(h), ConstraintSense::greater_equal, 1.0}},
                     OptimizationSense::maximize};
        CHECK(sdp_solve(p).status == SdpStatus::unbounded);
    }
    SECTION("max-min epigraph with a power cap: orthonormal users split evenly")
    {
        // max tr(U G1) s.t. tr(U G2) >= tr(U G1) is not expressible without t;
        // instead check max tr(U G1) s.t. tr(U) <= P, which is P ||h1||^2.
        CVector h(2);
        h << Complex(1.0, 1.0), 0.5;
        SdpProblem p{gram_of(h), {{HermitianMatrix::identity(2), ConstraintSense::less_equal, 10.0}},
                     OptimizationSense::maximize};
        const auto sol = sdp_solve(p);
        REQUIRE(sol.status == SdpStatus::optimal);
        CHECK(sol.objective == Approx(10.0 * h.squaredNorm()).epsilon(1e-6));
    }
    SECTION("equality constraints")
    {
        // min tr(C U) s.t. tr(U) = 1 gives lambda_min(C).
        RandomStream s(31);
        const auto c = random_psd(s, 3, 3);
        SdpProblem p{c, {{HermitianMatrix::identity(3), ConstraintSense::equal, 1.0}}};
        const auto sol = sdp_solve(p);
        REQUIRE(sol.status == SdpStatus::optimal);
        CHECK(sol.objective == Approx(least_eigenvector(c).value).epsilon(1e-6));
    }
    SECTION("duplicate constraints are harmless")
    {
        CVector h(2);
        h << 2.0, 0.0;
        SdpProblem p{HermitianMatrix::identity(2),
                     {{gram_of(h), ConstraintSense::greater_equal, 4.0},
                      {gram_of(h), ConstraintSense::greater_equal, 4.0}}};
        const auto sol = sdp_solve(p);
        REQUIRE(sol.status == SdpStatus::optimal);
        CHECK(sol.objective == Approx(1.0).epsilon(1e-6));
    }
    SECTION("determinism")
    {
        RandomStream s(32);
        SdpProblem p{HermitianMatrix::identity(4), {}};
        for (int k = 0; k < 5; ++k)
            p.constraints.push_back({gram_of(random_vector(s, 4)), ConstraintSense::greater_equal, 1.0 + k});
        const auto a = sdp_solve(p);
        const auto b = sdp_solve(p);
        CHECK(a.objective == b.objective);
        CHECK(a.solution.matrix() == b.solution.matrix());
    }
    CHECK_THROWS_AS(sdp_solve(SdpProblem{HermitianMatrix::identity(2), {}}), std::invalid_argument);
}

TEST_CASE("sdp_solve against the Cholesky grid oracle", "[numerics][sdp][oracle]")
{
    RandomStream s(33);
    for (int trial = 0; trial < 5; ++trial) {
        const CVector h1 = random_vector(s, 2);
        const CVector h2 = random_vector(s, 2);
        const double g1 = 1.0 + s.uniform();
        const double g2 = 1.0 + 2.0 * s.uniform();
        SdpProblem p{HermitianMatrix::identity(2),
                     {{gram_of(h1), ConstraintSense::greater_equal, g1},
                      {gram_of(h2), ConstraintSense::greater_equal, g2}}};
        const auto sol = sdp_solve(p);
        REQUIRE(sol.status == SdpStatus::optimal);
        const double oracle = oracles::cholesky_grid_qos({h1, h2}, {g1, g2}, 0.02);
        CHECK(std::abs(sol.objective - oracle) <= 0.01 * oracle);
        CHECK(sol.objective <= oracle * (1.0 + 1e-9));
        const auto sp = eigen_decompose(sol.solution);
        CHECK(sp.values(0) >= -1e-8 * sol.solution.trace());
    }
}

TEST_CASE("sdp_solve scales to the desk-scale dimension cap", "[numerics][sdp]")
{
    RandomStream s(34);
    for (Eigen::Index n : {8, 16}) {
        SdpProblem p{HermitianMatrix::identity(n), {}};
        for (int k = 0; k < 6; ++k)
            p.constraints.push_back({gram_of(random_vector(s, n)), ConstraintSense::greater_equal, 1.0});
        const auto sol = sdp_solve(p);
        REQUIRE(sol.status == SdpStatus::optimal);
        for (double r : sol.residuals)
            CHECK(r <= 1e-6);
        // Weak duality: any feasible rank-one point costs at least the bound.
        const CVector v = random_vector(s, n);
        double scale = 0.0;
        for (const auto& c : p.constraints)
            scale = std::max(scale, c.bound / c.matrix.inner(HermitianMatrix::outer(v)));
        CHECK(scale * v.squaredNorm() >= sol.objective * (1.0 - 1e-9));
    }
}

TEST_CASE("randomize_rank1", "[numerics][randomize]")
{
    auto qos = [](std::vector<CVector> rows, double gamma) {
        RankOneProblem rp;
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
    };

    SECTION("rank-one input is a fixed point")
    {
        CVector v(3);
        v << 1.0, Complex(0.5, -0.5), 0.25;
        const auto u = HermitianMatrix::outer(v);
        const CVector h = v.conjugate(); // matched: |h v|^2 = ||v||^4
        const double gamma = std::norm((h.transpose() * v)(0));
        const auto r = randomize_rank1(u, qos({h}, gamma), v.squaredNorm(), {1000, RandomStream(1)});
        REQUIRE(r.status == RandomizationStatus::found);
        CHECK((r.vector * r.vector.adjoint() - u.matrix()).norm() <= 1e-6 * u.matrix().norm());
        CHECK(r.cost == Approx(v.squaredNorm()).epsilon(1e-6));
    }
    SECTION("randomized power never beats the relaxation bound")
    {
        RandomStream s(41);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<CVector> rows;
            SdpProblem p{HermitianMatrix::identity(3), {}};
            for (int k = 0; k < 6; ++k) {
                rows.push_back(random_vector(s, 3));
                p.constraints.push_back({gram_of(rows.back()), ConstraintSense::greater_equal, 2.0});
            }
            const auto sol = sdp_solve(p);
            REQUIRE(sol.status == SdpStatus::optimal);
            const auto problem = qos(rows, 2.0);
            const auto r = randomize_rank1(sol.solution, problem, sol.objective, {1000, s.child(trial)});
            REQUIRE(r.status == RandomizationStatus::found);
            CHECK(r.cost >= sol.objective * (1.0 - 1e-6));
            CHECK(r.bound_ratio >= 1.0 - 1e-6);
            CHECK(problem.feasible(r.vector));
        }
    }
    SECTION("N_t = 2, K = 3: within 10% of the rank-one grid optimum")
    {
        RandomStream s(42);
        const auto grid = oracles::unit_grid_2();
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<CVector> rows;
            SdpProblem p{HermitianMatrix::identity(2), {}};
            for (int k = 0; k < 3; ++k) {
                rows.push_back(random_vector(s, 2));
                p.constraints.push_back({gram_of(rows.back()), ConstraintSense::greater_equal, 1.0});
            }
            const auto sol = sdp_solve(p);
            const auto r = randomize_rank1(sol.solution, qos(rows, 1.0), sol.objective, {1000, s.child(trial)});
            const double oracle = oracles::grid_power_min(rows, {1.0, 1.0, 1.0}, grid);
            CHECK(r.cost <= 1.10 * oracle);
        }
    }
    SECTION("no feasible candidate is reported, not thrown")
    {
        RankOneProblem never;
        never.rescale = [](const CVector& c) -> std::optional<CVector> { return c; };
        never.feasible = [](const CVector&) { return false; };
        never.cost = [](const CVector& c) { return c.squaredNorm(); };
        const auto r = randomize_rank1(HermitianMatrix::identity(2), never, 1.0, {10, RandomStream(3)});
        CHECK(r.status == RandomizationStatus::no_feasible_candidate);
    }
    CHECK_THROWS_AS(randomize_rank1(HermitianMatrix::identity(2), qos({CVector::Ones(2)}, 1.0), 1.0, {0, {}}),
                    std::invalid_argument);
}

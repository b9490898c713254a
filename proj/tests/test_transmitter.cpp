#include <catch2/catch_amalgamated.hpp>

#include "poisonfb/transmitter.hpp"
#include "poisonfb/validation/oracles.hpp"

#include <cmath>

using namespace poisonfb;
using namespace poisonfb::transmitter;
using Catch::Approx;

namespace {

CVector random_vector(RandomStream& s, Eigen::Index n)
{
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = s.complex_normal();
    return v;
}

struct Instance {
    ChannelMatrix h;
    std::vector<CVector> rows;
};

Instance random_instance(RandomStream& s, int k, Eigen::Index n)
{
    Instance inst;
    std::vector<ChannelVector> rows;
    for (int i = 0; i < k; ++i) {
        inst.rows.push_back(random_vector(s, n));
        rows.emplace_back(inst.rows.back());
    }
    inst.h = ChannelMatrix(rows);
    return inst;
}

CVector vec2(Complex a, Complex b)
{
    CVector v(2);
    v << a, b;
    return v;
}

} // namespace

TEST_CASE("solve_power_min", "[transmitter][qos]")
{
    SECTION("single user: matched filter with gamma sigma^2 / ||h||^2")
    {
        const ChannelMatrix h({ChannelVector(vec2(2.0, 0.0))});
        const auto sol = solve_power_min(h, 4.0, 1.0, 100.0);
        REQUIRE(sol.feasible);
        CHECK(sol.required_power == Approx(1.0).epsilon(1e-6));
        CHECK(std::abs(sol.beamformer.weights()(1)) < 1e-6);
        CHECK(sol.beamformer.power() == Approx(sol.required_power));
    }
    SECTION("5 dB target gives a constraint bound of 3.1623 sigma^2")
    {
        const double gamma = db_to_linear(5.0);
        CHECK(gamma == Approx(3.16228).epsilon(1e-5));
        const ChannelMatrix h({ChannelVector(vec2(1.0, 0.0)), ChannelVector(vec2(0.0, 1.0))});
        const auto p = detail::qos_problem(h, 1.0, gamma);
        for (const auto& c : p.constraints)
            CHECK(c.bound == Approx(3.16228).epsilon(1e-5));
    }
    SECTION("N_t = 2, K = 2: within 10% of the beamformer grid optimum")
    {
        RandomStream s(51);
        const auto grid = oracles::unit_grid_2();
        for (int trial = 0; trial < 20; ++trial) {
            const auto inst = random_instance(s, 2, 2);
            const auto sol = solve_power_min(inst.h, 2.0, 1.0, 1e6, {1000, s.child(trial), {}});
            REQUIRE(sol.feasible);
            const double oracle = oracles::grid_power_min(inst.rows, {2.0, 2.0}, grid);
            CHECK(std::abs(sol.required_power - oracle) <= 0.10 * oracle);
        }
    }
    SECTION("feasible solutions meet every target; gap is at least one")
    {
        RandomStream s(52);
        for (int trial = 0; trial < 30; ++trial) {
            const auto inst = random_instance(s, 2 + trial % 6, 4);
            const double gamma = db_to_linear(5.0);
            const auto sol = solve_power_min(inst.h, gamma, 1.0, 100.0, {1000, s.child(trial), {}});
            if (!sol.feasible)
                continue;
            for (double v : snr_all(inst.h, sol.beamformer, 1.0))
                CHECK(v >= gamma * (1.0 - 1e-6));
            CHECK(sol.beamformer.power() == Approx(sol.required_power).epsilon(1e-12));
            CHECK(sol.sdr_gap >= 1.0 - 1e-6);
            CHECK(sol.beamformer.power() <= 100.0 * (1.0 + 1e-9));
        }
    }
    SECTION("over-budget instances are flagged and capped")
    {
        const ChannelMatrix h({ChannelVector(vec2(0.01, 0.0))});
        const auto sol = solve_power_min(h, 10.0, 1.0, 100.0);
        CHECK_FALSE(sol.feasible);
        CHECK(sol.required_power == Approx(1e5).epsilon(1e-6));
        CHECK(sol.beamformer.power() <= 100.0 * (1.0 + 1e-9));
        CHECK_FALSE(sol.diagnostic.empty());
    }
    SECTION("a zero channel makes the SDP infeasible")
    {
        const ChannelMatrix h({ChannelVector(vec2(0.0, 0.0)), ChannelVector(vec2(1.0, 0.0))});
        const auto sol = solve_power_min(h, 1.0, 1.0, 100.0);
        CHECK_FALSE(sol.feasible);
        CHECK(sol.sdp_status == numerics::SdpStatus::infeasible);
    }
}

TEST_CASE("solve_max_avg_snr", "[transmitter][avg]")
{
    SECTION("single user")
    {
        const CVector hv = vec2(Complex(1.0, 2.0), Complex(-0.5, 0.3));
        const ChannelMatrix h({ChannelVector(hv)});
        const auto u = solve_max_avg_snr(h, 50.0, 2.0);
        CHECK(u.power() == Approx(50.0).epsilon(1e-9));
        CHECK(snr(h.row(0), u, 2.0) == Approx(50.0 * hv.squaredNorm() / 2.0).epsilon(1e-12));
        CHECK(std::abs(u.weights().dot(hv.conjugate())) == Approx(std::sqrt(50.0) * hv.norm()).epsilon(1e-12));
    }
    SECTION("orthogonal equal-norm rows: deterministic tie-break")
    {
        const ChannelMatrix h({ChannelVector(vec2(0.0, 1.0)), ChannelVector(vec2(1.0, 0.0))});
        const auto u1 = solve_max_avg_snr(h, 4.0);
        const auto u2 = solve_max_avg_snr(h, 4.0);
        CHECK(u1.weights() == u2.weights());
        CHECK(std::abs(u1.weights()(0) - Complex(2.0, 0.0)) < 1e-12);
    }
    SECTION("N_t = 2, K = 3: matches the grid optimum of the SNR sum")
    {
        RandomStream s(53);
        const auto grid = oracles::unit_grid_2();
        for (int trial = 0; trial < 20; ++trial) {
            const auto inst = random_instance(s, 3, 2);
            const auto u = solve_max_avg_snr(inst.h, 10.0);
            double total = 0.0;
            for (double v : snr_all(inst.h, u, 1.0))
                total += v;
            const double oracle = oracles::grid_max_sum(inst.rows, 10.0, 1.0, grid);
            CHECK(total >= oracle * (1.0 - 1e-12));
            CHECK(total <= oracle * (1.0 + 1e-3));
        }
    }
    SECTION("beats random beamformers at the same power")
    {
        RandomStream s(54);
        for (int trial = 0; trial < 10; ++trial) {
            const auto inst = random_instance(s, 5, 5);
            const auto u = solve_max_avg_snr(inst.h, 100.0);
            double best = 0.0;
            for (double v : snr_all(inst.h, u, 1.0))
                best += v;
            for (int d = 0; d < 1000; ++d) {
                CVector r = random_vector(s, 5);
                r *= 10.0 / r.norm();
                double sum = 0.0;
                for (double v : snr_all(inst.h, Beamformer(r), 1.0))
                    sum += v;
                REQUIRE(sum <= best * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("solve_max_min_sdr", "[transmitter][maxmin]")
{
    SECTION("duplicate users reduce to the matched filter")
    {
        const CVector hv = vec2(Complex(0.3, 1.0), 0.7);
        const ChannelMatrix h({ChannelVector(hv), ChannelVector(hv)});
        const auto sol = solve_max_min_sdr(h, 100.0, 1.0);
        REQUIRE(sol.converged);
        CHECK(sol.min_snr == Approx(100.0 * hv.squaredNorm()).epsilon(1e-6));
    }
    SECTION("orthonormal users split power evenly")
    {
        const ChannelMatrix h({ChannelVector(vec2(1.0, 0.0)), ChannelVector(vec2(0.0, 1.0))});
        const auto sol = solve_max_min_sdr(h, 100.0, 1.0);
        CHECK(sol.min_snr == Approx(50.0).epsilon(1e-6));
        CHECK(sol.sdp_bound == Approx(50.0).epsilon(1e-6));
    }
    SECTION("N_t = 2, K = 3: within 10% of the grid optimum")
    {
        RandomStream s(55);
        const auto grid = oracles::unit_grid_2();
        for (int trial = 0; trial < 20; ++trial) {
            const auto inst = random_instance(s, 3, 2);
            const auto sol = solve_max_min_sdr(inst.h, 10.0, 1.0, {1000, s.child(trial), {}});
            const double oracle = oracles::grid_max_min(inst.rows, 10.0, 1.0, grid);
            CHECK(std::abs(sol.min_snr - oracle) <= 0.10 * oracle);
            CHECK(sol.min_snr <= sol.sdp_bound * (1.0 + 1e-6));
        }
    }
    SECTION("power cap and reported min SNR are consistent")
    {
        RandomStream s(56);
        for (int trial = 0; trial < 20; ++trial) {
            const auto inst = random_instance(s, 2 + trial % 8, 4);
            const auto sol = solve_max_min_sdr(inst.h, 100.0, 1.0, {200, s.child(trial), {}});
            CHECK(sol.beamformer.power() <= 100.0 * (1.0 + 1e-9));
            CHECK(sol.min_snr == Approx(min_snr(inst.h, sol.beamformer, 1.0)).epsilon(1e-9));
        }
    }
}

TEST_CASE("solve_max_min_iterative", "[transmitter][iterative]")
{
    SECTION("already optimal single-user start returns immediately")
    {
        const CVector hv = vec2(Complex(1.0, -1.0), 2.0);
        const ChannelMatrix h({ChannelVector(hv)});
        const Beamformer init(hv.conjugate() * (std::sqrt(10.0) / hv.norm()));
        const auto sol = solve_max_min_iterative(h, 10.0, 1.0, init);
        CHECK(sol.iterations <= 1);
        CHECK(sol.converged);
        CHECK(sol.min_snr == Approx(10.0 * hv.squaredNorm()).epsilon(1e-12));
    }
    SECTION("min SNR trace never decreases")
    {
        RandomStream s(57);
        for (int trial = 0; trial < 100; ++trial) {
            const auto inst = random_instance(s, 2 + trial % 7, 2 + trial % 4);
            CVector init = random_vector(s, static_cast<Eigen::Index>(inst.h.n_tx()));
            init *= 0.5 / init.norm();
            const auto sol = solve_max_min_iterative(inst.h, 4.0, 1.0, Beamformer(init));
            for (std::size_t i = 1; i < sol.trace.size(); ++i)
                REQUIRE(sol.trace[i] >= sol.trace[i - 1] - 1e-9);
            CHECK(sol.min_snr >= min_snr(inst.h, Beamformer(init), 1.0));
            CHECK(sol.beamformer.power() <= 4.0 * (1.0 + 1e-9));
        }
    }
    SECTION("N_t = 2, K = 3 random starts reach 90% of the grid optimum on 90% of instances")
    {
        RandomStream s(58);
        const auto grid = oracles::unit_grid_2();
        int good = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const auto inst = random_instance(s, 3, 2);
            CVector init = random_vector(s, 2);
            init /= init.norm();
            const auto sol = solve_max_min_iterative(inst.h, 1.0, 1.0, Beamformer(init));
            good += sol.min_snr >= 0.9 * oracles::grid_max_min(inst.rows, 1.0, 1.0, grid);
        }
        CHECK(good >= 90);
    }
    SECTION("preconditions")
    {
        const ChannelMatrix h({ChannelVector(vec2(1.0, 0.0))});
        CHECK_THROWS_AS(solve_max_min_iterative(h, 1.0, 1.0, Beamformer(vec2(2.0, 0.0))), std::invalid_argument);
        const auto zero = solve_max_min_iterative(h, 1.0, 1.0, Beamformer(vec2(0.0, 0.0)));
        CHECK(zero.min_snr == 0.0);
    }
}

TEST_CASE("min_rate_objective", "[transmitter]")
{
    const ChannelMatrix single({ChannelVector(vec2(std::sqrt(3.0), 0.0))});
    CHECK(min_rate_objective(single, Beamformer(vec2(1.0, 0.0))) == Approx(2.0));

    RandomStream s(59);
    for (int trial = 0; trial < 20; ++trial) {
        const auto inst = random_instance(s, 4, 3);
        std::size_t best_snr = 0;
        std::size_t best_rate = 0;
        double vs = -1.0;
        double vr = -1.0;
        std::vector<Beamformer> cands;
        for (int c = 0; c < 50; ++c)
            cands.emplace_back(random_vector(s, 3));
        for (std::size_t c = 0; c < cands.size(); ++c) {
            const double ms = min_snr(inst.h, cands[c], 1.0);
            const double mr = min_rate_objective(inst.h, cands[c]);
            CHECK(mr == min_rate(inst.h, cands[c], 1.0));
            if (ms > vs) { vs = ms; best_snr = c; }
            if (mr > vr) { vr = mr; best_rate = c; }
        }
        CHECK(best_snr == best_rate);
    }
}

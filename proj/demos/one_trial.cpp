// One channel draw, all three transmitter objectives, honest vs poisoned.
//
//   one_trial [seed]

#include "poisonfb/attacker.hpp"

#include <cstdio>
#include <cstdlib>

using namespace poisonfb;

int main(int argc, char** argv)
{
    const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
    const std::size_t n_tx = 4;
    const double power = db_to_linear(20.0);
    const double gamma = db_to_linear(5.0);

    std::vector<ChannelVector> rows;
    for (std::uint32_t k = 0; k < 4; ++k)
        rows.push_back(generate_channel(RandomStream(seed, 0, 0, k), n_tx));
    const ChannelMatrix legit(rows);
    const RandomStream rng(seed, 1);

    attacker::AttackConfig cfg;
    std::printf("N_t=%zu, %zu legitimate users, P=20 dB, gamma=5 dB, beta=N_t\n\n", n_tx, legit.size());

    cfg.strategy = attacker::Strategy::power_drain;
    const auto honest_qos = transmitter::solve_power_min(legit, gamma, 1.0, power);
    const auto drain = attacker::attack_power_drain(legit, gamma, 1.0, power, cfg, rng);
    const auto poisoned_qos =
        transmitter::solve_power_min(legit.with_adversary(drain.reported_channel), gamma, 1.0, power);
    std::printf("power min      : honest %.4f, poisoned %.4f (fraction of P; %d search sweeps)\n",
                honest_qos.required_power / power, poisoned_qos.required_power / power, drain.iterations);

    cfg.strategy = attacker::Strategy::orthogonal_starvation;
    const auto starve = attacker::attack_orthogonal_starvation(legit, cfg);
    auto avg = [&](const Beamformer& u) {
        double s = 0.0;
        for (const auto& h : legit.rows())
            s += snr(h, u, 1.0);
        return linear_to_db(s / static_cast<double>(legit.size()));
    };
    std::printf("average SNR    : honest %.2f dB, poisoned %.2f dB\n",
                avg(transmitter::solve_max_avg_snr(legit, power)),
                avg(transmitter::solve_max_avg_snr(legit.with_adversary(starve.reported_channel), power)));

    cfg.strategy = attacker::Strategy::maxmin_poison;
    const auto honest_mm = transmitter::solve_max_min_sdr(legit, power, 1.0);
    const auto poison = attacker::attack_maxmin_poison(legit, power, 1.0, cfg, rng);
    const auto poisoned_mm = transmitter::solve_max_min_sdr(legit.with_adversary(poison.reported_channel), power, 1.0);
    double open_loop = 1e300;
    for (const auto& h : legit.rows())
        open_loop = std::min(open_loop, isotropic_baseline_snr(h, power, n_tx, 1.0));
    std::printf("min rate       : honest %.3f, poisoned %.3f, open loop %.3f bits/s/Hz\n",
                std::log2(1.0 + honest_mm.min_snr), std::log2(1.0 + min_snr(legit, poisoned_mm.beamformer, 1.0)),
                std::log2(1.0 + open_loop));
    std::printf("                 attacker predicted min SNR %.2f, realized %.2f\n", poison.attacker_objective,
                min_snr(legit, poisoned_mm.beamformer, 1.0));
    return 0;
}

#pragma once

// Physical-layer model of a single-group multicast downlink: channel rows,
// beamformers, SNR and rate statistics. Everything here works in linear
// scale; dB conversion lives at the experiment/CLI boundary.

#include "poisonfb/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace poisonfb {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// One receiver's 1 x N_t channel row h_k. The received gain under beamformer
/// u is h u = sum_i h_i u_i (no conjugation).
class ChannelVector {
public:
    ChannelVector() = default;

    explicit ChannelVector(CVector entries) : entries_(std::move(entries))
    {
        if (entries_.size() == 0)
            throw std::invalid_argument("ChannelVector: empty channel");
        if (!entries_.allFinite())
            throw std::invalid_argument("ChannelVector: non-finite entry");
    }

    [[nodiscard]] const CVector& entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t n_tx() const noexcept { return static_cast<std::size_t>(entries_.size()); }
    [[nodiscard]] double squared_norm() const noexcept { return entries_.squaredNorm(); }

    /// h u for a column weight vector u.
    [[nodiscard]] Complex gain(const CVector& u) const
    {
        if (u.size() != entries_.size())
            throw std::invalid_argument("ChannelVector: dimension mismatch");
        return (entries_.transpose() * u)(0);
    }

    /// <h_a, h_b> = sum_i a_i conj(b_i); zero iff the rows are orthogonal.
    [[nodiscard]] Complex inner(const ChannelVector& other) const
    {
        if (other.n_tx() != n_tx())
            throw std::invalid_argument("ChannelVector: dimension mismatch");
        return other.entries_.dot(entries_);
    }

    /// Rank-one Gram term h^H h (N_t x N_t), so that u^H (h^H h) u = |h u|^2.
    [[nodiscard]] CMatrix gram() const { return entries_.conjugate() * entries_.transpose(); }

private:
    CVector entries_;
};

/// Transmit weight vector u; its squared norm is the radiated power.
class Beamformer {
public:
    Beamformer() = default;
    explicit Beamformer(CVector weights) : weights_(std::move(weights)) {}

    [[nodiscard]] const CVector& weights() const noexcept { return weights_; }
    [[nodiscard]] std::size_t n_tx() const noexcept { return static_cast<std::size_t>(weights_.size()); }
    [[nodiscard]] double power() const noexcept { return weights_.squaredNorm(); }

private:
    CVector weights_;
};

/// Per-receiver noise powers sigma_k^2, either common to all users or listed.
class NoisePowers {
public:
    NoisePowers(double common) : common_(common) // NOLINT: implicit by intent
    {
        if (!(common > 0.0) || !std::isfinite(common))
            throw std::invalid_argument("NoisePowers: sigma^2 must be positive");
    }

    explicit NoisePowers(std::vector<double> per_user) : per_user_(std::move(per_user))
    {
        if (per_user_.empty())
            throw std::invalid_argument("NoisePowers: empty list");
        for (double s : per_user_)
            if (!(s > 0.0) || !std::isfinite(s))
                throw std::invalid_argument("NoisePowers: sigma^2 must be positive");
    }

    [[nodiscard]] double at(std::size_t k) const
    {
        if (per_user_.empty())
            return common_;
        if (k >= per_user_.size())
            throw std::out_of_range("NoisePowers: receiver index out of range");
        return per_user_[k];
    }

    [[nodiscard]] bool is_uniform() const noexcept { return per_user_.empty(); }

    /// Noise list for a matrix with an appended row (the adversary uses the
    /// common value, or the last listed one).
    [[nodiscard]] NoisePowers extended(double adversary_noise) const
    {
        if (per_user_.empty())
            return *this;
        auto v = per_user_;
        v.push_back(adversary_noise);
        return NoisePowers(std::move(v));
    }

private:
    double common_ = 1.0;
    std::vector<double> per_user_;
};

/// Global CSI matrix H: one row per receiver, optionally with a tagged
/// adversary row.
class ChannelMatrix {
public:
    ChannelMatrix() = default;

    explicit ChannelMatrix(std::vector<ChannelVector> rows,
                           std::optional<std::size_t> adversary_index = std::nullopt)
        : rows_(std::move(rows)), adversary_(adversary_index)
    {
        if (rows_.empty())
            throw std::invalid_argument("ChannelMatrix: no receivers");
        for (const auto& r : rows_)
            if (r.n_tx() != rows_.front().n_tx())
                throw std::invalid_argument("ChannelMatrix: rows differ in antenna count");
        if (adversary_ && *adversary_ >= rows_.size())
            throw std::invalid_argument("ChannelMatrix: adversary index out of range");
    }

    [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }
    [[nodiscard]] std::size_t n_tx() const noexcept { return rows_.front().n_tx(); }
    [[nodiscard]] const ChannelVector& row(std::size_t k) const { return rows_.at(k); }
    [[nodiscard]] const std::vector<ChannelVector>& rows() const noexcept { return rows_; }
    [[nodiscard]] std::optional<std::size_t> adversary_index() const noexcept { return adversary_; }

    /// H with the adversary row appended and tagged.
    [[nodiscard]] ChannelMatrix with_adversary(const ChannelVector& reported) const
    {
        auto rows = rows_;
        rows.push_back(reported);
        return ChannelMatrix(std::move(rows), rows_.size());
    }

    /// Rows other than the adversary's, in order.
    [[nodiscard]] ChannelMatrix legitimate() const
    {
        if (!adversary_)
            return *this;
        std::vector<ChannelVector> rows;
        for (std::size_t k = 0; k < rows_.size(); ++k)
            if (k != *adversary_)
                rows.push_back(rows_[k]);
        return ChannelMatrix(std::move(rows));
    }

    /// First n rows as an untagged matrix.
    [[nodiscard]] ChannelMatrix leading(std::size_t n) const
    {
        if (n == 0 || n > rows_.size())
            throw std::invalid_argument("ChannelMatrix: bad row count");
        return ChannelMatrix(std::vector<ChannelVector>(rows_.begin(), rows_.begin() + static_cast<std::ptrdiff_t>(n)));
    }

    /// Dense K x N_t matrix with h_k as rows.
    [[nodiscard]] CMatrix dense() const
    {
        CMatrix h(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(n_tx()));
        for (std::size_t k = 0; k < size(); ++k)
            h.row(static_cast<Eigen::Index>(k)) = rows_[k].entries().transpose();
        return h;
    }

    /// Noise-weighted Gram sum_k h_k^H h_k / sigma_k^2.
    [[nodiscard]] CMatrix gram(const NoisePowers& noise) const
    {
        CMatrix g = CMatrix::Zero(static_cast<Eigen::Index>(n_tx()), static_cast<Eigen::Index>(n_tx()));
        for (std::size_t k = 0; k < size(); ++k)
            g += rows_[k].gram() / noise.at(k);
        return g;
    }

private:
    std::vector<ChannelVector> rows_;
    std::optional<std::size_t> adversary_;
};

struct SystemConfig {
    std::size_t n_tx = 1;
    std::size_t n_legit = 1;
    bool has_adversary = false;
    double power_budget = 100.0;
    double snr_target = 1.0;
    std::vector<double> noise_powers{1.0};

    [[nodiscard]] std::size_t total_receivers() const noexcept { return n_legit + (has_adversary ? 1 : 0); }

    void validate() const
    {
        if (n_tx < 1 || n_legit < 1)
            throw std::invalid_argument("SystemConfig: need at least one antenna and one receiver");
        if (!(power_budget > 0.0) || !(snr_target > 0.0))
            throw std::invalid_argument("SystemConfig: P and gamma must be positive");
        if (noise_powers.empty())
            throw std::invalid_argument("SystemConfig: no noise powers");
        for (double s : noise_powers)
            if (!(s > 0.0))
                throw std::invalid_argument("SystemConfig: sigma^2 must be positive");
    }
};

/// n_tx i.i.d. CN(0, 1) gains drawn from the given stream.
inline ChannelVector generate_channel(RandomStream stream, std::size_t n_tx)
{
    if (n_tx < 1)
        throw std::invalid_argument("generate_channel: n_tx must be >= 1");
    CVector h(static_cast<Eigen::Index>(n_tx));
    for (Eigen::Index i = 0; i < h.size(); ++i)
        h(i) = stream.complex_normal();
    return ChannelVector(std::move(h));
}

/// |h u|^2 / sigma^2.
inline double snr(const ChannelVector& h, const Beamformer& u, double noise)
{
    if (!(noise > 0.0))
        throw std::invalid_argument("snr: noise power must be positive");
    return std::norm(h.gain(u.weights())) / noise;
}

/// Per-receiver SNRs in row order.
inline std::vector<double> snr_all(const ChannelMatrix& h, const Beamformer& u, const NoisePowers& noise)
{
    std::vector<double> out(h.size());
    for (std::size_t k = 0; k < h.size(); ++k)
        out[k] = snr(h.row(k), u, noise.at(k));
    return out;
}

inline double min_snr(const ChannelMatrix& h, const Beamformer& u, const NoisePowers& noise)
{
    const auto s = snr_all(h, u, noise);
    return *std::min_element(s.begin(), s.end());
}

/// min_k log2(1 + SNR_k) in bits/s/Hz. Pass legitimate rows only.
inline double min_rate(const ChannelMatrix& h_legit, const Beamformer& u, const NoisePowers& noise)
{
    if (h_legit.size() == 0)
        throw std::invalid_argument("min_rate: empty receiver set");
    return std::log2(1.0 + min_snr(h_legit, u, noise));
}

/// SNR under the open-loop isotropic covariance (P / N_t) I.
inline double isotropic_baseline_snr(const ChannelVector& h, double power, std::size_t n_tx, double noise)
{
    if (power < 0.0 || n_tx < 1 || !(noise > 0.0))
        throw std::invalid_argument("isotropic_baseline_snr: bad arguments");
    return power / static_cast<double>(n_tx) * h.squared_norm() / noise;
}

} // namespace poisonfb

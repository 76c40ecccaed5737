#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "model.hpp"
#include "tridiag_eigen.hpp"

namespace esqpt {

// Cyclic-quench data: the system starts in eigenstate n0 of H_i, evolves
// under H_f for a time tau, and occupations are read off in the H_i basis.
// O(k,m) = <psi_k^i | psi_m^f>, c(m) = <psi_m^f | psi_n0^i> = O(n0, m).
struct QuenchEnsemble {
    Eigen::MatrixXd overlap;         // O, dim x dim, rows/columns orthonormal
    Eigen::VectorXd coeffs;          // c, dim
    Eigen::VectorXd final_energies;  // E_m^f, ascending
    int initial_index = 0;
    ModelParams params_i, params_f;
    bool near_degenerate_final = false;  // min final gap < 1e-10

    int dim() const { return static_cast<int>(coeffs.size()); }
};

struct EntropyTimeSeries {
    std::vector<double> taus;
    std::vector<double> values;  // S_d(tau)
    double tau0 = 0.0, dtau = 0.0, step = 0.0;
};

struct StrengthFunction {
    int k = 0;
    Eigen::VectorXd bin_centers;    // rescaled energy eps in [0, 1]
    Eigen::VectorXd weights;        // signed Omega_k per bin
    Eigen::VectorXd stick_eps;      // raw sticks: rescaled E_m^f
    Eigen::VectorXd stick_weights;  // raw sticks: O(k,m) c(m)
};

struct EquilibrationReport {
    double time_avg_entropy = 0.0;     // time average of the sampled series
    double diag_ensemble_entropy = 0.0;  // entropy of the infinite-time average
    double delta = 0.0;                // diag_ensemble_entropy - time_avg_entropy
    double bound = 1.0 - std::numbers::egamma;
    bool exceeds_bound = false;        // conjectured bound violated (warning-level)
    bool near_degenerate_final = false;
};

// Uniform grid tau0 + k*step covering [tau0, tau0 + dtau].
inline std::vector<double> make_time_grid(double tau0, double dtau, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("make_time_grid: step must be > 0");
    if (!(dtau >= 0.0)) throw std::invalid_argument("make_time_grid: dtau must be >= 0");
    const long n = static_cast<long>(std::floor((dtau + 1e-9) / step)) + 1;
    std::vector<double> taus(n);
    for (long k = 0; k < n; ++k) taus[k] = tau0 + k * step;
    return taus;
}

inline QuenchEnsemble quench_ensemble(const SpectralDecomposition& dec_i,
                                      const SpectralDecomposition& dec_f, int n0 = 0) {
    if (dec_i.dim() != dec_f.dim())
        throw std::invalid_argument("quench_ensemble: dimension mismatch");
    if (!dec_i.has_vectors() || !dec_f.has_vectors())
        throw std::invalid_argument("quench_ensemble: decompositions must carry eigenvectors");
    if (n0 < 0 || n0 >= dec_i.dim())
        throw std::invalid_argument("quench_ensemble: initial index out of range");

    QuenchEnsemble ens;
    ens.overlap.noalias() = dec_i.vectors.transpose() * dec_f.vectors;
    ens.coeffs = ens.overlap.row(n0).transpose();
    ens.final_energies = dec_f.energies;
    ens.initial_index = n0;
    ens.params_i = dec_i.source;
    ens.params_f = dec_f.source;

    const double norm = ens.coeffs.squaredNorm();
    if (std::abs(norm - 1.0) > 1e-12)
        throw std::runtime_error("quench_ensemble: coefficient norm off by " +
                                 std::to_string(norm - 1.0));
    for (int m = 0; m + 1 < ens.dim(); ++m)
        if (ens.final_energies[m + 1] - ens.final_energies[m] < 1e-10) {
            ens.near_degenerate_final = true;
            break;
        }
    return ens;
}

namespace detail {

inline void check_tau(double tau) {
    if (!std::isfinite(tau)) throw std::invalid_argument("occupations: tau must be finite");
}

// Entropy of one occupation column with the 0 ln 0 = 0 convention. Rounding
// can leave the sum a few ulp negative (C_k = 1 + eps at tau ~ 0); values in
// [-1e-12, 0) are floored to 0, anything lower signals real corruption.
inline double entropy_of_column(const double* c, int n, int dim, double tau) {
    double norm = 0.0, s = 0.0;
    for (int k = 0; k < n; ++k) {
        const double ck = c[k];
        norm += ck;
        if (ck > 0.0) s -= ck * std::log(ck);
    }
    if (std::abs(norm - 1.0) > 1e-10)
        throw std::runtime_error("diagonal entropy: occupation normalization off by " +
                                 std::to_string(norm - 1.0) + " at tau=" + std::to_string(tau));
    if (s < 0.0) {
        if (s < -1e-12)
            throw std::runtime_error("diagonal entropy: negative value " + std::to_string(s) +
                                     " at tau=" + std::to_string(tau));
        s = 0.0;
    }
    const double smax = std::log(static_cast<double>(dim));
    if (s > smax + 1e-10)
        throw std::runtime_error("diagonal entropy: value exceeds ln(dim) at tau=" +
                                 std::to_string(tau));
    return s;
}

}  // namespace detail

// C_k(tau) = |sum_m O(k,m) c(m) exp(-i E_m tau)|^2. Negative tau is accepted
// (C is even in tau for real O, c); the protocol itself only uses tau >= 0.
inline Eigen::VectorXd occupations(const QuenchEnsemble& ens, double tau) {
    detail::check_tau(tau);
    const int d = ens.dim();
    Eigen::VectorXd wc(d), ws(d);
    for (int m = 0; m < d; ++m) {
        const double arg = ens.final_energies[m] * tau;
        wc[m] = ens.coeffs[m] * std::cos(arg);
        ws[m] = ens.coeffs[m] * std::sin(arg);
    }
    Eigen::VectorXd ar = ens.overlap * wc;
    Eigen::VectorXd ai = ens.overlap * ws;
    Eigen::VectorXd c = ar.array().square() + ai.array().square();
    const double norm = c.sum();
    if (std::abs(norm - 1.0) > 1e-10)
        throw std::runtime_error("occupations: normalization off by " +
                                 std::to_string(norm - 1.0) + " at tau=" + std::to_string(tau));
    return c;
}

inline double diagonal_entropy(const Eigen::VectorXd& c) {
    const int n = static_cast<int>(c.size());
    if (n == 0) throw std::invalid_argument("diagonal_entropy: empty occupation vector");
    double norm = 0.0, s = 0.0;
    for (int k = 0; k < n; ++k) {
        if (c[k] < 0.0)
            throw std::invalid_argument("diagonal_entropy: negative occupation " +
                                        std::to_string(c[k]));
        norm += c[k];
        if (c[k] > 0.0) s -= c[k] * std::log(c[k]);
    }
    if (std::abs(norm - 1.0) > 1e-8)
        throw std::invalid_argument("diagonal_entropy: occupations not normalized, sum=" +
                                    std::to_string(norm));
    return std::max(s, 0.0);
}

// S_d over a tau grid. The amplitude matrix for a block of tau columns is
// two real GEMMs, A = M cos + i M sin with M(k,m) = O(k,m) c(m); on a uniform
// grid the per-column phases advance by a fixed complex rotation, reseeded
// from sin/cos at every block start so rounding drift stays below ~1e-13.
inline EntropyTimeSeries entropy_series(const QuenchEnsemble& ens,
                                        const std::vector<double>& taus) {
    if (taus.empty()) throw std::invalid_argument("entropy_series: empty tau grid");
    for (double t : taus) detail::check_tau(t);

    const int d = ens.dim();
    const long n = static_cast<long>(taus.size());
    const Eigen::MatrixXd M = ens.overlap * ens.coeffs.asDiagonal();

    EntropyTimeSeries series;
    series.taus = taus;
    series.values.resize(n);
    series.tau0 = taus.front();
    series.dtau = taus.back() - taus.front();
    series.step = n > 1 ? taus[1] - taus[0] : 0.0;

    bool uniform = n > 1;
    for (long k = 0; k + 1 < n && uniform; ++k)
        if (std::abs(taus[k + 1] - taus[k] - series.step) > 1e-9) uniform = false;

    constexpr long kBlock = 256;
    Eigen::MatrixXd cosb(d, kBlock), sinb(d, kBlock), are(d, kBlock), aim(d, kBlock);
    Eigen::ArrayXd ck(d);
    Eigen::ArrayXd qc(d), qs(d);
    if (uniform && n > 1) {
        for (int m = 0; m < d; ++m) {
            qc[m] = std::cos(ens.final_energies[m] * series.step);
            qs[m] = std::sin(ens.final_energies[m] * series.step);
        }
    }

    for (long b0 = 0; b0 < n; b0 += kBlock) {
        const long nb = std::min(kBlock, n - b0);
        for (int m = 0; m < d; ++m) {
            const double arg = ens.final_energies[m] * taus[b0];
            cosb(m, 0) = std::cos(arg);
            sinb(m, 0) = std::sin(arg);
        }
        for (long j = 1; j < nb; ++j) {
            if (uniform) {
                cosb.col(j).array() = cosb.col(j - 1).array() * qc - sinb.col(j - 1).array() * qs;
                sinb.col(j).array() = sinb.col(j - 1).array() * qc + cosb.col(j - 1).array() * qs;
            } else {
                for (int m = 0; m < d; ++m) {
                    const double arg = ens.final_energies[m] * taus[b0 + j];
                    cosb(m, j) = std::cos(arg);
                    sinb(m, j) = std::sin(arg);
                }
            }
        }
        are.leftCols(nb).noalias() = M * cosb.leftCols(nb);
        aim.leftCols(nb).noalias() = M * sinb.leftCols(nb);
        for (long j = 0; j < nb; ++j) {
            ck = are.col(j).array().square() + aim.col(j).array().square();
            series.values[b0 + j] = detail::entropy_of_column(ck.data(), d, d, taus[b0 + j]);
        }
    }
    return series;
}

// Survival probability C_{n0}(tau) = |sum_m c(m)^2 exp(-i E_m tau)|^2.
inline std::vector<double> survival_probability(const QuenchEnsemble& ens,
                                                const std::vector<double>& taus) {
    if (taus.empty()) throw std::invalid_argument("survival_probability: empty tau grid");
    const int d = ens.dim();
    Eigen::ArrayXd c2 = ens.coeffs.array().square();
    std::vector<double> out(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) {
        detail::check_tau(taus[i]);
        double re = 0.0, im = 0.0;
        for (int m = 0; m < d; ++m) {
            const double arg = ens.final_energies[m] * taus[i];
            re += c2[m] * std::cos(arg);
            im -= c2[m] * std::sin(arg);
        }
        out[i] = re * re + im * im;
    }
    return out;
}

// Signed weights O(k,m) c(m) binned over rescaled final energies; raw sticks
// kept alongside the histogram.
inline StrengthFunction strength_function(const QuenchEnsemble& ens, int k, int bins = 200) {
    if (k < 0 || k >= ens.dim())
        throw std::invalid_argument("strength_function: k out of range");
    if (bins < 10) throw std::invalid_argument("strength_function: need at least 10 bins");

    StrengthFunction sf;
    sf.k = k;
    sf.stick_eps = rescale_energies(ens.final_energies);
    sf.stick_weights =
        (ens.overlap.row(k).transpose().array() * ens.coeffs.array()).matrix();
    sf.bin_centers.resize(bins);
    for (int i = 0; i < bins; ++i) sf.bin_centers[i] = (i + 0.5) / bins;
    sf.weights = Eigen::VectorXd::Zero(bins);
    for (int m = 0; m < ens.dim(); ++m) {
        int b = static_cast<int>(sf.stick_eps[m] * bins);
        b = std::clamp(b, 0, bins - 1);
        sf.weights[b] += sf.stick_weights[m];
    }
    return sf;
}

// Time-averaged entropy of the series vs. the diagonal-ensemble entropy
// <S_d> = -sum_k Cbar_k ln Cbar_k with Cbar_k = sum_m O(k,m)^2 c(m)^2 (the
// infinite-time average, assuming nondegenerate final energies).
inline EquilibrationReport equilibration_report(const QuenchEnsemble& ens,
                                                const EntropyTimeSeries& series) {
    if (series.values.empty())
        throw std::invalid_argument("equilibration_report: empty series");
    Eigen::VectorXd cbar =
        ens.overlap.array().square().matrix() * ens.coeffs.array().square().matrix();
    EquilibrationReport rep;
    rep.diag_ensemble_entropy = diagonal_entropy(cbar);
    double acc = 0.0;
    for (double v : series.values) acc += v;
    rep.time_avg_entropy = acc / static_cast<double>(series.values.size());
    rep.delta = rep.diag_ensemble_entropy - rep.time_avg_entropy;
    rep.exceeds_bound = rep.delta > rep.bound + 1e-6;
    rep.near_degenerate_final = ens.near_degenerate_final;
    return rep;
}

}  // namespace esqpt

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace esqpt {

// Parameters of the collective-spin Hamiltonian
//   H = -(4/N)(1-alpha) Jx^2 + alpha (Jz + N/2)
// plus the quench field lambda (Jz + N/2). hbar = 1, everything dimensionless.
struct ModelParams {
    int n = 2;            // number of spins, positive even
    double alpha = 0.0;   // transverse field strength, in [0, 1]
    double lambda = 0.0;  // quench field strength, >= 0

    int block_dim() const { return n / 2 + 1; }

    void validate() const {
        if (n < 2 || n % 2 != 0)
            throw std::invalid_argument(
                "ModelParams: N must be a positive even integer, got " + std::to_string(n));
        if (!(alpha >= 0.0 && alpha <= 1.0))
            throw std::invalid_argument(
                "ModelParams: alpha must lie in [0, 1], got " + std::to_string(alpha));
        if (!(lambda >= 0.0))
            throw std::invalid_argument(
                "ModelParams: lambda must be >= 0, got " + std::to_string(lambda));
    }
};

// Even-parity block of H in the |j = N/2, m_z> basis restricted to
// m_z = -N/2, -N/2+2, ..., N/2, reindexed i = (m_z + N/2)/2. The block is
// exactly tridiagonal because Jx^2 couples m_z to m_z +- 2 only.
struct TridiagonalHamiltonian {
    ModelParams params;
    Eigen::VectorXd diag;     // block_dim entries
    Eigen::VectorXd offdiag;  // block_dim - 1 entries, coupling i <-> i+1

    int dim() const { return static_cast<int>(diag.size()); }
};

inline TridiagonalHamiltonian build_hamiltonian(const ModelParams& p) {
    p.validate();
    const int dim = p.block_dim();
    const double N = static_cast<double>(p.n);
    TridiagonalHamiltonian h{p, Eigen::VectorXd(dim), Eigen::VectorXd(dim - 1)};
    for (int i = 0; i < dim; ++i) {
        const double m = -N / 2 + 2.0 * i;
        const double q = 2.0 * (1.0 - p.alpha) * m / N + 2.0 * p.alpha - 1.0;
        h.diag[i] = q * (N / 2 + m) + p.alpha - 1.0 + p.lambda * (N / 2 + m);
    }
    for (int i = 0; i + 1 < dim; ++i) {
        const double m = -N / 2 + 2.0 * i;
        h.offdiag[i] = -(1.0 - p.alpha) / N * std::sqrt(N / 2 - m - 1.0) *
                       std::sqrt((N / 2 - m) * (N / 2 + m + 1.0) * (N / 2 + m + 2.0));
    }
    return h;
}

// Critical quench field lambda_c = (4 - 5 alpha)/2; the ESQPT exists only
// for alpha in (0, 4/5).
inline double critical_field(double alpha) {
    if (!(alpha > 0.0 && alpha < 0.8))
        throw std::invalid_argument(
            "critical_field: alpha must lie in (0, 0.8), got " + std::to_string(alpha));
    return (4.0 - 5.0 * alpha) / 2.0;
}

// Classical counterpart of H (+ lambda term) from the spin-coherent-state
// substitution Jx -> (N/2) sqrt(1-z^2) cos(phi), Jz -> (N/2) z, with
// z = 2 Jz/N in [-1, 1] and azimuth phi. Extensive (scales with N).
inline double classical_hamiltonian(double z, double phi, const ModelParams& p) {
    if (!(std::abs(z) <= 1.0))
        throw std::invalid_argument(
            "classical_hamiltonian: |z| must be <= 1, got " + std::to_string(z));
    const double c = std::cos(phi);
    return p.n * (-(1.0 - p.alpha) * (1.0 - z * z) * c * c +
                  0.5 * (p.alpha + p.lambda) * (1.0 + z));
}

}  // namespace esqpt

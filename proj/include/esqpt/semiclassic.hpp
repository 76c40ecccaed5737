#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "model.hpp"
#include "tridiag_eigen.hpp"

namespace esqpt {

enum class DosNormalization {
    BlockDim,  // integral over the grid rescaled to the even-block dimension
    Raw        // spin-coherent measure N/(4 pi) dz dphi, no rescaling
};

struct DensityOfStates {
    Eigen::VectorXd edges;  // bins+1 uniform energy bin edges
    Eigen::VectorXd nu;     // density of states per bin
    DosNormalization normalization = DosNormalization::BlockDim;

    int bins() const { return static_cast<int>(nu.size()); }
    double bin_width() const { return edges[1] - edges[0]; }
    double total_mass() const { return nu.sum() * bin_width(); }
    double mean_energy() const {
        double m = 0.0, w = 0.0;
        for (int i = 0; i < bins(); ++i) {
            const double c = 0.5 * (edges[i] + edges[i + 1]);
            m += c * nu[i];
            w += nu[i];
        }
        return m / w;
    }
};

namespace detail {

inline void check_edges(const Eigen::VectorXd& edges) {
    if (edges.size() < 3) throw std::invalid_argument("density grid needs at least 2 bins");
    for (int i = 0; i + 1 < edges.size(); ++i)
        if (!(edges[i + 1] > edges[i]))
            throw std::invalid_argument("density grid edges must be strictly increasing");
}

}  // namespace detail

// Semiclassical nu(E): histogram of H_cl over a uniform midpoint grid in
// (z, phi) with the phase-space cell weight N/(4 pi) dz dphi. Deterministic
// for fixed resolution; phi_offset shifts the phi grid (periodicity checks).
inline DensityOfStates density_of_states(const ModelParams& params,
                                         const Eigen::VectorXd& edges, long nz = 2048,
                                         long nphi = 2048,
                                         DosNormalization norm = DosNormalization::BlockDim,
                                         double phi_offset = 0.0) {
    params.validate();
    detail::check_edges(edges);
    if (nz < 1 || nphi < 1 || nz * nphi < 10000)
        throw std::invalid_argument("density_of_states: resolution below 1e4 cells");

    const int bins = static_cast<int>(edges.size()) - 1;
    const double e0 = edges[0];
    const double h = (edges[bins] - e0) / bins;
    const double two_pi = 2.0 * std::numbers::pi;
    const double cell = (2.0 / nz) * (two_pi / nphi) * params.n / (4.0 * std::numbers::pi);

    Eigen::VectorXd hist = Eigen::VectorXd::Zero(bins);
    for (long iz = 0; iz < nz; ++iz) {
        const double z = -1.0 + (iz + 0.5) * 2.0 / nz;
        for (long ip = 0; ip < nphi; ++ip) {
            const double phi = phi_offset + (ip + 0.5) * two_pi / nphi;
            const double e = classical_hamiltonian(z, phi, params);
            const int b = static_cast<int>((e - e0) / h);
            if (b >= 0 && b < bins)
                hist[b] += 1.0;
            else if (e == edges[bins])
                hist[bins - 1] += 1.0;
        }
    }

    DensityOfStates dos;
    dos.edges = edges;
    dos.normalization = norm;
    dos.nu = hist * (cell / h);
    if (norm == DosNormalization::BlockDim) {
        const double mass = dos.nu.sum() * h;
        if (!(mass > 0.0))
            throw std::runtime_error("density_of_states: no phase-space weight inside grid");
        dos.nu *= params.block_dim() / mass;
    }
    return dos;
}

// Quantum nu(E): eigenvalue histogram over [E_0, E_max], mass = dim exactly
// (the top edge is inclusive).
inline DensityOfStates quantum_dos_histogram(const SpectralDecomposition& dec, int bins = 200) {
    const int d = dec.dim();
    if (d < 50) throw std::invalid_argument("quantum_dos_histogram: need dim >= 50");
    if (bins < 2) throw std::invalid_argument("quantum_dos_histogram: need at least 2 bins");
    const double e0 = dec.energies[0];
    const double span = dec.energies[d - 1] - e0;
    if (!(span > 0.0))
        throw std::invalid_argument("quantum_dos_histogram: degenerate spectrum span");

    DensityOfStates dos;
    dos.edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i) dos.edges[i] = e0 + span * i / bins;
    dos.edges[bins] = dec.energies[d - 1];
    dos.nu = Eigen::VectorXd::Zero(bins);
    const double h = span / bins;
    for (int k = 0; k < d; ++k) {
        // multiply before dividing: keeps exactly spaced spectra (alpha=1)
        // on their bin boundaries instead of rounding them one bin down
        int b = static_cast<int>((dec.energies[k] - e0) * bins / span);
        b = std::clamp(b, 0, bins - 1);
        dos.nu[b] += 1.0;
    }
    dos.nu /= h;
    dos.normalization = DosNormalization::BlockDim;
    return dos;
}

// Convenience overload: eigenvalues already in hand (values-only path).
inline DensityOfStates quantum_dos_histogram(const Eigen::VectorXd& energies, int bins = 200) {
    SpectralDecomposition dec;
    dec.energies = energies;
    return quantum_dos_histogram(dec, bins);
}

}  // namespace esqpt

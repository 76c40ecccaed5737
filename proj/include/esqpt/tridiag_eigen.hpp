#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "model.hpp"

namespace esqpt {

struct SpectralDecomposition {
    Eigen::VectorXd energies;  // ascending
    Eigen::MatrixXd vectors;   // column k = eigenvector of energies[k]; empty if values-only
    ModelParams source;

    int dim() const { return static_cast<int>(energies.size()); }
    bool has_vectors() const { return vectors.size() > 0; }
};

namespace detail {

// Implicit-shift QL with Wilkinson shifts for a real symmetric tridiagonal
// matrix (EISPACK tql2 lineage). d holds the diagonal and is overwritten
// with unordered eigenvalues; e holds the subdiagonal in e[0..n-2] and is
// destroyed (e[n-1] is workspace). When v is non-null the Givens rotations
// are accumulated into its columns, so passing the identity yields the
// eigenvector matrix. Each eigenvalue gets at most 50 sweeps.
inline void ql_implicit_shift(Eigen::VectorXd& d, Eigen::VectorXd& e, Eigen::MatrixXd* v,
                              const std::string& provenance) {
    const int n = static_cast<int>(d.size());
    if (n <= 1) return;
    e[n - 1] = 0.0;
    const double eps = std::numeric_limits<double>::epsilon();
    Eigen::VectorXd tmp;
    if (v) tmp.resize(n);
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (++iter > 50)
                    throw std::runtime_error(
                        "eigh_tridiagonal: QL failed to converge within 50 sweeps (" +
                        provenance + ")");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));  // Wilkinson shift
                double s = 1.0, c = 1.0, p = 0.0;
                int i = m - 1;
                for (; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {  // rotation underflowed; split and retry
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    if (v) {
                        tmp = v->col(i + 1);
                        v->col(i + 1) = s * v->col(i) + c * tmp;
                        v->col(i) = c * v->col(i) - s * tmp;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

inline std::string provenance_of(const TridiagonalHamiltonian& h) {
    return "N=" + std::to_string(h.params.n) + " alpha=" + std::to_string(h.params.alpha) +
           " lambda=" + std::to_string(h.params.lambda) + " dim=" + std::to_string(h.dim());
}

inline void check_finite(const TridiagonalHamiltonian& h) {
    if (h.dim() < 1) throw std::invalid_argument("eigh_tridiagonal: empty matrix");
    if (!h.diag.allFinite() || !h.offdiag.allFinite())
        throw std::invalid_argument("eigh_tridiagonal: non-finite matrix entries (" +
                                    provenance_of(h) + ")");
}

}  // namespace detail

// All eigenpairs, energies ascending. Deterministic sign convention: the
// largest-magnitude component of every eigenvector is positive, ties broken
// by the lowest index, so overlap matrices reproduce bit-for-bit.
inline SpectralDecomposition eigh_tridiagonal(const TridiagonalHamiltonian& h) {
    detail::check_finite(h);
    const int n = h.dim();
    Eigen::VectorXd d = h.diag;
    Eigen::VectorXd e(n);
    e.head(n - 1) = h.offdiag;
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    detail::ql_implicit_shift(d, e, &v, detail::provenance_of(h));

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });

    SpectralDecomposition dec;
    dec.source = h.params;
    dec.energies.resize(n);
    dec.vectors.resize(n, n);
    for (int k = 0; k < n; ++k) {
        dec.energies[k] = d[idx[k]];
        dec.vectors.col(k) = v.col(idx[k]);
        int imax = 0;
        double amax = -1.0;
        for (int i = 0; i < n; ++i) {
            const double a = std::abs(dec.vectors(i, k));
            if (a > amax) {
                amax = a;
                imax = i;
            }
        }
        if (dec.vectors(imax, k) < 0.0) dec.vectors.col(k) = -dec.vectors.col(k);
    }
    return dec;
}

// Eigenvalues only (no rotation accumulation); same QL core, ascending.
inline Eigen::VectorXd tridiagonal_eigenvalues(const TridiagonalHamiltonian& h) {
    detail::check_finite(h);
    const int n = h.dim();
    Eigen::VectorXd d = h.diag;
    Eigen::VectorXd e(n);
    e.head(n - 1) = h.offdiag;
    detail::ql_implicit_shift(d, e, nullptr, detail::provenance_of(h));
    std::sort(d.data(), d.data() + n);
    return d;
}

// Rescaled energies eps_k = (E_k - E_0) / (E_max - E_0) in [0, 1].
inline Eigen::VectorXd rescale_energies(const Eigen::VectorXd& energies) {
    const int n = static_cast<int>(energies.size());
    if (n < 2) throw std::invalid_argument("rescale_energies: need at least 2 energies");
    const double span = energies[n - 1] - energies[0];
    if (!(span > 0.0))
        throw std::invalid_argument("rescale_energies: degenerate spectrum span");
    return (energies.array() - energies[0]) / span;
}

inline Eigen::VectorXd rescale_energies(const SpectralDecomposition& dec) {
    return rescale_energies(dec.energies);
}

}  // namespace esqpt

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include <esqpt/model.hpp>
#include <esqpt/tridiag_eigen.hpp>

using namespace esqpt;
using Catch::Matchers::WithinAbs;

namespace {

// Independent oracle: Sturm-sequence bisection for symmetric tridiagonal
// eigenvalues. Counts eigenvalues below x via the sign changes of the
// leading-principal-minor recursion.
int count_below(const Eigen::VectorXd& d, const Eigen::VectorXd& e, double x) {
    const int n = static_cast<int>(d.size());
    int count = 0;
    double q = d[0] - x;
    if (q < 0) ++count;
    for (int i = 1; i < n; ++i) {
        const double e2 = e[i - 1] * e[i - 1];
        double denom = q;
        if (denom == 0.0) denom = 1e-300;
        q = d[i] - x - e2 / denom;
        if (q < 0) ++count;
    }
    return count;
}

std::vector<double> sturm_eigenvalues(const Eigen::VectorXd& d, const Eigen::VectorXd& e) {
    const int n = static_cast<int>(d.size());
    double rad = 0.0;
    for (int i = 0; i < n; ++i) {
        double r = std::abs(d[i]);
        if (i > 0) r += std::abs(e[i - 1]);
        if (i + 1 < n) r += std::abs(e[i]);
        rad = std::max(rad, r);
    }
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) {
        double lo = -rad - 1.0, hi = rad + 1.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (count_below(d, e, mid) <= k) lo = mid;
            else hi = mid;
            if (hi - lo < 1e-13 * std::max(1.0, rad)) break;
        }
        out[k] = 0.5 * (lo + hi);
    }
    return out;
}

// Dense Hamiltonian on the full (N+1)-dimensional j = N/2 space, both
// parities, m_z = -N/2 .. N/2 in steps of 1.
Eigen::MatrixXd dense_full_hamiltonian(int n, double alpha, double lambda) {
    const int dim = n + 1;
    const double N = n;
    const double j = N / 2;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    auto jp = [&](double m) { return std::sqrt(j * (j + 1) - m * (m + 1)); };  // <m+1|J+|m>
    for (int i = 0; i < dim; ++i) {
        const double m = -j + i;
        // Jx^2 = (J+^2 + J-^2 + J+J- + J-J+)/4
        const double diagxx = 0.5 * (j * (j + 1) - m * m);
        h(i, i) = -4.0 * (1.0 - alpha) / N * diagxx + (alpha + lambda) * (m + j);
        if (i + 2 < dim) {
            const double off = jp(m) * jp(m + 1) / 4.0;
            h(i, i + 2) = -4.0 * (1.0 - alpha) / N * off;
            h(i + 2, i) = h(i, i + 2);
        }
    }
    return h;
}

}  // namespace

TEST_CASE("diagonal input passes straight through") {
    TridiagonalHamiltonian h;
    h.params = {4, 0.5, 0.0};
    h.diag = Eigen::Vector3d(3.0, 1.0, 2.0);
    h.offdiag = Eigen::Vector2d(0.0, 0.0);
    auto dec = eigh_tridiagonal(h);
    CHECK(dec.energies[0] == 1.0);
    CHECK(dec.energies[1] == 2.0);
    CHECK(dec.energies[2] == 3.0);
    // permuted identity eigenvectors with positive sign
    CHECK(dec.vectors(1, 0) == 1.0);
    CHECK(dec.vectors(2, 1) == 1.0);
    CHECK(dec.vectors(0, 2) == 1.0);
}

TEST_CASE("N=2 closed form") {
    auto dec = eigh_tridiagonal(build_hamiltonian({2, 0.4, 0.0}));
    CHECK_THAT(dec.energies[0], WithinAbs((-0.4 - std::sqrt(2.08)) / 2, 1e-12));
    CHECK_THAT(dec.energies[1], WithinAbs((-0.4 + std::sqrt(2.08)) / 2, 1e-12));
}

TEST_CASE("frozen spectra at N=8") {
    {
        const double expect[] = {-3.352636212314406, -1.3323296251470143,
                                 -0.17435520707158414, 0.9896740869353893,
                                 2.8696469575976242};
        auto dec = eigh_tridiagonal(build_hamiltonian({8, 0.4, 0.0}));
        for (int i = 0; i < 5; ++i) CHECK_THAT(dec.energies[i], WithinAbs(expect[i], 1e-10));
    }
    {
        const double expect[] = {-1.7348862324330128, -0.057646284523343416,
                                 2.812008163031341, 6.890950608975222, 11.839573744949758};
        auto dec = eigh_tridiagonal(build_hamiltonian({8, 0.25, 1.3}));
        for (int i = 0; i < 5; ++i) CHECK_THAT(dec.energies[i], WithinAbs(expect[i], 1e-10));
    }
}

TEST_CASE("random tridiagonal matrices vs Sturm bisection oracle") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_int_distribution<int> dims(2, 50);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = dims(rng);
        TridiagonalHamiltonian h;
        h.params = {4, 0.5, 0.0};
        h.diag.resize(n);
        h.offdiag.resize(n - 1);
        for (int i = 0; i < n; ++i) h.diag[i] = u(rng);
        for (int i = 0; i < n - 1; ++i) h.offdiag[i] = u(rng);
        auto dec = eigh_tridiagonal(h);
        auto ref = sturm_eigenvalues(h.diag, h.offdiag);
        for (int k = 0; k < n; ++k) CHECK_THAT(dec.energies[k], WithinAbs(ref[k], 1e-10));
        CHECK(std::is_sorted(dec.energies.data(), dec.energies.data() + n));
    }
}

TEST_CASE("orthonormality and reconstruction residuals at N=120") {
    auto h = build_hamiltonian({120, 0.4, 0.3});
    auto dec = eigh_tridiagonal(h);
    const int n = dec.dim();

    Eigen::MatrixXd gram = dec.vectors.transpose() * dec.vectors;
    CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);

    const double emax = dec.energies.cwiseAbs().maxCoeff();
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXd v = dec.vectors.col(k);
        Eigen::VectorXd hv(n);
        for (int i = 0; i < n; ++i) {
            double acc = h.diag[i] * v[i];
            if (i > 0) acc += h.offdiag[i - 1] * v[i - 1];
            if (i + 1 < n) acc += h.offdiag[i] * v[i + 1];
            hv[i] = acc;
        }
        CHECK((hv - dec.energies[k] * v).norm() <= 1e-9 * emax);
    }
}

TEST_CASE("sign convention: largest-magnitude component positive") {
    auto dec = eigh_tridiagonal(build_hamiltonian({60, 0.3, 0.8}));
    for (int k = 0; k < dec.dim(); ++k) {
        int imax = 0;
        for (int i = 0; i < dec.dim(); ++i)
            if (std::abs(dec.vectors(i, k)) > std::abs(dec.vectors(imax, k))) imax = i;
        CHECK(dec.vectors(imax, k) > 0.0);
    }
}

TEST_CASE("values-only path equals the full decomposition's energies") {
    auto h = build_hamiltonian({80, 0.35, 0.6});
    auto dec = eigh_tridiagonal(h);
    auto vals = tridiagonal_eigenvalues(h);
    for (int k = 0; k < dec.dim(); ++k) CHECK(vals[k] == dec.energies[k]);
}

TEST_CASE("even block spectrum embeds in the dense full-space spectrum") {
    for (int n : {8, 12, 16}) {
        auto dec = eigh_tridiagonal(build_hamiltonian({n, 0.4, 0.9}));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(
            dense_full_hamiltonian(n, 0.4, 0.9));
        const Eigen::VectorXd& all = full.eigenvalues();
        for (int k = 0; k < dec.dim(); ++k) {
            double best = 1e300;
            for (int j = 0; j < all.size(); ++j)
                best = std::min(best, std::abs(all[j] - dec.energies[k]));
            CHECK(best <= 1e-9);
        }
    }
}

TEST_CASE("rescale_energies") {
    Eigen::Vector3d e(-1.0, 0.0, 3.0);
    Eigen::VectorXd r = rescale_energies(e);
    CHECK(r[0] == 0.0);
    CHECK_THAT(r[1], WithinAbs(0.25, 1e-15));
    CHECK(r[2] == 1.0);

    auto dec = eigh_tridiagonal(build_hamiltonian({50, 0.4, 0.0}));
    Eigen::VectorXd eps = rescale_energies(dec);
    CHECK(eps[0] == 0.0);
    CHECK(eps[dec.dim() - 1] == 1.0);
    CHECK(std::is_sorted(eps.data(), eps.data() + dec.dim()));
    // the ESQPT critical energy E_c = 0 sits strictly inside the spectrum
    const double eps_c = (0.0 - dec.energies[0]) /
                         (dec.energies[dec.dim() - 1] - dec.energies[0]);
    CHECK(eps_c > 0.0);
    CHECK(eps_c < 1.0);

    Eigen::VectorXd flat = Eigen::VectorXd::Constant(4, 2.5);
    CHECK_THROWS_AS(rescale_energies(flat), std::invalid_argument);
    Eigen::VectorXd one(1);
    one << 1.0;
    CHECK_THROWS_AS(rescale_energies(one), std::invalid_argument);
}

TEST_CASE("orthonormality residual at N=1000") {
    auto dec = eigh_tridiagonal(build_hamiltonian({1000, 0.4, 0.0}));
    const int n = dec.dim();
    Eigen::MatrixXd gram = dec.vectors.transpose() * dec.vectors;
    CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);
}

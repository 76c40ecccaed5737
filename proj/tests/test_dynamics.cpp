#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include <esqpt/dynamics.hpp>
#include <esqpt/model.hpp>
#include <esqpt/tridiag_eigen.hpp>

using namespace esqpt;
using Catch::Matchers::WithinAbs;

namespace {

QuenchEnsemble make_ensemble(int n, double alpha, double lambda, int n0 = 0) {
    auto dec_i = eigh_tridiagonal(build_hamiltonian({n, alpha, 0.0}));
    auto dec_f = eigh_tridiagonal(build_hamiltonian({n, alpha, lambda}));
    return quench_ensemble(dec_i, dec_f, n0);
}

}  // namespace

TEST_CASE("make_time_grid") {
    auto g = make_time_grid(0.0, 400.0, 0.05);
    CHECK(g.size() == 8001);
    CHECK(g.front() == 0.0);
    CHECK_THAT(g.back(), WithinAbs(400.0, 1e-9));

    auto w = make_time_grid(1e4, 1e4, 0.05);
    CHECK(w.size() == 200001);
    CHECK(w.front() == 1e4);

    CHECK(make_time_grid(5.0, 0.0, 1.0).size() == 1);
    CHECK_THROWS_AS(make_time_grid(0.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_time_grid(0.0, -1.0, 0.1), std::invalid_argument);
}

TEST_CASE("quench_ensemble construction and validation") {
    auto dec_i = eigh_tridiagonal(build_hamiltonian({8, 0.4, 0.0}));
    auto dec_f = eigh_tridiagonal(build_hamiltonian({8, 0.4, 1.0}));

    auto ens = quench_ensemble(dec_i, dec_f, 0);
    CHECK(ens.dim() == 5);
    CHECK(ens.initial_index == 0);
    CHECK_THAT(ens.coeffs.squaredNorm(), WithinAbs(1.0, 1e-12));
    // O has orthonormal rows and columns
    Eigen::MatrixXd g = ens.overlap * ens.overlap.transpose();
    CHECK((g - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(ens.coeffs.isApprox(ens.overlap.row(0).transpose()));
    CHECK_FALSE(ens.near_degenerate_final);

    auto small = eigh_tridiagonal(build_hamiltonian({6, 0.4, 1.0}));
    CHECK_THROWS_AS(quench_ensemble(dec_i, small, 0), std::invalid_argument);
    CHECK_THROWS_AS(quench_ensemble(dec_i, dec_f, -1), std::invalid_argument);
    CHECK_THROWS_AS(quench_ensemble(dec_i, dec_f, 5), std::invalid_argument);

    SpectralDecomposition bare;
    bare.energies = dec_f.energies;
    CHECK_THROWS_AS(quench_ensemble(dec_i, bare, 0), std::invalid_argument);
}

TEST_CASE("near-degenerate final spectrum is flagged") {
    SpectralDecomposition dec;
    dec.energies = Eigen::Vector3d(0.0, 5e-11, 1.0);
    dec.vectors = Eigen::MatrixXd::Identity(3, 3);
    auto ens = quench_ensemble(dec, dec, 0);
    CHECK(ens.near_degenerate_final);
}

TEST_CASE("occupations at tau=0 reduce to the initial state") {
    auto ens = make_ensemble(40, 0.4, 1.0, 3);
    Eigen::VectorXd c = occupations(ens, 0.0);
    CHECK_THAT(c[3], WithinAbs(1.0, 1e-12));
    for (int k = 0; k < ens.dim(); ++k)
        if (k != 3) CHECK(std::abs(c[k]) <= 1e-12);
    CHECK(diagonal_entropy(c) <= 1e-10);
}

TEST_CASE("occupations stay normalized and even in tau") {
    auto ens = make_ensemble(60, 0.3, 0.8);
    for (double tau : {0.37, 4.2, 55.0, 1234.5}) {
        Eigen::VectorXd c = occupations(ens, tau);
        CHECK_THAT(c.sum(), WithinAbs(1.0, 1e-10));
        CHECK(c.minCoeff() >= 0.0);
        Eigen::VectorXd cm = occupations(ens, -tau);
        CHECK((c - cm).cwiseAbs().maxCoeff() <= 1e-13);
    }
    CHECK_THROWS_AS(occupations(ens, std::numeric_limits<double>::quiet_NaN()),
                    std::invalid_argument);
    CHECK_THROWS_AS(occupations(ens, std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
}

TEST_CASE("trivial quench is stationary") {
    auto dec = eigh_tridiagonal(build_hamiltonian({30, 0.4, 0.0}));
    auto ens = quench_ensemble(dec, dec, 2);
    for (double tau : {0.0, 1.7, 300.0}) {
        Eigen::VectorXd c = occupations(ens, tau);
        CHECK_THAT(c[2], WithinAbs(1.0, 1e-10));
    }
    auto series = entropy_series(ens, make_time_grid(0.0, 50.0, 0.5));
    for (double s : series.values) CHECK(s <= 1e-8);
}

TEST_CASE("spectral kernel matches dense unitary propagation at N=12") {
    const int n0 = 1;
    ModelParams pi{12, 0.4, 0.0}, pf{12, 0.4, 1.3};
    auto ens = quench_ensemble(eigh_tridiagonal(build_hamiltonian(pi)),
                               eigh_tridiagonal(build_hamiltonian(pf)), n0);
    const int d = ens.dim();

    auto dense_of = [](const TridiagonalHamiltonian& h) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(h.dim(), h.dim());
        for (int i = 0; i < h.dim(); ++i) {
            m(i, i) = h.diag[i];
            if (i + 1 < h.dim()) {
                m(i, i + 1) = h.offdiag[i];
                m(i + 1, i) = h.offdiag[i];
            }
        }
        return m;
    };
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> si(dense_of(build_hamiltonian(pi)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sf(dense_of(build_hamiltonian(pf)));

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ut(0.0, 100.0);
    const Eigen::VectorXd psi0 = si.eigenvectors().col(n0);
    for (int rep = 0; rep < 50; ++rep) {
        const double tau = ut(rng);
        Eigen::VectorXcd phase(d);
        for (int m = 0; m < d; ++m)
            phase[m] = std::polar(1.0, -sf.eigenvalues()[m] * tau);
        Eigen::VectorXcd psi =
            sf.eigenvectors().cast<std::complex<double>>() *
            (phase.array() * (sf.eigenvectors().transpose() * psi0).cast<std::complex<double>>().array())
                .matrix();
        Eigen::VectorXd ref =
            (si.eigenvectors().transpose().cast<std::complex<double>>() * psi).cwiseAbs2();

        Eigen::VectorXd got = occupations(ens, tau);
        CHECK((got - ref).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("diagonal_entropy values and validation") {
    Eigen::VectorXd u = Eigen::VectorXd::Constant(4, 0.25);
    CHECK_THAT(diagonal_entropy(u), WithinAbs(std::log(4.0), 1e-14));

    Eigen::Vector2d two(0.9, 0.1);
    CHECK_THAT(diagonal_entropy(two), WithinAbs(0.3250829733914483, 1e-12));

    Eigen::Vector3d pure(0.0, 1.0, 0.0);
    CHECK(diagonal_entropy(pure) == 0.0);

    Eigen::Vector2d neg(1.1, -0.1);
    CHECK_THROWS_AS(diagonal_entropy(neg), std::invalid_argument);
    Eigen::Vector2d off(0.6, 0.6);
    CHECK_THROWS_AS(diagonal_entropy(off), std::invalid_argument);
    CHECK_THROWS_AS(diagonal_entropy(Eigen::VectorXd()), std::invalid_argument);
}

TEST_CASE("entropy_series agrees with per-tau occupations") {
    auto ens = make_ensemble(100, 0.4, 1.0);

    SECTION("uniform grid spanning several blocks") {
        auto taus = make_time_grid(0.0, 500.0, 0.37);
        auto series = entropy_series(ens, taus);
        REQUIRE(series.values.size() == taus.size());
        CHECK(series.values[0] <= 1e-10);
        for (std::size_t i = 0; i < taus.size(); i += 97) {
            const double ref = diagonal_entropy(occupations(ens, taus[i]));
            CHECK_THAT(series.values[i], WithinAbs(ref, 1e-9));
        }
        const double smax = std::log(static_cast<double>(ens.dim()));
        for (double s : series.values) {
            CHECK(s >= 0.0);
            CHECK(s <= smax);
        }
    }

    SECTION("non-uniform grid takes the direct path") {
        std::vector<double> taus(300);
        for (std::size_t k = 0; k < taus.size(); ++k)
            taus[k] = 0.01 * static_cast<double>(k) * static_cast<double>(k);
        auto series = entropy_series(ens, taus);
        for (std::size_t i = 0; i < taus.size(); i += 41) {
            const double ref = diagonal_entropy(occupations(ens, taus[i]));
            CHECK_THAT(series.values[i], WithinAbs(ref, 1e-9));
        }
    }

    SECTION("validation") {
        CHECK_THROWS_AS(entropy_series(ens, {}), std::invalid_argument);
        CHECK_THROWS_AS(entropy_series(ens, {0.0, std::numeric_limits<double>::infinity()}),
                        std::invalid_argument);
    }
}

TEST_CASE("survival probability") {
    auto ens = make_ensemble(80, 0.35, 1.2, 2);
    auto taus = make_time_grid(0.0, 40.0, 0.37);
    auto surv = survival_probability(ens, taus);
    REQUIRE(surv.size() == taus.size());
    CHECK_THAT(surv[0], WithinAbs(1.0, 1e-12));
    for (std::size_t i = 0; i < taus.size(); i += 13) {
        CHECK(surv[i] >= 0.0);
        CHECK(surv[i] <= 1.0 + 1e-12);
        // survival equals the n0 component of the cyclic occupations
        Eigen::VectorXd c = occupations(ens, taus[i]);
        CHECK_THAT(surv[i], WithinAbs(c[2], 1e-12));
    }

    auto dec = eigh_tridiagonal(build_hamiltonian({20, 0.4, 0.0}));
    auto triv = quench_ensemble(dec, dec, 0);
    for (double s : survival_probability(triv, taus)) CHECK_THAT(s, WithinAbs(1.0, 1e-10));

    CHECK_THROWS_AS(survival_probability(ens, {}), std::invalid_argument);
}

TEST_CASE("strength function sticks and bins") {
    auto ens = make_ensemble(200, 0.4, 1.0);
    const int d = ens.dim();

    auto sf = strength_function(ens, 0, 50);
    CHECK(sf.bin_centers.size() == 50);
    CHECK_THAT(sf.bin_centers[0], WithinAbs(0.01, 1e-15));
    CHECK(sf.stick_eps.minCoeff() >= 0.0);
    CHECK(sf.stick_eps.maxCoeff() <= 1.0);
    // sum_m O(k,m) c(m) = delta_{k,n0}
    CHECK_THAT(sf.stick_weights.sum(), WithinAbs(1.0, 1e-10));
    CHECK_THAT(sf.weights.sum(), WithinAbs(1.0, 1e-10));
    auto sf3 = strength_function(ens, 3, 50);
    CHECK(std::abs(sf3.stick_weights.sum()) <= 1e-10);
    CHECK(std::abs(sf3.weights.sum()) <= 1e-10);

    CHECK_THROWS_AS(strength_function(ens, -1), std::invalid_argument);
    CHECK_THROWS_AS(strength_function(ens, d), std::invalid_argument);
    CHECK_THROWS_AS(strength_function(ens, 0, 5), std::invalid_argument);
}

TEST_CASE("trivial-quench strength function is a single unit stick") {
    auto dec = eigh_tridiagonal(build_hamiltonian({40, 0.4, 0.0}));
    auto ens = quench_ensemble(dec, dec, 4);
    auto sf = strength_function(ens, 4, 20);
    int nonzero = 0;
    for (int m = 0; m < sf.stick_weights.size(); ++m)
        if (std::abs(sf.stick_weights[m]) > 1e-12) ++nonzero;
    CHECK(nonzero == 1);
    CHECK_THAT(sf.stick_weights.cwiseAbs().maxCoeff(), WithinAbs(1.0, 1e-12));
}

TEST_CASE("strength function peaks at the critical energy for low k") {
    // ground-state cyclic quench at lambda_c: Omega_k concentrates where the
    // final spectrum piles up, i.e. at eps(E=0)
    auto ens = make_ensemble(1000, 0.4, 1.0);
    const int bins = 200;
    const double eps_c = (0.0 - ens.final_energies[0]) /
                         (ens.final_energies[ens.dim() - 1] - ens.final_energies[0]);
    const int bin_c = static_cast<int>(eps_c * bins);
    for (int k = 0; k < 5; ++k) {
        auto sf = strength_function(ens, k, bins);
        int bmax = 0;
        for (int b = 1; b < bins; ++b)
            if (std::abs(sf.weights[b]) > std::abs(sf.weights[bmax])) bmax = b;
        CHECK(std::abs(bmax - bin_c) <= 2);
    }
}

TEST_CASE("equilibration report") {
    SECTION("trivial quench has zero gap") {
        auto dec = eigh_tridiagonal(build_hamiltonian({24, 0.4, 0.0}));
        auto ens = quench_ensemble(dec, dec, 0);
        auto series = entropy_series(ens, make_time_grid(0.0, 30.0, 0.5));
        auto rep = equilibration_report(ens, series);
        CHECK(std::abs(rep.delta) <= 1e-8);
        CHECK_FALSE(rep.exceeds_bound);
        CHECK_THAT(rep.bound, WithinAbs(1.0 - 0.5772156649015329, 1e-15));
    }

    SECTION("diagonal ensemble matches the long-time average at N=8") {
        auto ens = make_ensemble(8, 0.4, 1.0);
        Eigen::VectorXd cbar =
            ens.overlap.array().square().matrix() * ens.coeffs.array().square().matrix();
        Eigen::VectorXd avg = Eigen::VectorXd::Zero(ens.dim());
        const auto taus = make_time_grid(0.0, 1e5, 0.37);
        for (double tau : taus) avg += occupations(ens, tau);
        avg /= static_cast<double>(taus.size());
        CHECK((avg - cbar).cwiseAbs().maxCoeff() <= 1e-3);
    }

    SECTION("entropy gap stays under the conjectured bound at criticality") {
        auto ens = make_ensemble(300, 0.4, 1.0);
        auto series = entropy_series(ens, make_time_grid(1e3, 1e3, 0.37));
        auto rep = equilibration_report(ens, series);
        CHECK(rep.delta >= 0.0);
        CHECK(rep.delta <= rep.bound + 1e-6);
        CHECK_FALSE(rep.exceeds_bound);
        CHECK(rep.time_avg_entropy > 0.0);
        CHECK(rep.diag_ensemble_entropy <= std::log(static_cast<double>(ens.dim())) + 1e-10);
    }

    CHECK_THROWS_AS(equilibration_report(make_ensemble(8, 0.4, 1.0), EntropyTimeSeries{}),
                    std::invalid_argument);
}

TEST_CASE("critical-quench survival probability decays and stays small", "[slow]") {
    auto ens = make_ensemble(1000, 0.4, 1.0);
    auto taus = make_time_grid(1e3, 9e3, 0.37);
    auto surv = survival_probability(ens, taus);
    double mean = 0.0;
    for (double s : surv) mean += s;
    mean /= static_cast<double>(surv.size());
    CHECK(mean < 0.1);
    CHECK(mean > 0.0);
}

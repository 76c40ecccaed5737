#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "betafit.hpp"
#include "dynamics.hpp"
#include "model.hpp"
#include "stats.hpp"
#include "tridiag_eigen.hpp"

namespace esqpt {

struct WindowConfig {
    double tau0 = 1e4;  // window start
    double dtau = 1e4;  // window length
    double step = 0.05;
    int bins = 100;
};

enum class PointStatus { Ok, Degenerate, Failed };

inline const char* to_string(PointStatus s) {
    switch (s) {
        case PointStatus::Ok: return "ok";
        case PointStatus::Degenerate: return "degenerate";
        default: return "failed";
    }
}

struct LambdaScan {
    double alpha = 0.0;
    int n = 0;
    std::vector<double> lambdas;
    std::vector<double> mu2, mu3, mu4;  // central moments of P(S_d) per lambda
    std::vector<double> rmse;           // R of the pinned-support beta fit per lambda
    std::vector<PointStatus> status;
    std::vector<std::string> messages;  // non-empty for failed points
    WindowConfig window;
};

struct CriticalEstimate {
    double alpha = 0.0;
    int n = 0;
    double lambda_mu2 = 0.0;   // argmin mu2, refined
    double lambda_mu3 = 0.0;   // argmax mu3 (cusp toward zero), refined
    double lambda_mu4 = 0.0;   // argmin mu4, refined
    double lambda_rmse = 0.0;  // argmin R, refined
    double lambda_analytic = 0.0;
    bool reliable = true;  // false if any extremum sits on the grid boundary
};

// Worker count: explicit request wins, then ESQPT_THREADS, then the
// hardware concurrency; always at least 1.
inline int resolve_thread_count(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ESQPT_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Full per-lambda pipeline: build + diagonalize H_f, quench ensemble,
// S_d series over the window, distribution, raw-sample moments, and the R
// of a beta fit with support pinned to the sample range. The H_i
// decomposition is shared read-only across worker threads; results land in
// pre-sized slots, so output is independent of the thread count.
inline LambdaScan lambda_scan(double alpha, int n, const std::vector<double>& lambdas,
                              const WindowConfig& window = {}, int threads = 0) {
    critical_field(alpha);  // also validates alpha in (0, 0.8)
    if (lambdas.empty()) throw std::invalid_argument("lambda_scan: empty lambda grid");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] >= 0.0 && lambdas[i] <= 2.5))
            throw std::invalid_argument("lambda_scan: lambda must lie in [0, 2.5]");
        if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
            throw std::invalid_argument("lambda_scan: lambda grid must be strictly increasing");
    }

    LambdaScan scan;
    scan.alpha = alpha;
    scan.n = n;
    scan.lambdas = lambdas;
    scan.window = window;
    const std::size_t np = lambdas.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    scan.mu2.assign(np, nan);
    scan.mu3.assign(np, nan);
    scan.mu4.assign(np, nan);
    scan.rmse.assign(np, nan);
    scan.status.assign(np, PointStatus::Failed);
    scan.messages.assign(np, "");

    const SpectralDecomposition dec_i =
        eigh_tridiagonal(build_hamiltonian({n, alpha, 0.0}));
    const std::vector<double> taus = make_time_grid(window.tau0, window.dtau, window.step);

    auto run_point = [&](std::size_t i) {
        try {
            const SpectralDecomposition dec_f =
                eigh_tridiagonal(build_hamiltonian({n, alpha, lambdas[i]}));
            const QuenchEnsemble ens = quench_ensemble(dec_i, dec_f);
            const EntropyTimeSeries series = entropy_series(ens, taus);
            const EmpiricalDistribution dist = empirical_distribution(series, window.bins);
            if (dist.degenerate) {
                scan.mu2[i] = 0.0;
                scan.mu3[i] = 0.0;
                scan.mu4[i] = 0.0;
                scan.status[i] = PointStatus::Degenerate;
                return;
            }
            scan.mu2[i] = central_moment(dist, 2);
            scan.mu3[i] = central_moment(dist, 3);
            scan.mu4[i] = central_moment(dist, 4);
            FitOptions fopt;
            fopt.pin_s0 = dist.sample_min;
            fopt.pin_sm = dist.sample_max;
            scan.rmse[i] = fit_beta(dist, fopt).rmse;
            scan.status[i] = PointStatus::Ok;
        } catch (const std::exception& e) {
            scan.status[i] = PointStatus::Failed;
            scan.messages[i] = e.what();
        }
    };

    const int nworkers =
        std::min<int>(resolve_thread_count(threads), static_cast<int>(np));
    if (nworkers <= 1) {
        for (std::size_t i = 0; i < np; ++i) run_point(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(nworkers);
        for (int w = 0; w < nworkers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < np; i = next.fetch_add(1))
                    run_point(i);
            });
        for (auto& t : pool) t.join();
    }
    return scan;
}

namespace detail {

// Vertex of the parabola through three equally spaced points around a grid
// extremum; falls back to the grid point when the curvature hint vanishes.
// The vertex provably lies within half a grid step of the discrete extremum.
inline double parabolic_refine(const std::vector<double>& xs, const std::vector<double>& ys,
                               std::size_t i) {
    if (i == 0 || i + 1 >= xs.size()) return xs[i];
    const double y0 = ys[i - 1], y1 = ys[i], y2 = ys[i + 1];
    const double den = y0 - 2.0 * y1 + y2;
    if (den == 0.0) return xs[i];
    const double h = 0.5 * (xs[i + 1] - xs[i - 1]);
    const double t = 0.5 * (y0 - y2) / den;
    return xs[i] + std::clamp(t, -0.5, 0.5) * h;
}

}  // namespace detail

// Extrema of the scan curves: argmin mu2, argmax mu3, argmin mu4, argmin R,
// each refined parabolically. Requires at least 5 usable points on each
// side of the analytic critical field; a boundary extremum only flags the
// estimate unreliable.
inline CriticalEstimate extract_critical(const LambdaScan& scan) {
    CriticalEstimate est;
    est.alpha = scan.alpha;
    est.n = scan.n;
    est.lambda_analytic = critical_field(scan.alpha);

    std::vector<double> xs;
    std::vector<std::size_t> src;
    for (std::size_t i = 0; i < scan.lambdas.size(); ++i)
        if (scan.status[i] == PointStatus::Ok) {
            xs.push_back(scan.lambdas[i]);
            src.push_back(i);
        }
    std::size_t below = 0, above = 0;
    for (double x : xs) (x < est.lambda_analytic ? below : above) += 1;
    if (below < 5 || above < 5)
        throw std::invalid_argument(
            "extract_critical: need >= 5 usable grid points on each side of lambda_c");

    auto locate = [&](const std::vector<double>& field, bool maximize) {
        std::vector<double> ys(xs.size());
        for (std::size_t j = 0; j < xs.size(); ++j)
            ys[j] = maximize ? -field[src[j]] : field[src[j]];
        std::size_t best = 0;
        for (std::size_t j = 1; j < ys.size(); ++j)
            if (ys[j] < ys[best]) best = j;
        if (best == 0 || best + 1 == ys.size()) est.reliable = false;
        return detail::parabolic_refine(xs, ys, best);
    };
    est.lambda_mu2 = locate(scan.mu2, false);
    est.lambda_mu3 = locate(scan.mu3, true);
    est.lambda_mu4 = locate(scan.mu4, false);
    est.lambda_rmse = locate(scan.rmse, false);
    return est;
}

}  // namespace esqpt

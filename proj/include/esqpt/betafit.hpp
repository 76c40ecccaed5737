#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stats.hpp"

namespace esqpt {

// Four-parameter beta distribution on [s0, sm] with shape parameters (a, b).
struct BetaParams {
    double a = 1.0, b = 1.0;
    double s0 = 0.0, sm = 1.0;

    void validate() const {
        if (!(a > 0.0) || !(b > 0.0))
            throw std::invalid_argument("BetaParams: shape parameters must be positive");
        if (!(sm > s0)) throw std::invalid_argument("BetaParams: requires sm > s0");
        if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(s0) || !std::isfinite(sm))
            throw std::invalid_argument("BetaParams: non-finite parameter");
    }
    double mean() const { return s0 + (sm - s0) * a / (a + b); }
    double variance() const {
        const double w = sm - s0;
        return w * w * a * b / ((a + b) * (a + b) * (a + b + 1.0));
    }
};

struct FitOptions {
    std::optional<double> pin_s0;  // fix the lower support bound
    std::optional<double> pin_sm;  // fix the upper support bound
    int quad_nodes = 512;
    int max_iterations = 2000;
    double simplex_tol = 1e-6;  // convergence on simplex diameter
};

struct FitResult {
    BetaParams params;
    double rmse = 0.0;  // Eq.-(12)-style R at the optimum, penalty-free
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;  // best objective value per iteration
};

namespace detail {

// Continued-fraction kernel for the regularized incomplete beta function
// (modified Lentz). Converges quickly for x < (a+1)/(a+b+2).
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-15, kFpMin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("regularized_incomplete_beta: continued fraction stalled at a=" +
                             std::to_string(a) + " b=" + std::to_string(b));
}

inline double log_beta_function(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

}  // namespace detail

// I_x(a, b), absolute error well below 1e-10 over the parameter ranges here.
inline double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("regularized_incomplete_beta: shapes must be positive");
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("regularized_incomplete_beta: x outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double front = std::exp(a * std::log(x) + b * std::log1p(-x) -
                                  detail::log_beta_function(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::betacf(a, b, x) / a;
    return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

// PDF per the four-parameter form; evaluated in the log domain so shapes
// around a ~ 23 stay comfortably inside double range.
inline double beta_pdf(double x, const BetaParams& p) {
    p.validate();
    if (!(x >= p.s0 && x <= p.sm))
        throw std::invalid_argument("beta_pdf: x outside the support [s0, sm]");
    const double w = p.sm - p.s0;
    const double u = (x - p.s0) / w;
    const double lognorm = detail::log_beta_function(p.a, p.b) + std::log(w);
    if (u == 0.0) {
        if (p.a > 1.0) return 0.0;
        if (p.a == 1.0) return std::exp(-lognorm);
        return std::numeric_limits<double>::infinity();
    }
    if (u == 1.0) {
        if (p.b > 1.0) return 0.0;
        if (p.b == 1.0) return std::exp(-lognorm);
        return std::numeric_limits<double>::infinity();
    }
    return std::exp((p.a - 1.0) * std::log(u) + (p.b - 1.0) * std::log1p(-u) - lognorm);
}

inline double beta_cdf(double x, const BetaParams& p) {
    p.validate();
    if (!(x >= p.s0 && x <= p.sm))
        throw std::invalid_argument("beta_cdf: x outside the support [s0, sm]");
    const double u = std::clamp((x - p.s0) / (p.sm - p.s0), 0.0, 1.0);
    return regularized_incomplete_beta(p.a, p.b, u);
}

// R = sqrt( (1/(sm-s0)) int_{s0}^{sm} (F - Phi_B)^2 dz ), composite midpoint
// rule; F is taken as 0 below and 1 above its sample range.
inline double rmse(const EmpiricalCdf& f, const BetaParams& p, int nodes = 512) {
    p.validate();
    if (nodes < 512) throw std::invalid_argument("rmse: need at least 512 quadrature nodes");
    const double w = p.sm - p.s0;
    double acc = 0.0;
    for (int i = 0; i < nodes; ++i) {
        const double z = p.s0 + w * (i + 0.5) / nodes;
        const double u = std::clamp((z - p.s0) / w, 0.0, 1.0);
        const double d = f(z) - regularized_incomplete_beta(p.a, p.b, u);
        acc += d * d;
    }
    return std::sqrt(acc / nodes);
}

namespace detail {

// Method-of-moments starting point; free support bounds start 5% beyond the
// sample range. Falls back to a = b = 2 if the pinned support puts the
// sample mean outside (s0, sm).
inline BetaParams moment_init(const EmpiricalDistribution& dist, const FitOptions& opt) {
    const double lo = dist.sample_min, hi = dist.sample_max;
    const double pad = 0.05 * (hi - lo);
    BetaParams p;
    p.s0 = opt.pin_s0 ? *opt.pin_s0 : lo - pad;
    p.sm = opt.pin_sm ? *opt.pin_sm : hi + pad;
    const double w = p.sm - p.s0;
    const double u = (dist.mean - p.s0) / w;
    const double v = dist.variance / (w * w);
    if (u > 0.0 && u < 1.0 && v > 0.0) {
        const double k = u * (1.0 - u) / v - 1.0;
        p.a = std::max(u * k, 0.1);
        p.b = std::max((1.0 - u) * k, 0.1);
    } else {
        p.a = p.b = 2.0;
    }
    return p;
}

struct BetaObjective {
    const EmpiricalCdf* f;
    double sample_min, sample_max;
    std::optional<double> pin_s0, pin_sm;
    int nodes;

    BetaParams unpack(const std::vector<double>& x) const {
        BetaParams p;
        p.a = x[0];
        p.b = x[1];
        std::size_t i = 2;
        p.s0 = pin_s0 ? *pin_s0 : x[i++];
        p.sm = pin_sm ? *pin_sm : x[i];
        return p;
    }

    double operator()(const std::vector<double>& x) const {
        BetaParams p = unpack(x);
        double pen = 0.0;
        if (p.a <= 0.0) {
            pen += 1e3 * (1.0 - p.a);
            p.a = 1e-6;
        }
        if (p.b <= 0.0) {
            pen += 1e3 * (1.0 - p.b);
            p.b = 1e-6;
        }
        const double scale = sample_max - sample_min;
        // sample-range constraints bind only the free support bounds; an
        // explicit pin is authoritative even if samples spill past it
        if (!pin_s0 && p.s0 > sample_min) pen += 1e3 * (p.s0 - sample_min) / scale;
        if (!pin_sm && p.sm < sample_max) pen += 1e3 * (sample_max - p.sm) / scale;
        if (p.sm - p.s0 < 1e-9 * std::max(1.0, scale)) return 1e6;
        return rmse(*f, p, nodes) + pen;
    }
};

// Nelder-Mead on an n-simplex: reflection 1, expansion 2, contraction 0.5,
// shrink 0.5. Stops when the simplex diameter (max distance to the best
// vertex, per coordinate) drops below tol.
template <class F>
inline int nelder_mead(F&& fn, std::vector<std::vector<double>>& simplex,
                       std::vector<double>& fvals, int max_iter, double tol,
                       std::vector<double>& trace, bool& converged) {
    const std::size_t npts = simplex.size();
    const std::size_t ndim = npts - 1;
    auto order = [&] {
        std::vector<std::size_t> idx(npts);
        for (std::size_t i = 0; i < npts; ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t p, std::size_t q) { return fvals[p] < fvals[q]; });
        std::vector<std::vector<double>> s2(npts);
        std::vector<double> f2(npts);
        for (std::size_t i = 0; i < npts; ++i) {
            s2[i] = simplex[idx[i]];
            f2[i] = fvals[idx[i]];
        }
        simplex.swap(s2);
        fvals.swap(f2);
    };
    order();
    converged = false;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        double diam = 0.0;
        for (std::size_t i = 1; i < npts; ++i)
            for (std::size_t j = 0; j < ndim; ++j)
                diam = std::max(diam, std::abs(simplex[i][j] - simplex[0][j]));
        if (diam < tol) {
            converged = true;
            break;
        }
        std::vector<double> centroid(ndim, 0.0);
        for (std::size_t i = 0; i + 1 < npts; ++i)
            for (std::size_t j = 0; j < ndim; ++j) centroid[j] += simplex[i][j];
        for (std::size_t j = 0; j < ndim; ++j) centroid[j] /= static_cast<double>(ndim);

        auto blend = [&](double t) {
            std::vector<double> x(ndim);
            for (std::size_t j = 0; j < ndim; ++j)
                x[j] = centroid[j] + t * (simplex[npts - 1][j] - centroid[j]);
            return x;
        };
        std::vector<double> xr = blend(-1.0);
        const double fr = fn(xr);
        if (fr < fvals[0]) {
            std::vector<double> xe = blend(-2.0);
            const double fe = fn(xe);
            if (fe < fr) {
                simplex[npts - 1] = xe;
                fvals[npts - 1] = fe;
            } else {
                simplex[npts - 1] = xr;
                fvals[npts - 1] = fr;
            }
        } else if (fr < fvals[npts - 2]) {
            simplex[npts - 1] = xr;
            fvals[npts - 1] = fr;
        } else {
            const bool outside = fr < fvals[npts - 1];
            std::vector<double> xc = blend(outside ? -0.5 : 0.5);
            const double fc = fn(xc);
            if (fc < std::min(fr, fvals[npts - 1])) {
                simplex[npts - 1] = xc;
                fvals[npts - 1] = fc;
            } else {
                for (std::size_t i = 1; i < npts; ++i) {
                    for (std::size_t j = 0; j < ndim; ++j)
                        simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                    fvals[i] = fn(simplex[i]);
                }
            }
        }
        order();
        trace.push_back(fvals[0]);
    }
    return iter;
}

}  // namespace detail

// CDF-RMSE fit of the four-parameter beta to an empirical distribution.
// Support bounds may be pinned; free bounds are penalized when they exclude
// sample range. The initial simplex perturbs shapes multiplicatively and
// support bounds by a fixed fraction of the width, which keeps the whole
// optimization affine-equivariant.
inline FitResult fit_beta(const EmpiricalDistribution& dist, const FitOptions& opt = {}) {
    if (dist.degenerate)
        throw std::invalid_argument("fit_beta: degenerate (zero-width) distribution");
    if (opt.pin_s0 && opt.pin_sm && !(*opt.pin_sm > *opt.pin_s0))
        throw std::invalid_argument("fit_beta: pinned support is empty");

    const EmpiricalCdf f = cdf(dist);
    detail::BetaObjective obj{&f,       dist.sample_min, dist.sample_max,
                              opt.pin_s0, opt.pin_sm,      opt.quad_nodes};

    const BetaParams init = detail::moment_init(dist, opt);
    std::vector<double> x0 = {init.a, init.b};
    if (!opt.pin_s0) x0.push_back(init.s0);
    if (!opt.pin_sm) x0.push_back(init.sm);

    const double width0 = init.sm - init.s0;
    std::vector<std::vector<double>> simplex(x0.size() + 1, x0);
    for (std::size_t i = 0; i < x0.size(); ++i) {
        double& xi = simplex[i + 1][i];
        if (i < 2) xi *= 1.05;                         // shape: multiplicative
        else if (!opt.pin_s0 && i == 2) xi -= 0.05 * width0;  // s0: widen downward
        else xi += 0.05 * width0;                      // sm: widen upward
    }
    std::vector<double> fvals(simplex.size());
    for (std::size_t i = 0; i < simplex.size(); ++i) fvals[i] = obj(simplex[i]);

    FitResult res;
    res.iterations = detail::nelder_mead(obj, simplex, fvals, opt.max_iterations,
                                         opt.simplex_tol, res.objective_trace, res.converged);
    res.params = obj.unpack(simplex[0]);
    res.params.validate();
    res.rmse = rmse(f, res.params, opt.quad_nodes);
    return res;
}

}  // namespace esqpt

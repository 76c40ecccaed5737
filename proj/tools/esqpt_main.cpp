// esqpt: command-line front end for the quench/entropy library.
// Subcommands mirror the library modules; every run writes a plot-ready
// CSV (or a single JSON) plus a JSON sidecar with the effective config,
// derived quantities, and per-column summaries. Output is deterministic:
// identical configs produce byte-identical files.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <esqpt/betafit.hpp>
#include <esqpt/dynamics.hpp>
#include <esqpt/model.hpp>
#include <esqpt/scan.hpp>
#include <esqpt/semiclassic.hpp>
#include <esqpt/stats.hpp>
#include <esqpt/tridiag_eigen.hpp>

using nlohmann::json;

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

struct Column {
    std::string name;
    std::vector<double> values;
};

// Summaries over the finite entries; the sidecar guarantees these match a
// re-read of the CSV to 1e-9.
json column_summary(const Column& col) {
    json s;
    std::size_t finite = 0;
    double acc = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : col.values) {
        if (!std::isfinite(v)) continue;
        ++finite;
        acc += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    s["count"] = col.values.size();
    s["finite"] = finite;
    if (finite > 0) {
        s["mean"] = acc / static_cast<double>(finite);
        s["min"] = lo;
        s["max"] = hi;
    } else {
        s["mean"] = nullptr;
        s["min"] = nullptr;
        s["max"] = nullptr;
    }
    return s;
}

void write_csv(const std::string& path, const std::vector<Column>& cols,
               const std::vector<std::string>* tags = nullptr,
               const std::string& tag_name = "") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    const std::size_t rows = cols.empty() ? (tags ? tags->size() : 0) : cols[0].values.size();
    for (std::size_t j = 0; j < cols.size(); ++j) out << (j ? "," : "") << cols[j].name;
    if (tags) out << (cols.empty() ? "" : ",") << tag_name;
    out << "\n";
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j)
            out << (j ? "," : "") << fmt(cols[j].values[i]);
        if (tags) out << (cols.empty() ? "" : ",") << (*tags)[i];
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string sidecar_path(const std::string& out) {
    if (out.size() > 4 && out.compare(out.size() - 4, 4, ".csv") == 0)
        return out.substr(0, out.size() - 4) + ".json";
    return out + ".json";
}

// CSV mode: data file plus sidecar. JSON mode: one file holding config,
// derived values, summaries, and the full data columns.
void emit(const std::string& command, const std::string& out, const std::string& format,
          const json& config, const json& derived, const std::vector<Column>& cols,
          const std::vector<std::string>* tags = nullptr, const std::string& tag_name = "",
          json extra_data = json()) {
    json meta;
    meta["command"] = command;
    meta["config"] = config;
    meta["derived"] = derived;
    json summaries;
    for (const auto& c : cols) summaries[c.name] = column_summary(c);
    meta["columns"] = summaries;

    if (format == "json") {
        json data;
        for (const auto& c : cols) data[c.name] = c.values;
        if (tags) data[tag_name] = *tags;
        if (!extra_data.is_null())
            for (auto& [k, v] : extra_data.items()) data[k] = std::move(v);
        meta["data"] = std::move(data);
        std::ofstream f(out);
        if (!f) throw std::runtime_error("cannot open output file: " + out);
        f << meta.dump(2) << "\n";
        if (!f) throw std::runtime_error("write failed: " + out);
        return;
    }

    write_csv(out, cols, tags, tag_name);
    meta["output"] = out;
    const std::string side = sidecar_path(out);
    std::ofstream f(side);
    if (!f) throw std::runtime_error("cannot open output file: " + side);
    f << meta.dump(2) << "\n";
    if (!f) throw std::runtime_error("write failed: " + side);
}

json lambda_c_or_null(double alpha) {
    if (alpha > 0.0 && alpha < 0.8) return esqpt::critical_field(alpha);
    return nullptr;
}

std::vector<double> centers(const Eigen::VectorXd& edges) {
    std::vector<double> c(edges.size() - 1);
    for (int i = 0; i + 1 < edges.size(); ++i) c[i] = 0.5 * (edges[i] + edges[i + 1]);
    return c;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

// JSON config files: {"scan": {"alpha": 0.2}}. Command-line flags override.
class JsonConfig : public CLI::Config {
  public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override {
        return "{}\n";
    }
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        json j = json::parse(input);
        return walk(j, "", {});
    }

  private:
    static std::vector<CLI::ConfigItem> walk(const json& j, const std::string& name,
                                             std::vector<std::string> prefix) {
        std::vector<CLI::ConfigItem> out;
        if (j.is_object()) {
            if (!name.empty()) prefix.push_back(name);
            for (auto it = j.begin(); it != j.end(); ++it) {
                auto sub = walk(it.value(), it.key(), prefix);
                out.insert(out.end(), sub.begin(), sub.end());
            }
            return out;
        }
        if (name.empty()) throw CLI::ConversionError("config: top level must be an object");
        out.emplace_back();
        auto& item = out.back();
        item.name = name;
        item.parents = std::move(prefix);
        if (j.is_boolean()) {
            item.inputs = {j.get<bool>() ? "true" : "false"};
        } else if (j.is_number_integer()) {
            item.inputs = {std::to_string(j.get<long long>())};
        } else if (j.is_number()) {
            item.inputs = {fmt(j.get<double>())};
        } else if (j.is_string()) {
            item.inputs = {j.get<std::string>()};
        } else {
            throw CLI::ConversionError("config: unsupported value for key " + name);
        }
        return out;
    }
};

struct WindowFlags {
    double tau0 = 1e4, dtau = 1e4, step = 0.05;
    CLI::Option* tau0_opt = nullptr;
    CLI::Option* dtau_opt = nullptr;

    void attach(CLI::App* cmd) {
        tau0_opt = cmd->add_option("--tau0", tau0, "window start");
        dtau_opt = cmd->add_option("--dtau", dtau, "window length");
        cmd->add_option("--step", step, "sampling step");
    }
};

// Presets fill N and the time window where no explicit flag was given.
struct Preset {
    std::string name;
    CLI::Option* n_opt = nullptr;

    void attach(CLI::App* cmd, CLI::Option* n_option) {
        n_opt = n_option;
        cmd->add_option("--preset", name, "paper (tau0=dtau=1e4, N=1000) or desk (1e3, N=500)")
            ->check(CLI::IsMember({"paper", "desk"}));
    }
    void apply(int& n, WindowFlags& w) const {
        if (name.empty()) return;
        const bool paper = name == "paper";
        if (n_opt && n_opt->count() == 0) n = paper ? 1000 : 500;
        if (w.tau0_opt->count() == 0) w.tau0 = paper ? 1e4 : 1e3;
        if (w.dtau_opt->count() == 0) w.dtau = paper ? 1e4 : 1e3;
    }
};

std::optional<double> pin_value(const CLI::Option* opt, double fallback) {
    if (opt->count() == 0) return std::nullopt;
    const std::string& raw = opt->results().front();
    if (raw.empty()) return fallback;
    return std::stod(raw);
}

json window_json(double tau0, double dtau, double step) {
    return json{{"tau0", tau0}, {"dtau", dtau}, {"step", step}};
}

esqpt::QuenchEnsemble build_ensemble(int n, double alpha, double lambda, int n0) {
    esqpt::ModelParams pi{n, alpha, 0.0};
    pi.validate();
    esqpt::ModelParams pf{n, alpha, lambda};
    pf.validate();
    const auto dec_i = esqpt::eigh_tridiagonal(esqpt::build_hamiltonian(pi));
    const auto dec_f = esqpt::eigh_tridiagonal(esqpt::build_hamiltonian(pf));
    return esqpt::quench_ensemble(dec_i, dec_f, n0);
}

void warn_degenerate(const esqpt::QuenchEnsemble& ens) {
    if (ens.near_degenerate_final)
        std::cerr << "warning: near-degenerate final spectrum (gap < 1e-10); "
                     "diagonal-ensemble quantities may be unreliable\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LMG cyclic-quench diagnostics: spectra, diagonal entropy, strength "
                 "functions, semiclassical DOS, S_d distributions, lambda scans"};
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file; flags override");
    app.get_config_ptr()->configurable(false);

    std::string format = "csv";
    app.add_option("--format", format, "csv (data + JSON sidecar) or json (single file)")
        ->check(CLI::IsMember({"csv", "json"}));

    // spectrum
    auto* sp = app.add_subcommand("spectrum", "even-parity eigenvalues of H(N, alpha, lambda)");
    sp->configurable(true);
    struct {
        int n = 1000;
        double alpha = 0.4, lambda = 0.0;
        std::string out;
    } spc;
    sp->add_option("--n", spc.n, "system size N (even)");
    sp->add_option("--alpha", spc.alpha, "control parameter");
    sp->add_option("--lambda", spc.lambda, "field strength");
    sp->add_option("--out", spc.out, "output path");

    // entropy
    auto* en = app.add_subcommand("entropy", "S_d(tau) for the cyclic quench 0 -> lambda -> 0");
    en->configurable(true);
    struct {
        int n = 1000;
        double alpha = 0.4, lambda = 1.0;
        int n0 = 0;
        double tau_max = 0.0;
        std::string out;
    } enc;
    auto* en_n = en->add_option("--n", enc.n, "system size N (even)");
    en->add_option("--alpha", enc.alpha, "control parameter");
    en->add_option("--lambda", enc.lambda, "quench field");
    en->add_option("--n0", enc.n0, "initial eigenstate index");
    WindowFlags enw;
    enw.tau0 = 0.0;
    enw.dtau = 400.0;
    enw.attach(en);
    auto* en_taumax = en->add_option("--tau-max", enc.tau_max, "window end (overrides --dtau)");
    en->add_option("--out", enc.out, "output path");
    Preset enp;
    enp.attach(en, en_n);

    // strength
    auto* st = app.add_subcommand("strength", "strength function Omega_k over rescaled energy");
    st->configurable(true);
    struct {
        int n = 1000;
        double alpha = 0.4, lambda = 1.0;
        int n0 = 0, k = 0, bins = 200;
        std::string out;
    } stc;
    st->add_option("--n", stc.n, "system size N (even)");
    st->add_option("--alpha", stc.alpha, "control parameter");
    st->add_option("--lambda", stc.lambda, "quench field");
    st->add_option("--n0", stc.n0, "initial eigenstate index");
    st->add_option("--k", stc.k, "initial-basis row k");
    st->add_option("--bins", stc.bins, "histogram bins");
    st->add_option("--out", stc.out, "output path");

    // dos
    auto* ds = app.add_subcommand("dos", "semiclassical density of states nu(E)");
    ds->configurable(true);
    struct {
        int n = 1000;
        double alpha = 0.4, lambda = 0.0;
        int bins = 200;
        long nz = 2048, nphi = 2048;
        bool raw = false;
        std::string out;
    } dsc;
    ds->add_option("--n", dsc.n, "system size N (even)");
    ds->add_option("--alpha", dsc.alpha, "control parameter");
    ds->add_option("--lambda", dsc.lambda, "field strength");
    ds->add_option("--bins", dsc.bins, "energy bins");
    ds->add_option("--nz", dsc.nz, "z grid resolution");
    ds->add_option("--nphi", dsc.nphi, "phi grid resolution");
    ds->add_flag("--raw", dsc.raw, "skip block-dimension renormalization");
    ds->add_option("--out", dsc.out, "output path");

    // distribution
    auto* di = app.add_subcommand("distribution",
                                  "P(S_d) over a long-time window, CDF, and beta fit");
    di->configurable(true);
    struct {
        int n = 1000;
        double alpha = 0.4, lambda = 1.0;
        int n0 = 0, bins = 100;
        std::string out;
    } dic;
    auto* di_n = di->add_option("--n", dic.n, "system size N (even)");
    di->add_option("--alpha", dic.alpha, "control parameter");
    di->add_option("--lambda", dic.lambda, "quench field");
    di->add_option("--n0", dic.n0, "initial eigenstate index");
    di->add_option("--bins", dic.bins, "histogram bins");
    WindowFlags diw;
    diw.attach(di);
    auto* di_pin_s0 = di->add_option("--pin-s0", "pin lower support (bare: sample min)")
                          ->expected(0, 1);
    auto* di_pin_sm = di->add_option("--pin-sm", "pin upper support (bare: sample max)")
                          ->expected(0, 1);
    di->add_option("--out", dic.out, "output path");
    Preset dip;
    dip.attach(di, di_n);

    // scan
    auto* sc = app.add_subcommand("scan", "moments and fit RMSE across a lambda grid");
    sc->configurable(true);
    struct {
        int n = 1000;
        double alpha = 0.4;
        double lmin = 0.1, lmax = 2.0, lstep = 0.05;
        int bins = 100, threads = 0;
        std::string out;
    } scc;
    auto* sc_n = sc->add_option("--n", scc.n, "system size N (even)");
    sc->add_option("--alpha", scc.alpha, "control parameter");
    sc->add_option("--lambda-min", scc.lmin, "grid start");
    sc->add_option("--lambda-max", scc.lmax, "grid end");
    sc->add_option("--lambda-step", scc.lstep, "grid step");
    sc->add_option("--bins", scc.bins, "histogram bins per point");
    sc->add_option("--threads", scc.threads, "worker threads (0: auto / ESQPT_THREADS)");
    WindowFlags scw;
    scw.attach(sc);
    sc->add_option("--out", scc.out, "output path");
    Preset scp;
    scp.attach(sc, sc_n);

    CLI11_PARSE(app, argc, argv);

    auto out_path = [&](std::string& out, const char* cmd) {
        if (out.empty()) out = std::string(cmd) + (format == "json" ? ".json" : ".csv");
    };

    try {
        if (sp->parsed()) {
            esqpt::ModelParams p{spc.n, spc.alpha, spc.lambda};
            p.validate();
            out_path(spc.out, "spectrum");
            const Eigen::VectorXd e =
                esqpt::tridiagonal_eigenvalues(esqpt::build_hamiltonian(p));
            const Eigen::VectorXd eps = esqpt::rescale_energies(e);
            std::vector<double> idx(e.size());
            for (int i = 0; i < e.size(); ++i) idx[i] = i;
            json config{{"n", spc.n}, {"alpha", spc.alpha}, {"lambda", spc.lambda}};
            json derived{{"dim", p.block_dim()}, {"lambda_c", lambda_c_or_null(spc.alpha)}};
            emit("spectrum", spc.out, format, config, derived,
                 {{"index", idx}, {"E", to_vec(e)}, {"epsilon", to_vec(eps)}});
            std::cout << "spectrum: N=" << spc.n << " alpha=" << spc.alpha
                      << " lambda=" << spc.lambda << " dim=" << p.block_dim() << " -> "
                      << spc.out << "\n";
        } else if (en->parsed()) {
            enp.apply(enc.n, enw);
            if (en_taumax->count() > 0) {
                if (!(enc.tau_max >= enw.tau0))
                    throw std::invalid_argument("entropy: --tau-max must be >= --tau0");
                enw.dtau = enc.tau_max - enw.tau0;
            }
            out_path(enc.out, "entropy");
            const auto ens = build_ensemble(enc.n, enc.alpha, enc.lambda, enc.n0);
            warn_degenerate(ens);
            const auto series =
                esqpt::entropy_series(ens, esqpt::make_time_grid(enw.tau0, enw.dtau, enw.step));
            const auto rep = esqpt::equilibration_report(ens, series);
            // the Delta bound is a statement about equilibrated windows
            if (rep.exceeds_bound && enw.tau0 >= 1e3)
                std::cerr << "warning: entropy gap delta=" << fmt(rep.delta)
                          << " exceeds the conjectured bound 1-gamma=" << fmt(rep.bound)
                          << "\n";
            json config{{"n", enc.n},   {"alpha", enc.alpha}, {"lambda", enc.lambda},
                        {"n0", enc.n0}, {"window", window_json(enw.tau0, enw.dtau, enw.step)}};
            json derived{{"dim", ens.dim()},
                         {"lambda_c", lambda_c_or_null(enc.alpha)},
                         {"ln_dim", std::log(static_cast<double>(ens.dim()))},
                         {"time_avg_entropy", rep.time_avg_entropy},
                         {"diag_ensemble_entropy", rep.diag_ensemble_entropy},
                         {"delta", rep.delta},
                         {"delta_bound", rep.bound},
                         {"near_degenerate_final", ens.near_degenerate_final}};
            emit("entropy", enc.out, format, config, derived,
                 {{"tau", series.taus}, {"S_d", series.values}});
            std::cout << "entropy: N=" << enc.n << " alpha=" << enc.alpha
                      << " lambda=" << enc.lambda << " rows=" << series.taus.size() << " -> "
                      << enc.out << "\n";
        } else if (st->parsed()) {
            out_path(stc.out, "strength");
            const auto ens = build_ensemble(stc.n, stc.alpha, stc.lambda, stc.n0);
            warn_degenerate(ens);
            const auto sf = esqpt::strength_function(ens, stc.k, stc.bins);
            json config{{"n", stc.n}, {"alpha", stc.alpha}, {"lambda", stc.lambda},
                        {"n0", stc.n0}, {"k", stc.k}, {"bins", stc.bins}};
            json derived{{"dim", ens.dim()},
                         {"lambda_c", lambda_c_or_null(stc.alpha)},
                         {"sum_stick_weights", sf.stick_weights.sum()}};
            json extra;
            if (format == "json") {
                extra["stick_eps"] = to_vec(sf.stick_eps);
                extra["stick_weights"] = to_vec(sf.stick_weights);
            }
            emit("strength", stc.out, format, config, derived,
                 {{"epsilon", to_vec(sf.bin_centers)}, {"omega", to_vec(sf.weights)}}, nullptr,
                 "", std::move(extra));
            std::cout << "strength: N=" << stc.n << " alpha=" << stc.alpha
                      << " lambda=" << stc.lambda << " k=" << stc.k << " -> " << stc.out
                      << "\n";
        } else if (ds->parsed()) {
            esqpt::ModelParams p{dsc.n, dsc.alpha, dsc.lambda};
            p.validate();
            if (dsc.bins < 2) throw std::invalid_argument("dos: need at least 2 bins");
            out_path(dsc.out, "dos");
            const Eigen::VectorXd e =
                esqpt::tridiagonal_eigenvalues(esqpt::build_hamiltonian(p));
            Eigen::VectorXd edges = Eigen::VectorXd::LinSpaced(dsc.bins + 1, e[0], e[e.size() - 1]);
            const auto norm = dsc.raw ? esqpt::DosNormalization::Raw
                                      : esqpt::DosNormalization::BlockDim;
            const auto dos = esqpt::density_of_states(p, edges, dsc.nz, dsc.nphi, norm);
            const auto mid = centers(dos.edges);
            std::vector<double> eps(mid.size());
            const double span = e[e.size() - 1] - e[0];
            for (std::size_t i = 0; i < mid.size(); ++i) eps[i] = (mid[i] - e[0]) / span;
            json config{{"n", dsc.n},     {"alpha", dsc.alpha}, {"lambda", dsc.lambda},
                        {"bins", dsc.bins}, {"nz", dsc.nz},     {"nphi", dsc.nphi},
                        {"raw", dsc.raw}};
            json derived{{"dim", p.block_dim()},
                         {"lambda_c", lambda_c_or_null(dsc.alpha)},
                         {"e_min", e[0]},
                         {"e_max", e[e.size() - 1]},
                         {"total_mass", dos.total_mass()},
                         {"mean_energy", dos.mean_energy()}};
            emit("dos", dsc.out, format, config, derived,
                 {{"E", mid}, {"epsilon", eps}, {"nu", to_vec(dos.nu)}});
            std::cout << "dos: N=" << dsc.n << " alpha=" << dsc.alpha
                      << " lambda=" << dsc.lambda << " bins=" << dsc.bins << " -> " << dsc.out
                      << "\n";
        } else if (di->parsed()) {
            dip.apply(dic.n, diw);
            out_path(dic.out, "distribution");
            const auto ens = build_ensemble(dic.n, dic.alpha, dic.lambda, dic.n0);
            warn_degenerate(ens);
            const auto series =
                esqpt::entropy_series(ens, esqpt::make_time_grid(diw.tau0, diw.dtau, diw.step));
            const auto dist = esqpt::empirical_distribution(series, dic.bins);
            if (dist.degenerate)
                throw std::invalid_argument(
                    "distribution: S_d is constant over the window; nothing to fit");
            const auto F = esqpt::cdf(dist);
            esqpt::FitOptions fopt;
            fopt.pin_s0 = pin_value(di_pin_s0, dist.sample_min);
            fopt.pin_sm = pin_value(di_pin_sm, dist.sample_max);
            const auto fit = esqpt::fit_beta(dist, fopt);
            if (!fit.converged)
                std::cerr << "warning: beta fit did not converge within "
                          << esqpt::FitOptions{}.max_iterations << " iterations\n";
            const auto mid = centers(dist.edges);
            std::vector<double> cdf_vals(mid.size());
            for (std::size_t i = 0; i < mid.size(); ++i) cdf_vals[i] = F(mid[i]);
            json config{{"n", dic.n},     {"alpha", dic.alpha}, {"lambda", dic.lambda},
                        {"n0", dic.n0},   {"bins", dic.bins},
                        {"window", window_json(diw.tau0, diw.dtau, diw.step)},
                        {"pin_s0", fopt.pin_s0 ? json(*fopt.pin_s0) : json()},
                        {"pin_sm", fopt.pin_sm ? json(*fopt.pin_sm) : json()}};
            json derived{{"dim", ens.dim()},
                         {"lambda_c", lambda_c_or_null(dic.alpha)},
                         {"sample_min", dist.sample_min},
                         {"sample_max", dist.sample_max},
                         {"mean", dist.mean},
                         {"variance", dist.variance},
                         {"mu2", esqpt::central_moment(dist, 2)},
                         {"mu3", esqpt::central_moment(dist, 3)},
                         {"mu4", esqpt::central_moment(dist, 4)},
                         {"fit", json{{"a", fit.params.a},
                                      {"b", fit.params.b},
                                      {"s0", fit.params.s0},
                                      {"sm", fit.params.sm},
                                      {"rmse", fit.rmse},
                                      {"iterations", fit.iterations},
                                      {"converged", fit.converged}}}};
            emit("distribution", dic.out, format, config, derived,
                 {{"s", mid}, {"density", to_vec(dist.density)}, {"cdf", cdf_vals}});
            std::cout << "distribution: N=" << dic.n << " alpha=" << dic.alpha
                      << " lambda=" << dic.lambda << " fit a=" << fmt(fit.params.a)
                      << " b=" << fmt(fit.params.b) << " R=" << fmt(fit.rmse) << " -> "
                      << dic.out << "\n";
            if (!fit.converged) return 1;
        } else if (sc->parsed()) {
            scp.apply(scc.n, scw);
            if (!(scc.lstep > 0.0))
                throw std::invalid_argument("scan: --lambda-step must be > 0");
            if (!(scc.lmax >= scc.lmin))
                throw std::invalid_argument("scan: --lambda-max must be >= --lambda-min");
            out_path(scc.out, "scan");
            std::vector<double> grid;
            for (int k = 0;; ++k) {
                const double l = scc.lmin + k * scc.lstep;
                if (l > scc.lmax + 1e-9) break;
                grid.push_back(l);
            }
            esqpt::WindowConfig w{scw.tau0, scw.dtau, scw.step, scc.bins};
            const auto scan = esqpt::lambda_scan(scc.alpha, scc.n, grid, w, scc.threads);
            const auto est = esqpt::extract_critical(scan);

            int failed = 0, degenerate = 0;
            std::vector<std::string> tags(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) {
                tags[i] = esqpt::to_string(scan.status[i]);
                if (scan.status[i] == esqpt::PointStatus::Failed) {
                    ++failed;
                    std::cerr << "warning: lambda=" << fmt(grid[i])
                              << " failed: " << scan.messages[i] << "\n";
                } else if (scan.status[i] == esqpt::PointStatus::Degenerate) {
                    ++degenerate;
                }
            }
            json config{{"n", scc.n},
                        {"alpha", scc.alpha},
                        {"lambda_min", scc.lmin},
                        {"lambda_max", scc.lmax},
                        {"lambda_step", scc.lstep},
                        {"bins", scc.bins},
                        {"window", window_json(scw.tau0, scw.dtau, scw.step)},
                        {"threads", scc.threads}};
            json derived{{"dim", scc.n / 2 + 1},
                         {"points", grid.size()},
                         {"ok", grid.size() - failed - degenerate},
                         {"degenerate", degenerate},
                         {"failed", failed},
                         {"critical", json{{"lambda_mu2", est.lambda_mu2},
                                           {"lambda_mu3", est.lambda_mu3},
                                           {"lambda_mu4", est.lambda_mu4},
                                           {"lambda_rmse", est.lambda_rmse},
                                           {"lambda_analytic", est.lambda_analytic},
                                           {"reliable", est.reliable}}}};
            emit("scan", scc.out, format, config, derived,
                 {{"lambda", scan.lambdas},
                  {"mu2", scan.mu2},
                  {"mu3", scan.mu3},
                  {"mu4", scan.mu4},
                  {"rmse", scan.rmse}},
                 &tags, "status");
            std::cout << "scan: alpha=" << scc.alpha << " N=" << scc.n
                      << " points=" << grid.size()
                      << " lambda_analytic=" << fmt(est.lambda_analytic)
                      << " mu2=" << fmt(est.lambda_mu2) << " mu3=" << fmt(est.lambda_mu3)
                      << " mu4=" << fmt(est.lambda_mu4) << " rmse=" << fmt(est.lambda_rmse)
                      << " -> " << scc.out << "\n";
            if (failed > 0) return 1;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

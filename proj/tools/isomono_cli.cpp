#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <isomono/hitchin.hpp>
#include <isomono/io.hpp>
#include <isomono/random.hpp>

using namespace isomono;
namespace fs = std::filesystem;

namespace {

enum Exit { kPass = 0, kThreshold = 1, kConfig = 2, kNumerical = 3 };

struct Options {
    std::string command;
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<double> ode_tol;
};

// Named threshold checks collected into the report.
class Report {
public:
    explicit Report(std::string command) { j_["command"] = std::move(command); }

    json& operator[](const char* key) { return j_[key]; }

    void below(const std::string& name, double value, double threshold) { add(name, value, threshold, "<", value < threshold); }
    void above(const std::string& name, double value, double threshold) { add(name, value, threshold, ">", value > threshold); }

    bool passed() const { return pass_; }

    json finish() {
        j_["checks"] = checks_;
        j_["status"] = pass_ ? "pass" : "threshold_failure";
        return j_;
    }

private:
    void add(const std::string& name, double value, double threshold, const char* rel, bool ok) {
        // NaN fails every comparison above
        checks_.push_back({{"name", name}, {"value", value}, {"threshold", threshold}, {"relation", rel}, {"pass", ok}});
        pass_ = pass_ && ok;
    }

    json j_;
    json checks_ = json::array();
    bool pass_ = true;
};

struct Output {
    json report;
    bool pass = true;
    std::string csv;  // empty when the command has no time series
};

double threshold(const json& cfg, const char* name, double def) {
    if (!cfg.contains("thresholds")) return def;
    const auto& t = cfg["thresholds"];
    if (!t.is_object()) throw ConfigError("thresholds", "expected an object");
    if (!t.contains(name)) return def;
    return io::to_real(t[name], io::child("thresholds", name));
}

double real_or(const json& j, const char* key, const std::string& path, double def) {
    return j.contains(key) ? io::to_real(j[key], io::child(path, key)) : def;
}

long int_or(const json& j, const char* key, const std::string& path, long def) {
    return j.contains(key) ? io::to_int(j[key], io::child(path, key)) : def;
}

std::uint64_t seed_for(const json& block, const std::string& path, const Options& opt) {
    if (opt.seed) return *opt.seed;
    const long s = io::to_int(io::require(block, "seed", path), io::child(path, "seed"));
    if (s < 0) throw ConfigError(io::child(path, "seed"), "seed must be non-negative");
    return static_cast<std::uint64_t>(s);
}

std::size_t one_based(const json& j, const char* key, const std::string& path, std::size_t count) {
    const long v = io::to_int(io::require(j, key, path), io::child(path, key));
    if (v < 1 || static_cast<std::size_t>(v) > count)
        throw ConfigError(io::child(path, key), "index must lie in 1.." + std::to_string(count));
    return static_cast<std::size_t>(v - 1);
}

std::string fmt(double v) {
    std::ostringstream o;
    o << std::setprecision(17) << v;
    return o.str();
}

// Explicit "connection" or seeded "random" block.
SchlesingerState load_state(const json& cfg, const Options& opt, std::optional<FlowSpec> flow = std::nullopt) {
    if (cfg.contains("connection")) {
        const auto c = io::to_connection(cfg["connection"], "connection");
        if (!c.trivial_at_infinity) throw ConfigError("connection.trivial_at_infinity", "flows need sum p_a = 0");
        return make_state(c.kappa, c.points, c.residues);
    }
    if (!cfg.contains("random")) throw ConfigError("connection", "missing required field (or give a random block)");
    const auto& r = cfg["random"];
    const std::string p = "random";
    RandomStateSpec spec;
    spec.points = static_cast<std::size_t>(int_or(r, "points", p, 3));
    spec.dim = static_cast<Eigen::Index>(int_or(r, "dim", p, 2));
    spec.kappa = r.contains("kappa") ? io::to_complex(r["kappa"], io::child(p, "kappa")) : Complex(1.0);
    spec.max_norm = real_or(r, "max_norm", p, spec.max_norm);
    spec.min_norm = real_or(r, "min_norm", p, spec.min_norm);
    spec.min_separation = real_or(r, "min_separation", p, spec.min_separation);
    spec.box = real_or(r, "box", p, spec.box);
    if (spec.points < 2 || spec.dim < 2) throw ConfigError(p, "need at least 2 points and dimension at least 2");
    if (flow && flow->direction >= spec.points) throw ConfigError("flow.direction", "index out of range");
    return random_schlesinger_state(spec, seed_for(r, p, opt), flow);
}

FuchsianConnection load_connection(const json& cfg, const Options& opt) {
    if (cfg.contains("connection")) return io::to_connection(cfg["connection"], "connection");
    return load_state(cfg, opt).connection();
}

double ode_tol_for(const json& block, const std::string& path, const Options& opt) {
    const double tol = opt.ode_tol ? *opt.ode_tol : real_or(block, "ode_tol", path, 1e-10);
    if (!(tol >= 1e-13 && tol <= 1e-6)) throw ConfigError(io::child(path, "ode_tol"), "must lie in [1e-13, 1e-6]");
    return tol;
}

// ---- commands ----

Output schlesinger_audit(const json& cfg, const Options& opt) {
    const auto& fl = io::require(cfg, "flow", "");
    const long dir = io::to_int(io::require(fl, "direction", "flow"), "flow.direction");
    if (dir < 1) throw ConfigError("flow.direction", "index must be at least 1");
    const Complex t_end = io::to_complex(io::require(fl, "t_end", "flow"), "flow.t_end");
    const double tol = ode_tol_for(fl, "flow", opt);
    const std::size_t a = static_cast<std::size_t>(dir - 1);
    const auto s0 = load_state(cfg, opt, FlowSpec{a, t_end});
    if (a >= s0.size()) throw ConfigError("flow.direction", "index out of range");

    AuditOptions ao;
    ao.series = cfg.contains("series") ? io::to_bool(cfg["series"], "series") : true;
    const auto r = isomonodromy_audit(s0, a, t_end, tol, ao);

    Report rep("schlesinger-audit");
    rep["connection"] = io::from_connection(s0.connection());
    rep["flow"] = {{"direction", dir}, {"t_end", io::from_complex(t_end)}, {"ode_tol", tol}};
    rep["invariant_drift"] = r.invariant_drift;
    rep["eigen_drift"] = r.eigen_drift;
    rep["sum_p_drift"] = r.sum_p_drift;
    json wd = json::array();
    for (const auto& w : r.word_drifts) wd.push_back({{"word", w.word}, {"drift", w.drift}});
    rep["word_drifts"] = wd;
    rep["monodromy_start"] = io::from_rep(r.rep_start);
    rep["monodromy_end"] = io::from_rep(r.rep_end);
    rep["ode_stats"] = io::from_stats(r.trajectory.stats);
    json fin = json::array();
    for (const auto& p : r.trajectory.samples.back().residues) fin.push_back(io::from_matrix(p.p));
    rep["final_residues"] = fin;

    rep.below("invariant_drift", r.invariant_drift, threshold(cfg, "invariant_drift", 1e-6));
    rep.below("eigen_drift", r.eigen_drift, threshold(cfg, "eigen_drift", 1e-9));
    rep.below("sum_p_drift", r.sum_p_drift, threshold(cfg, "sum_p_drift", 1e-10));
    const double pd = std::max(r.rep_start.product_defect(), r.rep_end.product_defect());
    rep.below("product_defect", pd, threshold(cfg, "product_defect", 1e-7));

    if (cfg.contains("control") && io::to_bool(cfg["control"], "control")) {
        AuditOptions flipped;
        flipped.sign = -1.0;
        const double d = isomonodromy_audit(s0, a, t_end, tol, flipped).invariant_drift;
        rep["control_drift"] = d;
        rep.above("control_drift", d, threshold(cfg, "control_drift", 1e-2));
    }

    Output out;
    if (ao.series) {
        std::ostringstream csv;
        csv << "t_re,t_im";
        for (const auto& w : r.invariant_series.front()) csv << ',' << w.word << "_re," << w.word << "_im";
        for (std::size_t e = 0; e < s0.size(); ++e) csv << ",eigen_drift_" << e + 1;
        csv << '\n';
        for (std::size_t i = 0; i < r.trajectory.samples.size(); ++i) {
            const Complex t = r.trajectory.params[i];
            csv << fmt(t.real()) << ',' << fmt(t.imag());
            for (const auto& w : r.invariant_series[i]) csv << ',' << fmt(w.trace.real()) << ',' << fmt(w.trace.imag());
            for (std::size_t e = 0; e < s0.size(); ++e)
                csv << ',' << fmt(s0.residues[e].spectrum_drift(r.trajectory.samples[i].residues[e].p));
            csv << '\n';
        }
        out.csv = csv.str();
    }
    out.pass = rep.passed();
    out.report = rep.finish();
    return out;
}

Output gaudin_run(const json& cfg, const Options& opt) {
    const auto& fl = io::require(cfg, "flow", "");
    const auto st = load_state(cfg, opt);
    if (st.kappa != Complex(1.0)) throw ConfigError("connection.kappa", "autonomous flows use kappa = 1");
    const std::size_t a = one_based(fl, "hamiltonian", "flow", st.size());
    const Complex t_end = io::to_complex(io::require(fl, "t_end", "flow"), "flow.t_end");
    const double tol = ode_tol_for(fl, "flow", opt);
    const int probes = static_cast<int>(int_or(cfg, "probes", "", 20));
    const auto probe_seed = static_cast<std::uint64_t>(int_or(cfg, "probe_seed", "", 7));
    if (probes < 1) throw ConfigError("probes", "must be positive");

    const AutonomousState s0 = make_autonomous(st.positions(), st.residues);
    double comm = 0.0;
    for (std::size_t b = 0; b < s0.size(); ++b)
        for (std::size_t c = 0; c < s0.size(); ++c) comm = std::max(comm, commutation_check(s0, b, c));
    const auto traj = autonomous_flow(s0, a, t_end, tol);
    const double spec = spectral_conservation_audit(traj, probes, probe_seed);
    double energy = 0.0;
    for (std::size_t b = 0; b < s0.size(); ++b)
        energy = std::max(energy, std::abs(gaudin_hamiltonian(traj.samples.back(), b) - gaudin_hamiltonian(s0, b)));
    std::vector<Complex> zs;
    for (const auto& p : spectral_probes(traj, probes, probe_seed)) zs.push_back(p.z);
    double lax = 0.0;
    for (const auto& s : traj.samples) lax = std::max(lax, lax_form_residual(s, a, zs));

    Report rep("gaudin-run");
    rep["connection"] = io::from_connection(s0.connection());
    rep["flow"] = {{"hamiltonian", a + 1}, {"t_end", io::from_complex(t_end)}, {"ode_tol", tol}};
    rep["commutation"] = comm;
    rep["spectral_drift"] = spec;
    rep["energy_drift"] = energy;
    rep["lax_residual"] = lax;
    rep["ode_stats"] = io::from_stats(traj.stats);
    rep.below("commutation", comm, threshold(cfg, "commutation", 1e-11));
    rep.below("spectral_drift", spec, threshold(cfg, "spectral_drift", 1e-8));
    rep.below("energy_drift", energy, threshold(cfg, "energy_drift", 1e-8));
    rep.below("lax_residual", lax, threshold(cfg, "lax_residual", 1e-11));

    std::ostringstream csv;
    csv << "t_re,t_im";
    for (std::size_t b = 0; b < s0.size(); ++b) csv << ",H" << b + 1 << "_re,H" << b + 1 << "_im";
    csv << ",spectral_drift\n";
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const Complex t = traj.params[i];
        csv << fmt(t.real()) << ',' << fmt(t.imag());
        for (std::size_t b = 0; b < s0.size(); ++b) {
            const Complex h = gaudin_hamiltonian(traj.samples[i], b);
            csv << ',' << fmt(h.real()) << ',' << fmt(h.imag());
        }
        AutonomousTrajectory pair;
        pair.samples = {s0, traj.samples[i]};
        csv << ',' << fmt(spectral_conservation_audit(pair, probes, probe_seed)) << '\n';
    }
    Output out{rep.finish(), rep.passed(), csv.str()};
    return out;
}

Output monodromy(const json& cfg, const Options& opt) {
    const auto c = load_connection(cfg, opt);
    const double tol = ode_tol_for(cfg, "", opt);
    const Complex base = cfg.contains("base") ? io::to_complex(cfg["base"], "base") : default_base_point(c.points);
    const int max_len = static_cast<int>(int_or(cfg, "max_word_length", "", 2));
    if (max_len < 1 || max_len > 3) throw ConfigError("max_word_length", "must be 1, 2 or 3");
    for (std::size_t a = 0; a < c.size(); ++a)
        if (std::abs(base - c.points[a]) < 1e-8) throw ConfigError("base", "coincides with marked point " + std::to_string(a + 1));

    const auto r = monodromy_rep(c, base, tol);
    Report rep("monodromy");
    rep["connection"] = io::from_connection(c);
    rep["ode_tol"] = tol;
    rep["representation"] = io::from_rep(r, max_len);
    rep["representation"]["convention"] = r.convention;
    json ys = json::array();
    for (const auto& y : r.y) ys.push_back(io::from_matrix(y));
    rep["matrices"] = ys;
    rep["det_defect"] = r.det_defect;
    rep.below("det_defect", r.det_defect, threshold(cfg, "det_defect", 1e-7));
    if (c.trivial_at_infinity) {
        const Matrix big = transport(c, big_loop(c.points, base), tol);
        const double agree = norm_max(big - r.ordered_product());
        rep["big_loop_agreement"] = agree;
        rep.below("product_defect", r.product_defect(), threshold(cfg, "product_defect", 1e-7));
        rep.below("big_loop_agreement", agree, threshold(cfg, "big_loop_agreement", 1e-7));
    }
    return {rep.finish(), rep.passed(), {}};
}

Output spectral(const json& cfg, const Options& opt) {
    const auto c = load_connection(cfg, opt);
    const auto sc = spectral_curve(c);
    const int probes = static_cast<int>(int_or(cfg, "probes", "", 20));
    if (probes < 1) throw ConfigError("probes", "must be positive");
    const auto probe_seed = opt.seed ? *opt.seed : static_cast<std::uint64_t>(int_or(cfg, "probe_seed", "", 7));

    Report rep("spectral-curve");
    rep["connection"] = io::from_connection(c);
    json coeffs = json::array();
    for (std::size_t k = 0; k < sc.s.size(); ++k) {
        json terms = json::array();
        for (const auto& t : sc.s[k])
            terms.push_back({{"point", t.point + 1}, {"order", t.order}, {"coeff", io::from_complex(t.coeff)}});
        coeffs.push_back({{"k", k + 1}, {"principal_parts", terms}, {"tail", json::array()}});
    }
    rep["coefficients"] = coeffs;

    double r = 1.0;
    for (auto x : c.points) r = std::max(r, std::abs(x) + 1.0);
    std::mt19937_64 rng(probe_seed);
    const auto n = c.dim();
    double mismatch = 0.0, s1 = 0.0;
    for (int i = 0; i < probes;) {
        const Complex z(uniform(rng, -r, r), uniform(rng, -r, r));
        const Complex lam(uniform(rng, -1, 1), uniform(rng, -1, 1));
        bool ok = true;
        for (auto x : c.points) ok = ok && std::abs(z - x) > 0.25;
        if (!ok) continue;
        const Complex det = (lam * Matrix::Identity(n, n) + evaluate_L(c, z)).determinant();
        mismatch = std::max(mismatch, std::abs(sc.characteristic(lam, z) - det) / std::max(1.0, std::abs(det)));
        s1 = std::max(s1, std::abs(sc.coefficient(1, z)));
        ++i;
    }
    const long np = static_cast<long>(c.size());
    const auto l2 = moduli_dimension(0, np, 2), l3 = moduli_dimension(0, np, 3);
    rep["moduli"] = {{"genus", 0},
                     {"points", np},
                     {"l2", l2.value},
                     {"l3", l3.value},
                     {"no_moduli_l2", l2.no_moduli},
                     {"no_moduli_l3", l3.no_moduli}};
    rep["probe_mismatch"] = mismatch;
    rep["trace_coefficient"] = s1;
    rep.below("probe_mismatch", mismatch, threshold(cfg, "probe_mismatch", 1e-9));
    rep.below("trace_coefficient", s1, threshold(cfg, "trace_coefficient", 1e-12));
    return {rep.finish(), rep.passed(), {}};
}

// max |.| over pairs of curvature-block identities for random samples
Output wcheck(const json& cfg, const Options& opt) {
    const int level = static_cast<int>(io::to_int(io::require(cfg, "level", ""), "level"));
    if (level != 2 && level != 3) throw ConfigError("level", "must be 2 or 3");
    const int samples = static_cast<int>(int_or(cfg, "samples", "", 100));
    if (samples < 0) throw ConfigError("samples", "must be non-negative");
    const auto n = static_cast<Eigen::Index>(int_or(cfg, "n", "", 2));
    if (n < 1) throw ConfigError("n", "must be positive");
    const Complex kappa = cfg.contains("kappa") ? io::to_complex(cfg["kappa"], "kappa") : Complex(1.0);
    if (kappa == Complex{}) throw ConfigError("kappa", "must be nonzero");
    int jo = 6, ko = 2;
    if (cfg.contains("orders")) {
        const auto& o = cfg["orders"];
        if (!o.is_array() || o.size() != 2) throw ConfigError("orders", "expected [J, K]");
        jo = static_cast<int>(io::to_int(o[0], "orders[0]"));
        ko = static_cast<int>(io::to_int(o[1], "orders[1]"));
    }
    const auto need = WFieldSample::required_orders(level);
    if (jo < need.first || ko < need.second)
        throw ConfigError("orders", "below the minimal orders for level " + std::to_string(level));

    Report rep("wcheck");
    rep["level"] = level;
    rep["n"] = n;
    rep["kappa"] = io::from_complex(kappa);
    rep["orders"] = json::array({jo, ko});
    rep["samples"] = samples;

    json residuals;
    if (samples > 0) {
        std::mt19937_64 rng(seed_for(cfg, "", opt));
        double rows = 0.0, lower = 0.0, flat = 0.0, reduction = 0.0, from_map = 0.0, displayed = 0.0;
        for (int i = 0; i < samples; ++i) {
            const auto s = random_sample(rng, level, n, true, kappa, jo, ko);
            if (level == 2) {
                const auto b = w2n_curvature_blocks(s);
                rows = std::max(rows, max_block_abs<2>(b, {{0, 0}, {0, 1}}));
                lower = std::max(lower, (b[1][0] - w2n_ward_residual(s)).max_abs());
                flat = std::max(flat, (b[1][1] + 2.0 * gauge_flatness_residual(s)).max_abs());
                displayed = std::max(displayed, (w2n_ward_residual_displayed(s) - w2n_ward_residual(s) -
                                                 kappa * (kappa * s.Abar + s.mu * s.A).d_z(2))
                                                    .max_abs());
            } else {
                const auto b = w3n_curvature_blocks(s);
                rows = std::max(rows, max_block_abs<3>(b, {{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {1, 2}}));
                lower = std::max(lower, std::max((b[2][0] - w3n_w_residual(s)).max_abs(),
                                                 (b[2][1] - w3n_t_residual(s)).max_abs()));
                flat = std::max(flat, (b[2][2] + 3.0 * gauge_flatness_residual(s)).max_abs());
                const auto rel = w3n_coefficients(s), expd = w3n_coefficients_expanded(s);
                displayed = std::max(displayed, (rel.f[5] - expd.f[5]).max_abs());
            }
            // ungauged chain down to the scalar projective identity
            const auto s2 = random_sample(rng, 2, n, false, kappa, std::max(jo, 6), ko);
            const auto b2 = w2n_curvature_blocks(s2);
            const MatrixBiJet w2 = scalar_times_identity(w2_projective_residual_jet(s2), n);
            double red = (b2[1][0] - w2).max_abs();
            if (level == 3) {
                const auto b3 = w3n_curvature_blocks(embed_w2_in_w3(s2));
                red = std::max(red, (b3[2][1] - 4.0 * b2[1][0]).max_abs());
                red = std::max(red, (b3[2][0] - (2.0 * kappa) * b2[1][0].d_z()).max_abs());
            }
            reduction = std::max(reduction, red);
            BiJet f = random_jet(rng, jo, ko, 0.3);
            f(1, 0) += 1.0;
            from_map = std::max(from_map, std::abs(w2_projective_residual(w2_from_map(f, kappa, n))));
        }
        residuals["structure_rows"] = rows;
        residuals[level == 2 ? "ward_block" : "constraint_blocks"] = lower;
        residuals["flatness_block"] = flat;
        residuals["reduction_chain"] = reduction;
        residuals["w2_from_map"] = from_map;
        residuals[level == 2 ? "displayed_ward_defect_mismatch" : "displayed_f6_mismatch"] = displayed;
        rep.below("structure_rows", rows, threshold(cfg, "structure_rows", 1e-11));
        rep.below("reduction_chain", reduction, threshold(cfg, "reduction_chain", 1e-12));
        rep.below("w2_from_map", from_map, threshold(cfg, "w2_from_map", 1e-12));
    }

    // residual map for an explicit sample
    if (cfg.contains("sample")) {
        const auto s = io::to_sample(cfg["sample"], "sample");
        json m;
        if (s.level == 2) {
            if (!s.gauged) m["projective"] = std::abs(w2_projective_residual(s));
            m["ward"] = w2n_ward_residual(s).max_abs();
            m["ward_displayed"] = w2n_ward_residual_displayed(s).max_abs();
            m["flatness"] = gauge_flatness_residual(s).max_abs();
        } else {
            m["w_constraint"] = w3n_w_residual(s).max_abs();
            m["t_constraint"] = w3n_t_residual(s).max_abs();
            m["t_constraint_displayed"] = w3n_t_residual_displayed(s).max_abs();
            m["flatness"] = gauge_flatness_residual(s).max_abs();
            if (!s.gauged) {
                const auto [rt, rw] = w3_structure_residuals(s);
                const auto [dt, dw] = w3_structure_residuals_displayed(s);
                m["t_identity"] = std::abs(rt);
                m["w_identity"] = std::abs(rw);
                m["t_identity_displayed"] = std::abs(dt);
                m["w_identity_displayed"] = std::abs(dw);
            }
        }
        rep["sample_residuals"] = m;
    }

    // declared leading pole coefficients against the orbit Casimirs
    if (cfg.contains("poles")) {
        const auto& poles = cfg["poles"];
        if (!poles.is_array()) throw ConfigError("poles", "expected an array");
        double worst = 0.0;
        json rows = json::array();
        for (std::size_t i = 0; i < poles.size(); ++i) {
            const std::string p = io::item("poles", i);
            const Matrix orbit = io::to_matrix(io::require(poles[i], "orbit", p), io::child(p, "orbit"));
            const auto e = expected_pole_coefficients(level, kappa, orbit);
            const Complex t2 = io::to_complex(io::require(poles[i], "t_minus2", p), io::child(p, "t_minus2"));
            double d = std::abs(t2 - e.t_minus2);
            json row = {{"t_minus2_expected", io::from_complex(e.t_minus2)}};
            if (level == 3) {
                const Complex w3 = io::to_complex(io::require(poles[i], "w_minus3", p), io::child(p, "w_minus3"));
                d = std::max(d, std::abs(w3 - e.w_minus3));
                row["w_minus3_expected"] = io::from_complex(e.w_minus3);
            }
            row["mismatch"] = d;
            rows.push_back(row);
            worst = std::max(worst, d);
        }
        rep["poles"] = rows;
        rep.below("pole_metadata", worst, threshold(cfg, "pole_metadata", 1e-12));
    }
    rep["residuals"] = residuals;
    return {rep.finish(), rep.passed(), {}};
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    CLI::App app{"Isomonodromy and W-structure checks"};
    app.add_option("command", opt.command, "schlesinger-audit | gaudin-run | monodromy | spectral-curve | wcheck")
        ->required()
        ->check(CLI::IsMember({"schlesinger-audit", "gaudin-run", "monodromy", "spectral-curve", "wcheck"}));
    app.add_option("--config", opt.config, "JSON config file")->required();
    app.add_option("--out", opt.out, "output directory");
    app.add_option("--seed", opt.seed, "seed override for random payloads");
    app.add_option("--ode-tol", opt.ode_tol, "ODE tolerance override");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kConfig;
    }

    const fs::path out_dir(opt.out);
    const fs::path report_path = out_dir / (opt.command + "_report.json");
    try {
        json cfg;
        {
            std::ifstream f(opt.config);
            if (!f) throw ConfigError("<file>", "cannot open " + opt.config);
            try {
                cfg = json::parse(f);
            } catch (const json::parse_error& e) {
                throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
            }
        }
        if (!cfg.is_object()) throw ConfigError("<root>", "expected an object");
        if (cfg.contains("command") && cfg["command"] != opt.command)
            throw ConfigError("command", "config is for a different command");

        Output res;
        try {
            if (opt.command == "schlesinger-audit") res = schlesinger_audit(cfg, opt);
            else if (opt.command == "gaudin-run") res = gaudin_run(cfg, opt);
            else if (opt.command == "monodromy") res = monodromy(cfg, opt);
            else if (opt.command == "spectral-curve") res = spectral(cfg, opt);
            else res = wcheck(cfg, opt);
        } catch (const NumericalFailure& e) {
            fs::create_directories(out_dir);
            json d = {{"command", opt.command}, {"status", "numerical_abort"}, {"error", e.what()}, {"where", e.where()}};
            write_file(report_path, d.dump(2) + "\n");
            std::cerr << "numerical abort: " << e.what() << "\n";
            return kNumerical;
        }
        fs::create_directories(out_dir);
        write_file(report_path, res.report.dump(2) + "\n");
        if (!res.csv.empty()) write_file(out_dir / (opt.command + "_series.csv"), res.csv);
        std::cout << opt.command << ": " << (res.pass ? "pass" : "threshold failure") << " -> " << report_path.string()
                  << "\n";
        return res.pass ? kPass : kThreshold;
    } catch (const ConfigError& e) {
        std::cerr << "config error at " << e.path() << ": " << e.what() << "\n";
        return kConfig;
    } catch (const InvalidInput& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumerical;
    }
}

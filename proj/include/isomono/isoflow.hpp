#pragma once

#include <cmath>
#include <future>
#include <string>
#include <vector>

#include "monodromy.hpp"

namespace isomono {

// Current positions are x_a = x_a^0 + t_a.
struct SchlesingerState {
    Complex kappa{1.0, 0.0};
    std::vector<Complex> reference_positions;
    std::vector<Complex> times;
    std::vector<OrbitPoint> residues;

    std::size_t size() const { return residues.size(); }
    Eigen::Index dim() const { return residues.empty() ? 0 : residues.front().dim(); }

    std::vector<Complex> positions() const {
        std::vector<Complex> x(reference_positions.size());
        for (std::size_t a = 0; a < x.size(); ++a) x[a] = reference_positions[a] + times[a];
        return x;
    }

    MatrixList residue_matrices() const {
        MatrixList out;
        for (const auto& r : residues) out.push_back(r.p);
        return out;
    }

    FuchsianConnection connection() const {
        return FuchsianConnection{kappa, positions(), residues, true};
    }

    void validate() const {
        if (times.size() != reference_positions.size() || residues.size() != times.size())
            throw InvalidInput("state: positions, times and residues differ in count");
        connection().validate();
    }
};

inline SchlesingerState make_state(Complex kappa, std::vector<Complex> x0, std::vector<OrbitPoint> p) {
    std::vector<Complex> t(x0.size(), Complex{});
    return SchlesingerState{kappa, std::move(x0), std::move(t), std::move(p)};
}

namespace detail {

inline void require_index(std::size_t a, std::size_t n, const char* what) {
    if (a >= n) throw InvalidInput(std::string(what) + ": index " + std::to_string(a) + " out of range");
}

inline void require_distinct(const std::vector<Complex>& x, const char* what) {
    double scale = 1.0;
    for (auto v : x) scale = std::max(scale, std::abs(v));
    for (std::size_t a = 0; a < x.size(); ++a)
        for (std::size_t b = a + 1; b < x.size(); ++b)
            if (std::abs(x[a] - x[b]) <= 1e-12 * scale)
                throw InvalidInput(std::string(what) + ": points " + std::to_string(a) + " and " +
                                   std::to_string(b) + " coincide");
}

inline State pack(const MatrixList& ps) {
    const auto n = ps.front().rows();
    State v(static_cast<Eigen::Index>(ps.size()) * n * n);
    for (std::size_t a = 0; a < ps.size(); ++a)
        v.segment(static_cast<Eigen::Index>(a) * n * n, n * n) =
            Eigen::Map<const State>(ps[a].data(), n * n);
    return v;
}

inline MatrixList unpack(const State& v, std::size_t count, Eigen::Index n) {
    MatrixList out(count);
    for (std::size_t a = 0; a < count; ++a)
        out[a] = Eigen::Map<const Matrix>(v.data() + static_cast<Eigen::Index>(a) * n * n, n, n);
    return out;
}

// dp_e/dt_a; sign = -1 gives the deliberately wrong control field.
inline MatrixList schlesinger_field(const MatrixList& p, const std::vector<Complex>& x, Complex kappa,
                                    std::size_t a, double sign) {
    const auto n = p.front().rows();
    MatrixList out(p.size(), Matrix::Zero(n, n));
    const Complex c = sign / kappa;
    Matrix self = Matrix::Zero(n, n);
    for (std::size_t e = 0; e < p.size(); ++e) {
        if (e == a) continue;
        out[e] = (c / (x[e] - x[a])) * commutator(p[a], p[e]);
        self -= out[e];
    }
    out[a] = self;
    return out;
}

}  // namespace detail

inline MatrixList schlesinger_vector_field(const SchlesingerState& s, std::size_t a, double sign = 1.0) {
    detail::require_index(a, s.size(), "schlesinger_vector_field");
    const auto x = s.positions();
    detail::require_distinct(x, "schlesinger_vector_field");
    return detail::schlesinger_field(s.residue_matrices(), x, s.kappa, a, sign);
}

// max over probes of |kappa d_a L - kappa d_z M_a + [M_a, L]|, M_a = -p_a/(z - x_a)
inline double zero_curvature_residual(const SchlesingerState& s, std::size_t a,
                                      const std::vector<Complex>& probes, const MatrixList& field) {
    detail::require_index(a, s.size(), "zero_curvature_residual");
    const auto x = s.positions();
    const auto p = s.residue_matrices();
    const auto conn = s.connection();
    const auto n = s.dim();
    double worst = 0.0;
    for (Complex z : probes) {
        const Matrix l = evaluate_L(conn, z);
        Matrix dl = Matrix::Zero(n, n);
        for (std::size_t e = 0; e < p.size(); ++e) dl += field[e] / (z - x[e]);
        const Complex w = z - x[a];
        dl += p[a] / (w * w);
        const Matrix m = -p[a] / w;
        const Matrix dm = p[a] / (w * w);
        const Matrix r = s.kappa * dl - s.kappa * dm + commutator(m, l);
        worst = std::max(worst, r.norm());
    }
    return worst;
}

inline double zero_curvature_residual(const SchlesingerState& s, std::size_t a,
                                      const std::vector<Complex>& probes) {
    return zero_curvature_residual(s, a, probes, schlesinger_vector_field(s, a));
}

struct FlowTrajectory {
    std::vector<Complex> params;  // flow parameter t along the straight path
    std::vector<SchlesingerState> samples;
    OdeStats stats;
};

struct FlowOptions {
    double sign = 1.0;
    int intervals = 16;
    double collision_fraction = 1e-3;
};

inline FlowTrajectory integrate_flow(const SchlesingerState& s0, std::size_t a, Complex t_end,
                                     double tol, FlowOptions opt = {}) {
    s0.validate();
    detail::require_index(a, s0.size(), "integrate_flow");
    FlowTrajectory traj;
    traj.params.push_back(0.0);
    traj.samples.push_back(s0);
    if (t_end == Complex{}) return traj;

    // straight path of x_a; first parameter where it comes too close to another point
    const auto x = s0.positions();
    double scale = 1.0;
    for (auto v : x) scale = std::max(scale, std::abs(v));
    const double limit = opt.collision_fraction * scale;
    for (std::size_t c = 0; c < x.size(); ++c) {
        if (c == a) continue;
        if (distance_to_segment(x[c], LineSegment{x[a], x[a] + t_end}) > limit) continue;
        const int probes = 4096;
        for (int i = 0; i <= probes; ++i) {
            const double s = static_cast<double>(i) / probes;
            if (std::abs(x[a] + s * t_end - x[c]) <= limit)
                throw NumericalFailure("marked points " + std::to_string(a) + " and " +
                                           std::to_string(c) + " collide",
                                       "t=" + std::to_string(s) + "*t_end");
        }
    }

    const auto n = s0.dim();
    const std::size_t count = s0.size();
    OdeOptions oo;
    oo.rtol = tol;
    oo.atol = tol;
    std::vector<Complex> pos = x;
    Dop853 ode(
        [&](double s, const State& v, State& dv) {
            pos[a] = x[a] + s * t_end;
            const auto f = detail::schlesinger_field(detail::unpack(v, count, n), pos, s0.kappa, a, opt.sign);
            dv = t_end * detail::pack(f);
        },
        oo);
    State y = detail::pack(s0.residue_matrices());
    for (int k = 1; k <= opt.intervals; ++k) {
        const double sa = static_cast<double>(k - 1) / opt.intervals;
        const double sb = static_cast<double>(k) / opt.intervals;
        try {
            traj.stats += ode.integrate(y, sa, sb);
        } catch (const NumericalFailure& e) {
            throw NumericalFailure(e.what(), "flow interval " + std::to_string(k));
        }
        SchlesingerState st = s0;
        st.times[a] = s0.times[a] + sb * t_end;
        const auto ps = detail::unpack(y, count, n);
        for (std::size_t e = 0; e < count; ++e) st.residues[e].p = ps[e];
        traj.params.push_back(sb * t_end);
        traj.samples.push_back(std::move(st));
    }
    return traj;
}

namespace detail {

inline Complex hamiltonian(const MatrixList& p, const std::vector<Complex>& x, std::size_t a) {
    Complex h{};
    for (std::size_t b = 0; b < p.size(); ++b)
        if (b != a) h += trace_pairing(p[a], p[b]) / (x[a] - x[b]);
    return h;
}

inline MatrixList hamiltonian_gradient(const MatrixList& p, const std::vector<Complex>& x, std::size_t a) {
    const auto n = p.front().rows();
    MatrixList g(p.size(), Matrix::Zero(n, n));
    for (std::size_t e = 0; e < p.size(); ++e) {
        if (e == a) continue;
        g[e] = p[a] / (x[a] - x[e]);
        g[a] += p[e] / (x[a] - x[e]);
    }
    return g;
}

}  // namespace detail

inline Complex schlesinger_hamiltonian(const SchlesingerState& s, std::size_t a) {
    detail::require_index(a, s.size(), "schlesinger_hamiltonian");
    const auto x = s.positions();
    detail::require_distinct(x, "schlesinger_hamiltonian");
    return detail::hamiltonian(s.residue_matrices(), x, a);
}

// Gradients of H_a with respect to each residue.
inline MatrixList hamiltonian_gradient(const SchlesingerState& s, std::size_t a) {
    detail::require_index(a, s.size(), "hamiltonian_gradient");
    const auto x = s.positions();
    detail::require_distinct(x, "hamiltonian_gradient");
    return detail::hamiltonian_gradient(s.residue_matrices(), x, a);
}

namespace detail {

// central difference of H_which in x_moved, residues frozen
inline Complex explicit_partial(const SchlesingerState& s, std::size_t which, std::size_t moved, double h) {
    auto x = s.positions();
    const auto p = s.residue_matrices();
    const Complex x0 = x[moved];
    x[moved] = x0 + h;
    const Complex hp = hamiltonian(p, x, which);
    x[moved] = x0 - h;
    const Complex hm = hamiltonian(p, x, which);
    return (hp - hm) / (2 * h);
}

}  // namespace detail

inline double whitham_residual(const SchlesingerState& s, std::size_t a, std::size_t b, double h) {
    detail::require_index(a, s.size(), "whitham_residual");
    detail::require_index(b, s.size(), "whitham_residual");
    if (!(h >= 1e-6 && h <= 1e-3)) throw InvalidInput("whitham_residual: h outside [1e-6, 1e-3]");
    if (a == b) return 0.0;
    const auto p = s.residue_matrices();
    const auto x = s.positions();
    const Complex br = lie_poisson_bracket(detail::hamiltonian_gradient(p, x, a),
                                           detail::hamiltonian_gradient(p, x, b), p);
    const Complex r = s.kappa * detail::explicit_partial(s, b, a, h) -
                      s.kappa * detail::explicit_partial(s, a, b, h) + br;
    return std::abs(r);
}

inline double tau_closedness(const SchlesingerState& s, std::size_t a, std::size_t b, double h) {
    detail::require_index(a, s.size(), "tau_closedness");
    detail::require_index(b, s.size(), "tau_closedness");
    if (a == b) return 0.0;
    return std::abs(detail::explicit_partial(s, a, b, h) - detail::explicit_partial(s, b, a, h));
}

// Residue discrepancy between flowing a then b and b then a.
inline double flow_commutativity(const SchlesingerState& s, std::size_t a, std::size_t b, Complex dt,
                                 double tol) {
    const auto ab = integrate_flow(integrate_flow(s, a, dt, tol).samples.back(), b, dt, tol).samples.back();
    const auto ba = integrate_flow(integrate_flow(s, b, dt, tol).samples.back(), a, dt, tol).samples.back();
    double d = 0.0;
    for (std::size_t e = 0; e < s.size(); ++e) d = std::max(d, norm_max(ab.residues[e].p - ba.residues[e].p));
    return d;
}

struct WordDrift {
    std::string word;
    double drift;
};

struct AuditReport {
    double invariant_drift = 0.0;
    double eigen_drift = 0.0;
    double sum_p_drift = 0.0;
    std::vector<WordDrift> word_drifts;
    Complex base;
    FlowTrajectory trajectory;
    MonodromyRep rep_start, rep_end;
    // per trajectory sample: word invariants (length <= 2) and eigenvalue drift
    std::vector<std::vector<WordTrace>> invariant_series;
    std::vector<double> eigen_series;
};

struct AuditOptions {
    double sign = 1.0;
    bool series = false;
    bool check_topology = true;
};

inline Complex audit_base_point(const SchlesingerState& s0, std::size_t a, Complex t_end) {
    auto pts = s0.positions();
    pts.push_back(pts[a] + t_end);
    return default_base_point(pts);
}

inline AuditReport isomonodromy_audit(const SchlesingerState& s0, std::size_t a, Complex t_end,
                                      double ode_tol, AuditOptions opt = {}) {
    AuditReport rep;
    FlowOptions fo;
    fo.sign = opt.sign;
    rep.trajectory = integrate_flow(s0, a, t_end, ode_tol, fo);
    rep.base = audit_base_point(s0, a, t_end);
    if (opt.check_topology && !loop_topology_stable(s0.positions(), a, s0.positions()[a] + t_end, rep.base))
        throw InvalidInput("isomonodromy_audit: moving point changes the loop homotopy class");

    const auto& last = rep.trajectory.samples.back();
    auto f0 = std::async(std::launch::async, [&] { return monodromy_rep(s0.connection(), rep.base, ode_tol); });
    auto f1 = std::async(std::launch::async, [&] { return monodromy_rep(last.connection(), rep.base, ode_tol); });
    rep.rep_start = f0.get();
    rep.rep_end = f1.get();
    rep.invariant_drift = rep_distance(rep.rep_start, rep.rep_end);
    const auto w0 = word_invariants(rep.rep_start, 2), w1 = word_invariants(rep.rep_end, 2);
    for (std::size_t i = 0; i < w0.size(); ++i)
        rep.word_drifts.push_back({w0[i].word, std::abs(w0[i].trace - w1[i].trace)});

    const Matrix sum0 = s0.connection().residue_sum();
    for (const auto& st : rep.trajectory.samples) {
        double ed = 0.0;
        Matrix sum = Matrix::Zero(s0.dim(), s0.dim());
        for (std::size_t e = 0; e < st.size(); ++e) {
            ed = std::max(ed, s0.residues[e].spectrum_drift(st.residues[e].p));
            sum += st.residues[e].p;
        }
        rep.eigen_drift = std::max(rep.eigen_drift, ed);
        rep.sum_p_drift = std::max(rep.sum_p_drift, (sum - sum0).norm());
        rep.eigen_series.push_back(ed);
    }
    if (opt.series) {
        for (const auto& st : rep.trajectory.samples)
            rep.invariant_series.push_back(word_invariants(monodromy_rep(st.connection(), rep.base, ode_tol), 2));
    }
    return rep;
}

}  // namespace isomono

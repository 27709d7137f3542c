#pragma once

#include <random>
#include <vector>

#include "isoflow.hpp"

namespace isomono {

// Positions are frozen; only residues evolve.
struct AutonomousState {
    std::vector<Complex> positions;
    std::vector<OrbitPoint> residues;
    std::vector<Complex> times;  // bookkeeping of accumulated flow per Hamiltonian

    std::size_t size() const { return residues.size(); }
    Eigen::Index dim() const { return residues.empty() ? 0 : residues.front().dim(); }

    MatrixList residue_matrices() const {
        MatrixList out;
        for (const auto& r : residues) out.push_back(r.p);
        return out;
    }

    FuchsianConnection connection() const { return FuchsianConnection{1.0, positions, residues, true}; }

    void validate() const {
        if (positions.size() != residues.size()) throw InvalidInput("autonomous state: size mismatch");
        connection().validate();
    }
};

inline AutonomousState make_autonomous(std::vector<Complex> x, std::vector<OrbitPoint> p) {
    std::vector<Complex> t(x.size(), Complex{});
    return AutonomousState{std::move(x), std::move(p), std::move(t)};
}

namespace detail {

inline MatrixList gaudin_field(const MatrixList& p, const std::vector<Complex>& x, std::size_t a, double sign) {
    const auto g = hamiltonian_gradient(p, x, a);
    MatrixList out(p.size());
    for (std::size_t e = 0; e < p.size(); ++e) out[e] = sign * commutator(p[e], g[e]);
    return out;
}

}  // namespace detail

inline Complex gaudin_hamiltonian(const AutonomousState& s, std::size_t a) {
    detail::require_index(a, s.size(), "gaudin_hamiltonian");
    detail::require_distinct(s.positions, "gaudin_hamiltonian");
    return detail::hamiltonian(s.residue_matrices(), s.positions, a);
}

// dp_e = [p_e, grad_e H_a]
inline MatrixList gaudin_vector_field(const AutonomousState& s, std::size_t a, double sign = 1.0) {
    detail::require_index(a, s.size(), "gaudin_vector_field");
    detail::require_distinct(s.positions, "gaudin_vector_field");
    return detail::gaudin_field(s.residue_matrices(), s.positions, a, sign);
}

inline double commutation_check(const AutonomousState& s, std::size_t a, std::size_t b) {
    detail::require_index(a, s.size(), "commutation_check");
    detail::require_index(b, s.size(), "commutation_check");
    if (a == b) return 0.0;
    const auto p = s.residue_matrices();
    return std::abs(lie_poisson_bracket(detail::hamiltonian_gradient(p, s.positions, a),
                                        detail::hamiltonian_gradient(p, s.positions, b), p));
}

struct AutonomousTrajectory {
    std::vector<Complex> params;
    std::vector<AutonomousState> samples;
    OdeStats stats;
};

inline AutonomousTrajectory autonomous_flow(const AutonomousState& s0, std::size_t a, Complex t_end, double tol,
                                            int intervals = 16) {
    s0.validate();
    detail::require_index(a, s0.size(), "autonomous_flow");
    AutonomousTrajectory traj;
    traj.params.push_back(0.0);
    traj.samples.push_back(s0);
    if (t_end == Complex{}) return traj;
    const auto n = s0.dim();
    const std::size_t count = s0.size();
    OdeOptions oo;
    oo.rtol = tol;
    oo.atol = tol;
    Dop853 ode(
        [&](double, const State& v, State& dv) {
            dv = t_end * detail::pack(detail::gaudin_field(detail::unpack(v, count, n), s0.positions, a, 1.0));
        },
        oo);
    State y = detail::pack(s0.residue_matrices());
    for (int k = 1; k <= intervals; ++k) {
        const double sa = static_cast<double>(k - 1) / intervals, sb = static_cast<double>(k) / intervals;
        try {
            traj.stats += ode.integrate(y, sa, sb);
        } catch (const NumericalFailure& e) {
            throw NumericalFailure(e.what(), "flow interval " + std::to_string(k));
        }
        AutonomousState st = s0;
        st.times[a] += sb * t_end;
        const auto ps = detail::unpack(y, count, n);
        for (std::size_t e = 0; e < count; ++e) st.residues[e].p = ps[e];
        traj.params.push_back(sb * t_end);
        traj.samples.push_back(std::move(st));
    }
    return traj;
}

inline AutonomousTrajectory as_autonomous(const FlowTrajectory& t) {
    AutonomousTrajectory out;
    out.params = t.params;
    out.stats = t.stats;
    for (const auto& s : t.samples) out.samples.push_back(AutonomousState{s.positions(), s.residues, s.times});
    return out;
}

struct SpectralProbe {
    Complex lambda, z;
};

// Probes keep at least `margin` away from every marked point of every sample.
inline std::vector<SpectralProbe> spectral_probes(const AutonomousTrajectory& traj, int count, std::uint64_t seed,
                                                  double margin = 0.25) {
    std::vector<Complex> pts;
    for (const auto& s : traj.samples) pts.insert(pts.end(), s.positions.begin(), s.positions.end());
    double r = 1.0;
    for (auto x : pts) r = std::max(r, std::abs(x) + 1.0);
    std::mt19937_64 rng(seed);
    std::vector<SpectralProbe> out;
    while (static_cast<int>(out.size()) < count) {
        const Complex z(uniform(rng, -r, r), uniform(rng, -r, r));
        bool ok = true;
        for (auto x : pts) ok = ok && std::abs(z - x) > margin;
        const Complex lam(uniform(rng, -1, 1), uniform(rng, -1, 1));
        if (ok) out.push_back({lam, z});
    }
    return out;
}

// max relative change of det(lambda + L(z)) along the trajectory
inline double spectral_conservation_audit(const AutonomousTrajectory& traj, int probes = 20, std::uint64_t seed = 7) {
    if (traj.samples.empty()) throw InvalidInput("spectral audit: empty trajectory");
    const auto pr = spectral_probes(traj, probes, seed);
    const auto n = traj.samples.front().dim();
    const auto c0 = traj.samples.front().connection();
    std::vector<Complex> ref;
    for (const auto& q : pr)
        ref.push_back((q.lambda * Matrix::Identity(n, n) + evaluate_L(c0, q.z)).determinant());
    double worst = 0.0;
    for (const auto& s : traj.samples) {
        const auto c = s.connection();
        for (std::size_t i = 0; i < pr.size(); ++i) {
            const Complex d = (pr[i].lambda * Matrix::Identity(n, n) + evaluate_L(c, pr[i].z)).determinant();
            worst = std::max(worst, std::abs(d - ref[i]) / std::max(1.0, std::abs(ref[i])));
        }
    }
    return worst;
}

// max over probes of |d_a L - [L, M0_a]|, M0_a = -p_a/(z - x_a)
inline double lax_form_residual(const AutonomousState& s, std::size_t a, const std::vector<Complex>& probes,
                                double sign = 1.0) {
    const auto f = gaudin_vector_field(s, a, sign);
    const auto conn = s.connection();
    const auto n = s.dim();
    double worst = 0.0;
    for (Complex z : probes) {
        const Matrix l = evaluate_L(conn, z);
        Matrix dl = Matrix::Zero(n, n);
        for (std::size_t e = 0; e < s.size(); ++e) dl += f[e] / (z - s.positions[e]);
        const Matrix m = -s.residues[a].p / (z - s.positions[a]);
        worst = std::max(worst, (dl - commutator(l, m)).norm());
    }
    return worst;
}

}  // namespace isomono

#include <gtest/gtest.h>

#include <isomono/hitchin.hpp>
#include <isomono/random.hpp>

using namespace isomono;

namespace {

AutonomousState random_autonomous(std::uint64_t seed, std::size_t n = 4, Eigen::Index dim = 2) {
    RandomStateSpec spec;
    spec.points = n;
    spec.dim = dim;
    const auto s = random_schlesinger_state(spec, seed);
    return make_autonomous(s.positions(), s.residues);
}

std::vector<Complex> probes_for(const AutonomousState& s, int count) {
    std::mt19937_64 rng(count);
    std::vector<Complex> out;
    while (static_cast<int>(out.size()) < count) {
        const Complex z(uniform(rng, -4, 4), uniform(rng, -4, 4));
        bool ok = true;
        for (auto v : s.positions) ok = ok && std::abs(z - v) > 0.2;
        if (ok) out.push_back(z);
    }
    return out;
}

Complex trace_power(const AutonomousState& s, Complex z, int k) {
    const Matrix l = evaluate_L(s.connection(), z);
    Matrix m = l;
    for (int i = 1; i < k; ++i) m = m * l;
    return m.trace();
}

}  // namespace

TEST(GaudinField, TwoPointsAreStationary) {
    const OrbitPoint p = orbit_sample({0.4, -0.4}, 1);
    const auto s = make_autonomous({0.0, 1.0}, {p, orbit_from_matrix(-p.p)});
    for (const auto& f : gaudin_vector_field(s, 0)) EXPECT_LT(norm_max(f), 1e-15);
}

TEST(GaudinField, TotalFieldVanishes) {
    const auto s = random_autonomous(1, 5, 3);
    Matrix sum = Matrix::Zero(3, 3);
    for (const auto& f : gaudin_vector_field(s, 2)) sum += f;
    EXPECT_LT(norm_max(sum), 1e-13);
}

TEST(GaudinField, IsLiePoissonFlowOfHamiltonian) {
    const auto s = random_autonomous(2, 4, 3);
    std::mt19937_64 rng(4);
    const double h = 1e-5;
    for (std::size_t a = 0; a < 4; ++a) {
        const auto f = gaudin_vector_field(s, a);
        for (std::size_t e = 0; e < 4; ++e) {
            // dp_e/dt pairs with X as {H_a, <p_e, X>}; the gradient comes from a finite difference
            const Matrix x = random_matrix(rng, 3);
            MatrixList grad(4);
            for (std::size_t b = 0; b < 4; ++b) {
                grad[b] = Matrix::Zero(3, 3);
                for (Eigen::Index i = 0; i < 3; ++i)
                    for (Eigen::Index j = 0; j < 3; ++j) {
                        auto sp = s, sm = s;
                        sp.residues[b].p(j, i) += h;
                        sm.residues[b].p(j, i) -= h;
                        grad[b](i, j) = (gaudin_hamiltonian(sp, a) - gaudin_hamiltonian(sm, a)) / (2 * h);
                    }
            }
            MatrixList lin(4, Matrix::Zero(3, 3));
            lin[e] = x;
            const Complex br = lie_poisson_bracket(grad, lin, s.residue_matrices());
            EXPECT_LT(std::abs(br - trace_pairing(f[e], x)), 1e-8);
        }
    }
}

TEST(Commutation, HamiltoniansPoissonCommute) {
    for (Eigen::Index dim : {2, 3}) {
        const auto s = random_autonomous(3 + dim, 5, dim);
        for (std::size_t a = 0; a < 5; ++a)
            for (std::size_t b = 0; b < 5; ++b) EXPECT_LT(commutation_check(s, a, b), 1e-11);
    }
}

TEST(Commutation, DiagonalResiduesCommuteExactly) {
    Matrix d1 = Matrix::Zero(2, 2), d2 = Matrix::Zero(2, 2);
    d1.diagonal() << 0.5, -0.5;
    d2.diagonal() << -0.2, 0.2;
    const auto s = make_autonomous({0.0, 1.0, Complex(0, 2)},
                                   {orbit_from_matrix(d1), orbit_from_matrix(d2), orbit_from_matrix(-d1 - d2)});
    EXPECT_LT(commutation_check(s, 0, 1), 1e-14);
}

TEST(AutonomousFlow, ZeroTimeLeavesStateUnchanged) {
    const auto s = random_autonomous(6);
    const auto t = autonomous_flow(s, 0, 0.0, 1e-10);
    ASSERT_EQ(t.samples.size(), 1u);
    EXPECT_EQ(norm_max(t.samples[0].residues[0].p - s.residues[0].p), 0.0);
}

TEST(AutonomousFlow, ConservesEnergiesAndSpectralInvariants) {
    const auto s = random_autonomous(7, 4, 3);
    const auto t = autonomous_flow(s, 1, Complex(1.0, 0.5), 1e-11);
    const auto pr = probes_for(s, 5);
    const auto& end = t.samples.back();
    for (std::size_t b = 0; b < 4; ++b)
        EXPECT_LT(std::abs(gaudin_hamiltonian(end, b) - gaudin_hamiltonian(s, b)), 1e-8);
    for (Complex z : pr)
        for (int k = 2; k <= 3; ++k)
            EXPECT_LT(std::abs(trace_power(end, z, k) - trace_power(s, z, k)), 1e-8);
    for (std::size_t e = 0; e < 4; ++e) {
        EXPECT_EQ(end.positions[e], s.positions[e]);
        EXPECT_LT(s.residues[e].spectrum_drift(end.residues[e].p), 1e-9);
    }
    EXPECT_GT(norm_max(end.residues[0].p - s.residues[0].p), 1e-3);
}

TEST(AutonomousFlow, FlowsCommute) {
    const auto s = random_autonomous(8, 4);
    const Complex dt(0.1, 0.0);
    const auto ab = autonomous_flow(autonomous_flow(s, 0, dt, 1e-12).samples.back(), 2, dt, 1e-12).samples.back();
    const auto ba = autonomous_flow(autonomous_flow(s, 2, dt, 1e-12).samples.back(), 0, dt, 1e-12).samples.back();
    for (std::size_t e = 0; e < 4; ++e) EXPECT_LT(norm_max(ab.residues[e].p - ba.residues[e].p), 1e-7);
}

TEST(SpectralAudit, ConservedUnderGaudinFlow) {
    const auto s = random_autonomous(9, 3);
    EXPECT_LT(spectral_conservation_audit(autonomous_flow(s, 0, 1.0, 1e-11)), 1e-8);
}

TEST(SpectralAudit, StationaryTrajectory) {
    const Matrix z = Matrix::Zero(2, 2);
    const auto s = make_autonomous({0.0, 1.0}, {orbit_from_matrix(z), orbit_from_matrix(z)});
    EXPECT_EQ(spectral_conservation_audit(autonomous_flow(s, 0, 1.0, 1e-10)), 0.0);
}

TEST(SpectralAudit, DetectsMovingPoles) {
    const Complex dt(0.3, 0.2);
    RandomStateSpec spec;
    const auto s = random_schlesinger_state(spec, 10, FlowSpec{0, dt});
    EXPECT_GT(spectral_conservation_audit(as_autonomous(integrate_flow(s, 0, dt, 1e-10))), 1e-3);
}

TEST(LaxForm, HoldsOnlyWithCorrectSign) {
    const auto s = random_autonomous(11, 4, 3);
    const auto pr = probes_for(s, 10);
    for (std::size_t a = 0; a < 4; ++a) EXPECT_LT(lax_form_residual(s, a, pr), 1e-12);
    EXPECT_GT(lax_form_residual(s, 0, pr, -1.0), 1e-3);
}

#include <gtest/gtest.h>

#include <isomono/random.hpp>

using namespace isomono;

namespace {

SchlesingerState random_state(std::uint64_t seed, std::size_t n = 3, Eigen::Index dim = 2,
                              Complex kappa = 1.0) {
    RandomStateSpec spec;
    spec.points = n;
    spec.dim = dim;
    spec.kappa = kappa;
    return random_schlesinger_state(spec, seed);
}

std::vector<Complex> probes_for(const SchlesingerState& s, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Complex> out;
    const auto x = s.positions();
    while (static_cast<int>(out.size()) < count) {
        const Complex z(uniform(rng, -4, 4), uniform(rng, -4, 4));
        bool ok = true;
        for (auto v : x) ok = ok && std::abs(z - v) > 0.2;
        if (ok) out.push_back(z);
    }
    return out;
}

}  // namespace

TEST(SchlesingerField, TwoPointsAreStationary) {
    const OrbitPoint p = orbit_sample({0.4, -0.4}, 1);
    const auto s = make_state(1.0, {0.0, 1.0}, {p, orbit_from_matrix(-p.p)});
    for (std::size_t a = 0; a < 2; ++a)
        for (const auto& f : schlesinger_vector_field(s, a)) EXPECT_LT(norm_max(f), 1e-15);
}

TEST(SchlesingerField, CommutingResiduesAreStationary) {
    Matrix d1 = Matrix::Zero(3, 3), d2 = Matrix::Zero(3, 3);
    d1.diagonal() << 0.5, -0.2, -0.3;
    d2.diagonal() << -0.1, 0.4, -0.3;
    const auto s = make_state(1.0, {0.0, 1.0, Complex(0, 2)},
                              {orbit_from_matrix(d1), orbit_from_matrix(d2), orbit_from_matrix(-d1 - d2)});
    for (const auto& f : schlesinger_vector_field(s, 1)) EXPECT_EQ(norm_max(f), 0.0);
}

TEST(SchlesingerField, TotalFieldVanishes) {
    const auto s = random_state(2, 4, 3);
    for (std::size_t a = 0; a < 4; ++a) {
        Matrix sum = Matrix::Zero(3, 3);
        for (const auto& f : schlesinger_vector_field(s, a)) sum += f;
        EXPECT_LT(norm_max(sum), 1e-14);
    }
}

TEST(SchlesingerField, RejectsBadIndexAndCoincidentPoints) {
    auto s = random_state(3);
    EXPECT_THROW(schlesinger_vector_field(s, 3), InvalidInput);
    s.times[1] = s.reference_positions[0] - s.reference_positions[1];
    EXPECT_THROW(schlesinger_vector_field(s, 0), InvalidInput);
}

TEST(ZeroCurvature, HoldsForRandomStates) {
    for (std::uint64_t seed = 10; seed < 15; ++seed)
        for (Complex kappa : {Complex(1.0), Complex(0.7, 0.4)}) {
            const auto s = random_state(seed, 4, seed % 2 ? 2 : 3, kappa);
            const auto pr = probes_for(s, 12, seed);
            for (std::size_t a = 0; a < s.size(); ++a) EXPECT_LT(zero_curvature_residual(s, a, pr), 1e-12);
        }
}

TEST(ZeroCurvature, FlippedSignFails) {
    const auto s = random_state(16, 4);
    const auto pr = probes_for(s, 12, 1);
    EXPECT_GT(zero_curvature_residual(s, 0, pr, schlesinger_vector_field(s, 0, -1.0)), 1e-3);
}

TEST(ZeroCurvature, TrivialConnection) {
    const Matrix z = Matrix::Zero(2, 2);
    const auto s = make_state(1.0, {0.0, 1.0, 2.0}, {orbit_from_matrix(z), orbit_from_matrix(z), orbit_from_matrix(z)});
    EXPECT_EQ(zero_curvature_residual(s, 1, {Complex(0.5, 0.5)}), 0.0);
}

TEST(IntegrateFlow, ZeroTimeReturnsInitialState) {
    const auto s = random_state(20);
    const auto t = integrate_flow(s, 0, 0.0, 1e-10);
    ASSERT_EQ(t.samples.size(), 1u);
    EXPECT_EQ(norm_max(t.samples[0].residues[1].p - s.residues[1].p), 0.0);
}

TEST(IntegrateFlow, TwoPointFlowOnlyMovesPosition) {
    const OrbitPoint p = orbit_sample({0.4, -0.4}, 1);
    const auto s = make_state(1.0, {0.0, 1.0}, {p, orbit_from_matrix(-p.p)});
    const auto t = integrate_flow(s, 0, Complex(0.2, 0.1), 1e-10);
    EXPECT_LT(norm_max(t.samples.back().residues[0].p - p.p), 1e-14);
    EXPECT_EQ(t.samples.back().positions()[0], Complex(0.2, 0.1));
}

TEST(IntegrateFlow, IsospectralWithIntermediateSamples) {
    const Complex dt(0.3, 0.2);
    RandomStateSpec spec;
    const auto s = random_schlesinger_state(spec, 21, FlowSpec{0, dt});
    const auto t = integrate_flow(s, 0, dt, 1e-10);
    EXPECT_GE(t.samples.size(), 9u);
    for (const auto& st : t.samples) {
        Matrix sum = Matrix::Zero(2, 2);
        for (std::size_t e = 0; e < st.size(); ++e) {
            EXPECT_LT(s.residues[e].spectrum_drift(st.residues[e].p), 1e-9);
            sum += st.residues[e].p;
        }
        EXPECT_LT(norm_max(sum), 1e-12);
    }
    EXPECT_GT(norm_max(t.samples.back().residues[1].p - s.residues[1].p), 1e-4);
}

TEST(IntegrateFlow, CollisionIsReported) {
    const auto s = random_state(22);
    const auto x = s.positions();
    try {
        integrate_flow(s, 0, 2.0 * (x[1] - x[0]), 1e-10);
        FAIL() << "expected a collision";
    } catch (const NumericalFailure& e) {
        EXPECT_NE(std::string(e.what()).find("marked points 0 and 1"), std::string::npos);
    }
}

TEST(Hamiltonian, TwoPointValues) {
    const OrbitPoint p = orbit_sample({0.4, -0.4}, 1);
    const auto s = make_state(1.0, {0.0, Complex(1, 1)}, {p, orbit_from_matrix(-p.p)});
    const Complex h1 = trace_pairing(p.p, -p.p) / Complex(-1, -1);
    EXPECT_LT(std::abs(schlesinger_hamiltonian(s, 0) - h1), 1e-15);
    EXPECT_LT(std::abs(schlesinger_hamiltonian(s, 1) + h1), 1e-15);
}

TEST(Hamiltonian, SumVanishes) {
    const auto s = random_state(30, 5, 3);
    Complex sum{};
    for (std::size_t a = 0; a < 5; ++a) sum += schlesinger_hamiltonian(s, a);
    EXPECT_LT(std::abs(sum), 1e-13);
}

TEST(Hamiltonian, GradientMatchesFiniteDifference) {
    const auto s = random_state(31, 4, 3);
    std::mt19937_64 rng(1);
    const double h = 1e-5;
    for (std::size_t a = 0; a < 4; ++a) {
        const auto g = hamiltonian_gradient(s, a);
        for (std::size_t e = 0; e < 4; ++e) {
            const Matrix d = random_matrix(rng, 3);
            auto sp = s, sm = s;
            sp.residues[e].p += h * d;
            sm.residues[e].p -= h * d;
            const Complex fd = (schlesinger_hamiltonian(sp, a) - schlesinger_hamiltonian(sm, a)) / (2 * h);
            EXPECT_LT(std::abs(fd - trace_pairing(g[e], d)), 1e-8);
        }
    }
}

TEST(Hamiltonian, GeneratesTheFlow) {
    for (Complex kappa : {Complex(1.0), Complex(0.5, -0.8)}) {
        const auto s = random_state(32, 4, 3, kappa);
        std::mt19937_64 rng(2);
        for (std::size_t a = 0; a < 4; ++a) {
            const auto f = schlesinger_vector_field(s, a);
            for (std::size_t e = 0; e < 4; ++e) {
                const Matrix x = random_matrix(rng, 3);
                MatrixList lin(4, Matrix::Zero(3, 3));
                lin[e] = x;
                const Complex br = lie_poisson_bracket(hamiltonian_gradient(s, a), lin, s.residue_matrices());
                EXPECT_LT(std::abs(br - kappa * trace_pairing(f[e], x)), 1e-11);
            }
        }
    }
}

TEST(Whitham, ResidualSmall) {
    for (Complex kappa : {Complex(1.0), Complex(0.6, 0.3)}) {
        const auto s = random_state(40, 4, 2, kappa);
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) EXPECT_LT(whitham_residual(s, a, b, 1e-4), 1e-6);
    }
}

TEST(Whitham, CommutingResiduesAndValidation) {
    Matrix d1 = Matrix::Zero(2, 2), d2 = Matrix::Zero(2, 2);
    d1.diagonal() << 0.5, -0.5;
    d2.diagonal() << -0.2, 0.2;
    const auto s = make_state(1.0, {0.0, 1.0, Complex(0, 2)},
                              {orbit_from_matrix(d1), orbit_from_matrix(d2), orbit_from_matrix(-d1 - d2)});
    EXPECT_LT(whitham_residual(s, 0, 2, 1e-4), 1e-10);
    EXPECT_EQ(whitham_residual(s, 1, 1, 1e-4), 0.0);
    EXPECT_THROW(whitham_residual(s, 0, 1, 1e-2), InvalidInput);
    EXPECT_THROW(whitham_residual(s, 0, 1, 1e-8), InvalidInput);
}

TEST(TauFunction, LogarithmicFormIsClosed) {
    const auto s = random_state(41, 4, 3);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) EXPECT_LT(tau_closedness(s, a, b, 1e-4), 1e-7);
}

TEST(FlowCommutativity, SmallResidual) {
    RandomStateSpec spec;
    spec.points = 4;
    const auto s = random_schlesinger_state(spec, 42);
    EXPECT_LT(flow_commutativity(s, 0, 1, Complex(0.05, 0.02), 1e-11), 1e-6);
}

TEST(Audit, ZeroTimeHasZeroDrift) {
    const auto s = random_state(50, 3);
    const auto r = isomonodromy_audit(s, 0, 0.0, 1e-10);
    EXPECT_EQ(r.invariant_drift, 0.0);
    // measured against the prescribed spectrum, so only eigensolver roundoff remains
    EXPECT_LT(r.eigen_drift, 1e-14);
}

TEST(Audit, FlowPreservesMonodromy) {
    const Complex dt(0.2, -0.2);
    RandomStateSpec spec;
    spec.points = 4;
    const auto s = random_schlesinger_state(spec, 51, FlowSpec{2, dt});
    const auto r = isomonodromy_audit(s, 2, dt, 1e-10);
    EXPECT_LT(r.invariant_drift, 1e-6);
    EXPECT_LT(r.eigen_drift, 1e-9);
    EXPECT_LT(r.sum_p_drift, 1e-12);
    EXPECT_LT(r.rep_start.product_defect(), 1e-7);

    AuditOptions flipped;
    flipped.sign = -1.0;
    EXPECT_GT(isomonodromy_audit(s, 2, dt, 1e-10, flipped).invariant_drift, 1e-2);
}

TEST(Audit, SeriesHasOneEntryPerSample) {
    const Complex dt(0.1, 0.1);
    RandomStateSpec spec;
    const auto s = random_schlesinger_state(spec, 52, FlowSpec{1, dt});
    AuditOptions o;
    o.series = true;
    const auto r = isomonodromy_audit(s, 1, dt, 1e-10, o);
    EXPECT_EQ(r.invariant_series.size(), r.trajectory.samples.size());
    EXPECT_EQ(r.eigen_series.size(), r.trajectory.samples.size());
}

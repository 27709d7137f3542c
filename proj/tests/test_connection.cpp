#include <gtest/gtest.h>

#include <isomono/connection.hpp>
#include <isomono/random.hpp>

using namespace isomono;

namespace {

Matrix diag2(Complex a, Complex b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

FuchsianConnection random_connection(std::uint64_t seed, std::size_t n = 3, Eigen::Index dim = 2) {
    RandomStateSpec spec;
    spec.points = n;
    spec.dim = dim;
    return random_schlesinger_state(spec, seed).connection();
}

}  // namespace

TEST(EvaluateL, SinglePoint) {
    const Matrix p = diag2(0.3, -0.3);
    FuchsianConnection c{1.0, {0.0}, {orbit_from_matrix(p)}, false};
    EXPECT_LT(norm_max(evaluate_L(c, 2.0) - p / 2.0), 1e-16);
}

TEST(EvaluateL, RejectsPoleWithIndex) {
    const auto c = random_connection(1);
    try {
        evaluate_L(c, c.points[2]);
        FAIL() << "expected rejection";
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("marked point 2"), std::string::npos);
    }
}

TEST(EvaluateL, DecaysLikeInverseSquare) {
    const auto c = random_connection(2);
    std::vector<double> scaled;
    for (double r : {1e2, 1e3, 1e4}) scaled.push_back(evaluate_L(c, std::polar(r, 0.7)).norm() * r * r);
    // R^2 |L| converges to |sum_a x_a p_a| at infinity
    EXPECT_LT(std::abs(scaled[2] - scaled[1]), 0.05 * scaled[1]);
    EXPECT_LT(scaled[2], 100.0);
}

TEST(EvaluateL, ResidueAlongFourDirections) {
    const auto c = random_connection(3);
    for (std::size_t a = 0; a < c.size(); ++a)
        for (int d = 0; d < 4; ++d) {
            const Complex z = c.points[a] + std::polar(1e-9, d * kPi / 2 + 0.1);
            const Complex w = z - c.points[a];  // exact offset of the representable probe
            EXPECT_LT(norm_max(w * evaluate_L(c, z) - c.residues[a].p), 1e-8);
        }
}

TEST(EvaluateL, TranslationCovariantAndLinear) {
    auto c = random_connection(4);
    const Complex z(0.37, -1.9), shift(2.5, -0.75);
    const Matrix l0 = evaluate_L(c, z);
    auto moved = c;
    for (auto& x : moved.points) x += shift;
    EXPECT_LT(norm_max(evaluate_L(moved, z + shift) - l0), 1e-13);
    auto doubled = c;
    for (auto& r : doubled.residues) r = orbit_from_matrix(2.0 * r.p);
    EXPECT_LT(norm_max(evaluate_L(doubled, z) - 2.0 * l0), 1e-14);
}

TEST(Connection, ValidationErrors) {
    const Matrix p = diag2(0.3, -0.3);
    FuchsianConnection c{1.0, {0.0, 1.0}, {orbit_from_matrix(p), orbit_from_matrix(-p)}, true};
    EXPECT_NO_THROW(c.validate());
    auto bad = c;
    bad.kappa = 0.0;
    EXPECT_THROW(bad.validate(), InvalidInput);
    bad = c;
    bad.points[1] = 0.0;
    EXPECT_THROW(bad.validate(), InvalidInput);
    bad = c;
    bad.residues[1] = orbit_from_matrix(diag2(0.2, -0.2));
    EXPECT_THROW(bad.validate(), InvalidInput);
    bad.trivial_at_infinity = false;
    EXPECT_NO_THROW(bad.validate());
}

TEST(SpectralCurve, SingleDiagonalPoint) {
    const Complex th(0.4, 0.2), x(0.5, -1.0);
    FuchsianConnection c{1.0, {x}, {orbit_from_matrix(diag2(th, -th))}, false};
    const auto sc = spectral_curve(c);
    for (Complex z : {Complex(1.0, 1.0), Complex(-2.0, 0.3)}) {
        EXPECT_LT(std::abs(sc.coefficient(1, z)), 1e-15);
        const Complex expect = -th * th / ((z - x) * (z - x));
        EXPECT_LT(std::abs(sc.coefficient(2, z) - expect), 1e-14);
    }
}

TEST(SpectralCurve, ZeroResiduesGiveZeroCurve) {
    const Matrix z = Matrix::Zero(3, 3);
    FuchsianConnection c{1.0, {0.0, 1.0, 2.0}, {orbit_from_matrix(z), orbit_from_matrix(z), orbit_from_matrix(z)}, true};
    const auto sc = spectral_curve(c);
    for (int k = 1; k <= 3; ++k) EXPECT_EQ(sc.coefficient(k, Complex(0.3, 0.7)), Complex{});
}

TEST(SpectralCurve, MatchesDeterminantAtRandomProbes) {
    for (Eigen::Index dim : {2, 3})
        for (std::size_t n : {3u, 4u}) {
            const auto c = random_connection(10 + dim * 10 + n, n, dim);
            const auto sc = spectral_curve(c);
            std::mt19937_64 rng(99);
            for (int i = 0; i < 20; ++i) {
                const Complex z(uniform(rng, -3, 3), uniform(rng, -3, 3));
                const Complex lam(uniform(rng, -1, 1), uniform(rng, -1, 1));
                const Complex det = (lam * Matrix::Identity(dim, dim) + evaluate_L(c, z)).determinant();
                EXPECT_LT(std::abs(sc.characteristic(lam, z) - det), 1e-9 * std::max(1.0, std::abs(det)));
                EXPECT_LT(std::abs(sc.coefficient(1, z)), 1e-12);
            }
            for (int k = 1; k <= dim; ++k)
                for (const auto& t : sc.s[static_cast<std::size_t>(k - 1)]) EXPECT_LE(t.order, k);
        }
}

TEST(SpectralCurve, ConjugationInvariant) {
    const auto c = random_connection(21, 4, 3);
    std::mt19937_64 rng(5);
    const Matrix g = Matrix::Identity(3, 3) + random_matrix(rng, 3, 0.4);
    auto cg = c;
    for (auto& r : cg.residues) r.p = g * r.p * g.inverse();
    const auto a = spectral_curve(c), b = spectral_curve(cg);
    for (int k = 1; k <= 3; ++k)
        for (std::size_t i = 0; i < a.s[static_cast<std::size_t>(k - 1)].size(); ++i) {
            const auto& ta = a.s[static_cast<std::size_t>(k - 1)][i];
            const auto& tb = b.s[static_cast<std::size_t>(k - 1)][i];
            EXPECT_EQ(ta.point, tb.point);
            EXPECT_EQ(ta.order, tb.order);
            EXPECT_LT(std::abs(ta.coeff - tb.coeff), 1e-10);
        }
}

TEST(SpectralCurve, QuadraticCoefficientDecaysAtInfinity) {
    const auto c = random_connection(22);
    const auto sc = spectral_curve(c);
    for (double r : {1e3, 1e4}) {
        const Complex z = std::polar(r, 1.1);
        EXPECT_LT(std::abs(z * z * sc.coefficient(2, z)), 10.0);
    }
    for (const auto& tail : sc.tail) EXPECT_TRUE(tail.empty());
}

TEST(ModuliDimension, KnownValues) {
    EXPECT_EQ(moduli_dimension(0, 4, 2).value, 1);
    EXPECT_EQ(moduli_dimension(0, 4, 3).value, 3);
    EXPECT_EQ(moduli_dimension(2, 0, 2).value, 3);
    const auto neg = moduli_dimension(0, 1, 2);
    EXPECT_EQ(neg.value, -2);
    EXPECT_TRUE(neg.no_moduli);
    EXPECT_FALSE(moduli_dimension(1, 1, 3).no_moduli);
    EXPECT_THROW(moduli_dimension(0, 3, 1), InvalidInput);
    EXPECT_THROW(moduli_dimension(-1, 3, 2), InvalidInput);
}

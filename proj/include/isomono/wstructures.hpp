#pragma once

#include <array>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "jet.hpp"

namespace isomono {

// Local field sample at one point. W and rho are used at level 3 only; A and
// Abar are zero jets when the sample is not gauged.
struct WFieldSample {
    Complex kappa{1.0, 0.0};
    int level = 2;
    Eigen::Index n = 2;
    bool gauged = false;
    BiJet T, mu, W, rho;
    MatrixBiJet A, Abar;

    int order_z() const { return T.order_z(); }
    int order_zbar() const { return T.order_zbar(); }

    // minimal (J, K) for the curvature identities at this level
    static std::pair<int, int> required_orders(int level) { return level == 3 ? std::pair{5, 1} : std::pair{3, 1}; }

    void validate() const {
        if (kappa == Complex{}) throw InvalidInput("sample: kappa must be nonzero");
        if (level != 2 && level != 3) throw InvalidInput("sample: level must be 2 or 3");
        if (n < 1) throw InvalidInput("sample: dimension must be positive");
        const auto [jn, kn] = required_orders(level);
        if (order_z() < jn || order_zbar() < kn)
            throw InvalidInput("sample: truncation (" + std::to_string(order_z()) + "," + std::to_string(order_zbar()) +
                               ") below required (" + std::to_string(jn) + "," + std::to_string(kn) + ")");
        auto same = [&](const auto& x, const char* name) {
            if (x.order_z() != order_z() || x.order_zbar() != order_zbar() || x.z0() != T.z0() ||
                x.zbar0() != T.zbar0())
                throw InvalidInput(std::string("sample: field ") + name + " has mismatched truncation or point");
        };
        same(mu, "mu");
        same(W, "W");
        same(rho, "rho");
        same(A, "A");
        same(Abar, "Abar");
        if (A.zero().rows() != n || Abar.zero().rows() != n)
            throw InvalidInput("sample: gauge field dimension differs from n");
    }
};

inline WFieldSample make_sample(Complex kappa, int level, Eigen::Index n, BiJet T, BiJet mu) {
    WFieldSample s;
    s.kappa = kappa;
    s.level = level;
    s.n = n;
    const int j = T.order_z(), k = T.order_zbar();
    s.W = T.like();
    s.rho = T.like();
    s.W.set_lost(0, 0);
    s.rho.set_lost(0, 0);
    s.A = MatrixBiJet(j, k, Matrix::Zero(n, n), T.z0(), T.zbar0());
    s.Abar = s.A;
    s.T = std::move(T);
    s.mu = std::move(mu);
    return s;
}

inline WFieldSample random_sample(std::mt19937_64& rng, int level, Eigen::Index n, bool gauged, Complex kappa,
                                  int j = 6, int k = 2) {
    WFieldSample s = make_sample(kappa, level, n, random_jet(rng, j, k), random_jet(rng, j, k));
    if (level == 3) {
        s.W = random_jet(rng, j, k);
        s.rho = random_jet(rng, j, k);
    }
    if (gauged) {
        s.gauged = true;
        s.A = random_matrix_jet(rng, n, j, k);
        s.Abar = random_matrix_jet(rng, n, j, k);
    }
    return s;
}

// ---- W2 ----

inline BiJet w2_projective_residual_jet(const WFieldSample& s) {
    const BiJet& t = s.T;
    const BiJet& mu = s.mu;
    return t.d_zbar() + mu * t.d_z() + 2.0 * (mu.d_z() * t) - (s.kappa * s.kappa / 2.0) * mu.d_z(3);
}

// (dbar + mu d + 2 d mu) T - kappa^2/2 d^3 mu at the point
inline Complex w2_projective_residual(const WFieldSample& s) {
    s.validate();
    if (s.level != 2 || s.gauged) throw InvalidInput("w2_projective_residual: needs an ungauged level-2 sample");
    return w2_projective_residual_jet(s).value();
}

// mu = -dbar F / d F, T = -(kappa^2/2) S(F)
inline WFieldSample w2_from_map(const BiJet& f, Complex kappa, Eigen::Index n = 2) {
    if (f.order_z() < 1 || std::abs(f(1, 0)) <= 1e-12) throw InvalidInput("w2_from_map: degenerate map");
    const BiJet mu = -(f.d_zbar() * reciprocal(f.d_z()));
    const BiJet t = (-(kappa * kappa) / 2.0) * schwarzian(f);
    return make_sample(kappa, 2, n, t, mu);
}

// ---- block matrices ----

template <std::size_t M>
using Blocks = std::array<std::array<MatrixBiJet, M>, M>;

template <std::size_t M>
MatrixBiJet assemble(const Blocks<M>& b) {
    const auto n = b[0][0].zero().rows();
    const auto& ref = b[0][0];
    MatrixBiJet out(ref.order_z(), ref.order_zbar(), Matrix::Zero(M * n, M * n), ref.z0(), ref.zbar0());
    int lz = 0, lk = 0;
    for (std::size_t r = 0; r < M; ++r)
        for (std::size_t c = 0; c < M; ++c) {
            ref.check(b[r][c]);
            lz = std::max(lz, b[r][c].lost_z());
            lk = std::max(lk, b[r][c].lost_zbar());
            for (int j = 0; j <= ref.order_z(); ++j)
                for (int k = 0; k <= ref.order_zbar(); ++k)
                    out(j, k).block(static_cast<Eigen::Index>(r) * n, static_cast<Eigen::Index>(c) * n, n, n) =
                        b[r][c](j, k);
        }
    out.set_lost(lz, lk);
    return out;
}

template <std::size_t M>
Blocks<M> split(const MatrixBiJet& big, Eigen::Index n) {
    Blocks<M> out;
    for (std::size_t r = 0; r < M; ++r)
        for (std::size_t c = 0; c < M; ++c) {
            MatrixBiJet b(big.order_z(), big.order_zbar(), Matrix::Zero(n, n), big.z0(), big.zbar0());
            for (int j = 0; j <= big.order_z(); ++j)
                for (int k = 0; k <= big.order_zbar(); ++k)
                    b(j, k) = big(j, k).block(static_cast<Eigen::Index>(r) * n, static_cast<Eigen::Index>(c) * n, n, n);
            b.set_lost(big.lost_z(), big.lost_zbar());
            out[r][c] = std::move(b);
        }
    return out;
}

// dbar(Acal) - kappa d(Abarcal) + [Acal, Abarcal], split into N x N blocks
template <std::size_t M>
Blocks<M> curvature(const Blocks<M>& a, const Blocks<M>& abar, Complex kappa) {
    const MatrixBiJet x = assemble<M>(a), y = assemble<M>(abar);
    const MatrixBiJet f = x.d_zbar() - kappa * y.d_z() + (x * y - y * x);
    return split<M>(f, a[0][0].zero().rows());
}

template <std::size_t M>
double max_block_abs(const Blocks<M>& b, std::initializer_list<std::pair<int, int>> which) {
    double m = 0.0;
    for (auto [r, c] : which) m = std::max(m, b[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].max_abs());
    return m;
}

// ---- W2N ----

struct W2NFields {
    MatrixBiJet Tt;  // T - A^2 - kappa dA
    MatrixBiJet f1;  // -Abar + dmu/2 - mu A / kappa
};

inline W2NFields w2n_fields(const WFieldSample& s) {
    const Complex k = s.kappa;
    W2NFields f;
    f.Tt = s.T - s.A * s.A - k * s.A.d_z();
    f.f1 = (-s.Abar + 0.5 * s.mu.d_z()) - (s.mu * s.A) / k;
    return f;
}

inline Blocks<2> w2n_connection(const WFieldSample& s) {
    const auto f = w2n_fields(s);
    const auto j = s.order_z(), kk = s.order_zbar();
    const MatrixBiJet zero(j, kk, Matrix::Zero(s.n, s.n), s.T.z0(), s.T.zbar0());
    const MatrixBiJet one = identity_jet(s.n, j, kk, s.T.z0(), s.T.zbar0());
    return {{{zero, one}, {f.Tt, -2.0 * s.A}}};
}

inline Blocks<2> w2n_dual_connection(const WFieldSample& s) {
    const Complex k = s.kappa;
    const auto f = w2n_fields(s);
    const auto j = s.order_z(), kk = s.order_zbar();
    const MatrixBiJet zero(j, kk, Matrix::Zero(s.n, s.n), s.T.z0(), s.T.zbar0());
    const MatrixBiJet a12 = zero + (-1.0 / k) * s.mu;
    const MatrixBiJet a21 = (-1.0 / k) * (s.mu * f.Tt) + k * f.f1.d_z();
    const MatrixBiJet a22 = (-s.Abar + (s.mu * s.A) / k) - 0.5 * s.mu.d_z();
    return {{{f.f1, a12}, {a21, a22}}};
}

inline Blocks<2> w2n_curvature_blocks(const WFieldSample& s) {
    s.validate();
    return curvature<2>(w2n_connection(s), w2n_dual_connection(s), s.kappa);
}

// Ward identity in the form the curvature produces:
// (dbar + mu d + 2 dmu) Tt - kappa^2 d^2 f1 + [Tt, f1] - 2 kappa A d f1
inline MatrixBiJet w2n_ward_residual(const WFieldSample& s) {
    const Complex k = s.kappa;
    const auto f = w2n_fields(s);
    const MatrixBiJet df1 = f.f1.d_z();
    return f.Tt.d_zbar() + s.mu * f.Tt.d_z() + 2.0 * (s.mu.d_z() * f.Tt) - (k * k) * df1.d_z() +
           commutator(f.Tt, f.f1) - (2.0 * k) * (s.A * df1);
}

// Ward identity as commonly displayed, with kappa^2/2 d^3 mu in place of
// kappa^2 d^2 f1; differs from the curvature by -kappa d^2 (kappa Abar + mu A).
inline MatrixBiJet w2n_ward_residual_displayed(const WFieldSample& s) {
    const Complex k = s.kappa;
    const auto f = w2n_fields(s);
    const MatrixBiJet lhs = f.Tt.d_zbar() + s.mu * f.Tt.d_z() + 2.0 * (s.mu.d_z() * f.Tt) -
                            scalar_times_identity((0.5 * k * k) * s.mu.d_z(3), s.n);
    const MatrixBiJet g = s.Abar + (s.mu * s.A) / k;
    return lhs - commutator(f.Tt, g) - (2.0 * k) * (s.A * f.f1.d_z());
}

// dbar A - kappa d Abar + [Abar, A]
inline MatrixBiJet gauge_flatness_residual(const WFieldSample& s) {
    return s.A.d_zbar() - s.kappa * s.Abar.d_z() + commutator(s.Abar, s.A);
}

// same with the opposite commutator order [A, Abar]
inline MatrixBiJet gauge_flatness_residual_swapped(const WFieldSample& s) {
    return s.A.d_zbar() - s.kappa * s.Abar.d_z() + commutator(s.A, s.Abar);
}

// ---- W3N ----

struct W3NCoefficients {
    MatrixBiJet Tt;  // T - 3(A^2 + kappa dA)
    MatrixBiJet Wt;  // W + T A - A^3 - kappa(A dA + d A^2) - kappa^2 d^2 A
    std::array<MatrixBiJet, 7> f;
};

namespace detail {

// (d^2 - T/kappa^2) g
inline BiJet w3_l(const WFieldSample& s, const BiJet& g) {
    return g.d_z(2) - (s.T * g) / (s.kappa * s.kappa);
}

inline void w3_base(const WFieldSample& s, W3NCoefficients& c) {
    const Complex k = s.kappa;
    const MatrixBiJet& a = s.A;
    const MatrixBiJet a2 = a * a;
    const MatrixBiJet da = a.d_z();
    c.Tt = s.T - 3.0 * (a2 + k * da);
    c.Wt = (s.W + s.T * a) - a2 * a - k * (a * da + a2.d_z()) - (k * k) * da.d_z();
    const BiJet lr = w3_l(s, s.rho);
    c.f[0] = ((-2.0 / 3.0) * lr + s.mu.d_z()) - s.Abar + (2.0 / k) * (a * s.rho.d_z()) - (s.mu * a) / k -
             (2.0 / (k * k)) * (a2 * s.rho);
    c.f[1] = ((-1.0 / k) * (s.mu - s.rho.d_z())) - (3.0 / (k * k)) * (a * s.rho);
}

}  // namespace detail

// f1..f7 from their defining relations
inline W3NCoefficients w3n_coefficients(const WFieldSample& s) {
    s.validate();
    if (s.level != 3) throw InvalidInput("w3n_coefficients: needs a level-3 sample");
    const Complex k = s.kappa;
    W3NCoefficients c;
    detail::w3_base(s, c);
    auto& f = c.f;
    f[2] = k * f[0].d_z() - (c.Wt * s.rho) / (k * k);
    f[3] = k * f[1].d_z() + f[0] - (c.Tt * s.rho) / (k * k);
    f[4] = (-1.0 / k) * (s.mu * c.Wt) + k * f[2].d_z();
    f[5] = (-1.0 / k) * (s.mu * c.Tt) + k * f[3].d_z() + f[2];
    f[6] = (3.0 / k) * (s.mu * s.A) - s.mu.d_z() + f[3];
    return c;
}

// f3..f7 in the fully expanded form as displayed; f6 there disagrees with its
// own defining relation.
inline W3NCoefficients w3n_coefficients_expanded(const WFieldSample& s) {
    s.validate();
    if (s.level != 3) throw InvalidInput("w3n_coefficients_expanded: needs a level-3 sample");
    const Complex k = s.kappa;
    W3NCoefficients c;
    detail::w3_base(s, c);
    auto& f = c.f;
    const MatrixBiJet& a = s.A;
    const MatrixBiJet a2 = a * a;
    const BiJet lr = detail::w3_l(s, s.rho);
    const MatrixBiJet adr = a * s.rho.d_z();
    const MatrixBiJet q = s.mu * a + (2.0 / k) * (a2 * s.rho);
    const MatrixBiJet wr = c.Wt * s.rho;
    f[2] = ((-2.0 / 3.0) * k * lr.d_z() + k * s.mu.d_z(2)) - k * s.Abar.d_z() + 2.0 * adr.d_z() - wr / (k * k) - q.d_z();
    f[3] = ((1.0 / 3.0) * lr) - adr / k - s.Abar + a2 * s.rho / (k * k) - (s.mu * a) / k;
    f[4] = ((-2.0 / 3.0) * k * k * lr.d_z(2) + k * k * s.mu.d_z(3)) - (k * k) * s.Abar.d_z(2) +
           (2.0 * k) * adr.d_z(2) - wr.d_z() / k - (s.mu * c.Wt) / k - k * q.d_z(2);
    f[5] = ((-2.0 / 3.0) * k * lr.d_z() + k * s.mu.d_z(2)) - k * s.Abar.d_z() + adr.d_z() - wr / (k * k) -
           (s.mu * c.Tt) / k + (3.0 / k) * (a2.d_z() * s.rho) - 2.0 * q.d_z();
    f[6] = ((2.0 / k) * (s.mu * a) - s.mu.d_z() + (1.0 / 3.0) * lr) - adr / k - s.Abar + a2 * s.rho / (k * k);
    return c;
}

inline Blocks<3> w3n_connection(const WFieldSample& s, const W3NCoefficients& c) {
    const auto j = s.order_z(), kk = s.order_zbar();
    const MatrixBiJet zero(j, kk, Matrix::Zero(s.n, s.n), s.T.z0(), s.T.zbar0());
    const MatrixBiJet one = identity_jet(s.n, j, kk, s.T.z0(), s.T.zbar0());
    return {{{zero, one, zero}, {zero, zero, one}, {c.Wt, c.Tt, -3.0 * s.A}}};
}

inline Blocks<3> w3n_dual_connection(const WFieldSample& s, const W3NCoefficients& c) {
    const Complex k = s.kappa;
    const auto j = s.order_z(), kk = s.order_zbar();
    const MatrixBiJet zero(j, kk, Matrix::Zero(s.n, s.n), s.T.z0(), s.T.zbar0());
    const auto& f = c.f;
    return {{{f[0], f[1], zero + (-1.0 / (k * k)) * s.rho},
             {f[2], f[3], zero + (-1.0 / k) * s.mu},
             {f[4], f[5], f[6]}}};
}

inline Blocks<3> w3n_curvature_blocks(const WFieldSample& s) {
    const auto c = w3n_coefficients(s);
    return curvature<3>(w3n_connection(s, c), w3n_dual_connection(s, c), s.kappa);
}

// dbar Wt - kappa d f5 + Wt f1 + Tt f3 - 3 A f5 - f7 Wt
inline MatrixBiJet w3n_w_residual(const WFieldSample& s) {
    const auto c = w3n_coefficients(s);
    const auto& f = c.f;
    return c.Wt.d_zbar() - s.kappa * f[4].d_z() + c.Wt * f[0] + c.Tt * f[2] - 3.0 * (s.A * f[4]) - f[6] * c.Wt;
}

// dbar Tt - kappa d f6 + Wt f2 + Tt f4 - 3 A f6 - f7 Tt, as displayed; the
// curvature block carries an extra -f5.
inline MatrixBiJet w3n_t_residual_displayed(const WFieldSample& s) {
    const auto c = w3n_coefficients(s);
    const auto& f = c.f;
    return c.Tt.d_zbar() - s.kappa * f[5].d_z() + c.Wt * f[1] + c.Tt * f[3] - 3.0 * (s.A * f[5]) - f[6] * c.Tt;
}

inline MatrixBiJet w3n_t_residual(const WFieldSample& s) {
    return w3n_t_residual_displayed(s) - w3n_coefficients(s).f[4];
}

// ---- W3 (A = Abar = 0) ----

// Identities implied by the curvature at A = Abar = 0:
//   T: (dbar + mu d + 2 dmu) T - 2 k^2 d^3 mu + k^2 d^2 L rho + (3 W d rho + 2 rho d W)/k
//   W: (dbar + rho d^2 + (mu + 2 d rho) d + 3 dmu) W - k^3 L d (dmu - 2/3 L rho)
// with L g = d^2 g - T g / k^2.
inline std::pair<BiJet, BiJet> w3_structure_residual_jets(const WFieldSample& s) {
    const Complex k = s.kappa;
    const BiJet& t = s.T;
    const BiJet& w = s.W;
    const BiJet& mu = s.mu;
    const BiJet& rho = s.rho;
    const BiJet lr = detail::w3_l(s, rho);
    const BiJet rt = t.d_zbar() + mu * t.d_z() + 2.0 * (mu.d_z() * t) - (2.0 * k * k) * mu.d_z(3) +
                     (k * k) * lr.d_z(2) + (3.0 * (w * rho.d_z()) + 2.0 * (rho * w.d_z())) / k;
    const BiJet g = mu.d_z() - (2.0 / 3.0) * lr;
    const BiJet rw = w.d_zbar() + rho * w.d_z(2) + (mu + 2.0 * rho.d_z()) * w.d_z() + 3.0 * (mu.d_z() * w) -
                     (k * k * k) * detail::w3_l(s, g.d_z());
    return {rt, rw};
}

inline std::pair<Complex, Complex> w3_structure_residuals(const WFieldSample& s) {
    s.validate();
    if (s.level != 3 || s.gauged) throw InvalidInput("w3_structure_residuals: needs an ungauged level-3 sample");
    const auto [rt, rw] = w3_structure_residual_jets(s);
    return {rt.value(), rw.value()};
}

// The two scalar identities exactly as displayed. They are not consistent with
// the curvature construction and are kept for reporting only.
inline std::pair<Complex, Complex> w3_structure_residuals_displayed(const WFieldSample& s) {
    s.validate();
    if (s.level != 3 || s.gauged) throw InvalidInput("w3_structure_residuals: needs an ungauged level-3 sample");
    const Complex k = s.kappa;
    const BiJet& t = s.T;
    const BiJet& w = s.W;
    const BiJet& mu = s.mu;
    const BiJet& rho = s.rho;
    const BiJet lr = detail::w3_l(s, rho);
    const BiJet r1 = (k * k) * mu.d_z(3) - (t.d_zbar() + mu * t.d_z() + 2.0 * (mu.d_z() * t)) -
                     ((2.0 / 3.0) * k * k * lr.d_z(2) + (w * rho).d_z() / k - (w * (mu - rho.d_z())) / k);
    const BiJet r2 = w.d_zbar() + rho * w.d_z(2) + (mu + 2.0 * rho.d_z()) * w.d_z() + 3.0 * (mu.d_z() * w) -
                     (k * k * k) * detail::w3_l(s, mu.d_z() - (2.0 / 3.0) * lr).d_z();
    return {r1.value(), r2.value()};
}

// Level-3 sample whose ungauged curvature is a multiple of the level-2 one:
// T3 = 4 T2, W3 = 2 kappa d T2, rho = 0.
inline WFieldSample embed_w2_in_w3(const WFieldSample& s2) {
    WFieldSample s3 = s2;
    s3.level = 3;
    s3.T = 4.0 * s2.T;
    s3.W = (2.0 * s2.kappa) * s2.T.d_z();
    s3.rho = s2.T.like();
    s3.rho.set_lost(0, 0);
    return s3;
}

// ---- constraint values ----

// W_j = k <A^j> / (N j), j = 2..k
inline std::vector<BiJet> wk_constraint_values(const MatrixBiJet& a, Eigen::Index n, int k) {
    if (k < 2) throw InvalidInput("wk_constraint_values: k must be at least 2");
    if (n < 1) throw InvalidInput("wk_constraint_values: N must be positive");
    std::vector<BiJet> out;
    MatrixBiJet pw = a * a;
    for (int j = 2; j <= k; ++j) {
        out.push_back(trace(pw) * (static_cast<double>(k) / (static_cast<double>(n) * j)));
        if (j < k) pw = pw * a;
    }
    return out;
}

struct PoleCoefficients {
    Complex t_minus2;
    Complex w_minus3;  // level 3 only
};

// Leading pole coefficients of T (and W) at a marked point with orbit p0.
inline PoleCoefficients expected_pole_coefficients(int level, Complex kappa, const Matrix& p0) {
    detail::require_square(p0, "expected_pole_coefficients");
    const double n = static_cast<double>(p0.rows());
    const Matrix p2 = p0 * p0;
    const Complex c2 = p2.trace(), c3 = (p2 * p0).trace();
    if (level == 2) return {c2 / n, Complex{}};
    if (level == 3) return {3.0 * c2 / n, (c3 - 3.0 * kappa * c2) / n};
    throw InvalidInput("expected_pole_coefficients: level must be 2 or 3");
}

}  // namespace isomono

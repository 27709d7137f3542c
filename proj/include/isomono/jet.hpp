#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include "algebra.hpp"

namespace isomono {

namespace detail {

inline Complex zero_like(const Complex&) { return Complex{}; }
inline Matrix zero_like(const Matrix& m) { return Matrix::Zero(m.rows(), m.cols()); }
inline double abs_max(const Complex& c) { return std::abs(c); }
inline double abs_max(const Matrix& m) { return norm_max(m); }

template <class A, class B>
using product_t = std::conditional_t<std::is_same_v<A, Complex> && std::is_same_v<B, Complex>, Complex, Matrix>;

}  // namespace detail

// Truncated power series sum c[j][k] (z - z0)^j (zbar - zbar0)^k with z and
// zbar independent. Coeff is Complex for scalar fields and Matrix for
// matrix-valued ones. Derivatives consume orders; lost_z/lost_zbar record how
// many of the top orders no longer carry exact information.
template <class Coeff>
class Jet {
public:
    Jet() = default;

    Jet(int j, int k, const Coeff& zero, Complex z0 = {}, Complex zb0 = {})
        : j_(j), k_(k), z0_(z0), zb0_(zb0), c_(static_cast<std::size_t>((j + 1) * (k + 1)), zero) {
        if (j < 0 || k < 0) throw InvalidInput("jet: negative truncation order");
    }

    int order_z() const { return j_; }
    int order_zbar() const { return k_; }
    Complex z0() const { return z0_; }
    Complex zbar0() const { return zb0_; }
    int lost_z() const { return lz_; }
    int lost_zbar() const { return lk_; }

    // highest orders that are still exact
    int valid_z() const { return j_ - lz_; }
    int valid_zbar() const { return k_ - lk_; }

    Coeff& operator()(int j, int k) { return c_[idx(j, k)]; }
    const Coeff& operator()(int j, int k) const { return c_[idx(j, k)]; }

    const Coeff& zero() const { return c_.front(); }

    // value at the expansion point
    Coeff value() const {
        if (valid_z() < 0 || valid_zbar() < 0) throw InvalidInput("jet: truncation too shallow for this identity");
        return c_.front();
    }

    // max |coefficient| over the exact range
    double max_abs() const {
        if (valid_z() < 0 || valid_zbar() < 0) throw InvalidInput("jet: truncation too shallow for this identity");
        double m = 0.0;
        for (int j = 0; j <= valid_z(); ++j)
            for (int k = 0; k <= valid_zbar(); ++k) m = std::max(m, detail::abs_max((*this)(j, k)));
        return m;
    }

    Jet like() const {
        Jet r(j_, k_, detail::zero_like(c_.front()), z0_, zb0_);
        r.lz_ = lz_;
        r.lk_ = lk_;
        return r;
    }

    template <class F>
    Jet map(F f) const {
        Jet r = *this;
        for (auto& x : r.c_) x = f(x);
        return r;
    }

    Jet d_z() const {
        Jet r = like();
        for (int j = 0; j < j_; ++j)
            for (int k = 0; k <= k_; ++k) r(j, k) = static_cast<double>(j + 1) * (*this)(j + 1, k);
        r.lz_ = lz_ + 1;
        return r;
    }

    Jet d_zbar() const {
        Jet r = like();
        for (int j = 0; j <= j_; ++j)
            for (int k = 0; k < k_; ++k) r(j, k) = static_cast<double>(k + 1) * (*this)(j, k + 1);
        r.lk_ = lk_ + 1;
        return r;
    }

    Jet d_z(int times) const {
        Jet r = *this;
        for (int i = 0; i < times; ++i) r = r.d_z();
        return r;
    }

    Jet operator-() const {
        return map([](const Coeff& x) -> Coeff { return -x; });
    }

    Jet& operator+=(const Jet& o) {
        check(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        absorb(o);
        return *this;
    }

    Jet& operator-=(const Jet& o) {
        check(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        absorb(o);
        return *this;
    }

    Jet& operator*=(Complex s) {
        for (auto& x : c_) x *= s;
        return *this;
    }

    template <class Other>
    void check(const Jet<Other>& o) const {
        if (o.order_z() != j_ || o.order_zbar() != k_) throw InvalidInput("jet: mismatched truncation orders");
        if (o.z0() != z0_ || o.zbar0() != zb0_) throw InvalidInput("jet: mismatched expansion points");
    }

    template <class Other>
    void absorb(const Jet<Other>& o) {
        lz_ = std::max(lz_, o.lost_z());
        lk_ = std::max(lk_, o.lost_zbar());
    }

    void set_lost(int lz, int lk) {
        lz_ = lz;
        lk_ = lk;
    }

private:
    std::size_t idx(int j, int k) const {
        if (j < 0 || j > j_ || k < 0 || k > k_) throw InvalidInput("jet: coefficient index out of range");
        return static_cast<std::size_t>(j * (k_ + 1) + k);
    }

    int j_ = 0, k_ = 0;
    Complex z0_{}, zb0_{};
    int lz_ = 0, lk_ = 0;
    std::vector<Coeff> c_;
};

using BiJet = Jet<Complex>;
using MatrixBiJet = Jet<Matrix>;

template <class C>
Jet<C> operator+(Jet<C> a, const Jet<C>& b) {
    return a += b;
}

template <class C>
Jet<C> operator-(Jet<C> a, const Jet<C>& b) {
    return a -= b;
}

template <class C>
Jet<C> operator*(Jet<C> a, Complex s) {
    return a *= s;
}

template <class C>
Jet<C> operator*(Complex s, Jet<C> a) {
    return a *= s;
}

template <class C>
Jet<C> operator*(Jet<C> a, double s) {
    return a *= Complex(s);
}

template <class C>
Jet<C> operator*(double s, Jet<C> a) {
    return a *= Complex(s);
}

template <class C>
Jet<C> operator/(Jet<C> a, Complex s) {
    return a *= (1.0 / s);
}

template <class C>
Jet<C> operator/(Jet<C> a, double s) {
    return a *= Complex(1.0 / s);
}

// truncated Cauchy product
template <class A, class B>
Jet<detail::product_t<A, B>> operator*(const Jet<A>& a, const Jet<B>& b) {
    using R = detail::product_t<A, B>;
    a.check(b);
    const int jj = a.order_z(), kk = a.order_zbar();
    R zero;
    if constexpr (std::is_same_v<R, Complex>) {
        zero = Complex{};
    } else if constexpr (std::is_same_v<A, Matrix> && std::is_same_v<B, Matrix>) {
        zero = Matrix::Zero(a.zero().rows(), b.zero().cols());
    } else if constexpr (std::is_same_v<A, Matrix>) {
        zero = detail::zero_like(a.zero());
    } else {
        zero = detail::zero_like(b.zero());
    }
    Jet<R> r(jj, kk, zero, a.z0(), a.zbar0());
    for (int j1 = 0; j1 <= jj; ++j1)
        for (int k1 = 0; k1 <= kk; ++k1) {
            const auto& x = a(j1, k1);
            for (int j2 = 0; j1 + j2 <= jj; ++j2)
                for (int k2 = 0; k1 + k2 <= kk; ++k2) r(j1 + j2, k1 + k2) += x * b(j2, k2);
        }
    r.set_lost(std::max(a.lost_z(), b.lost_z()), std::max(a.lost_zbar(), b.lost_zbar()));
    return r;
}

// Matrix jet plus scalar jet times identity.
inline MatrixBiJet operator+(MatrixBiJet a, const BiJet& s) {
    a.check(s);
    const auto n = a.zero().rows();
    for (int j = 0; j <= a.order_z(); ++j)
        for (int k = 0; k <= a.order_zbar(); ++k) a(j, k) += s(j, k) * Matrix::Identity(n, n);
    a.absorb(s);
    return a;
}

inline MatrixBiJet operator+(const BiJet& s, MatrixBiJet a) { return std::move(a) + s; }
inline MatrixBiJet operator-(MatrixBiJet a, const BiJet& s) { return std::move(a) + (-s); }
inline MatrixBiJet operator-(const BiJet& s, const MatrixBiJet& a) { return (-a) + s; }

inline BiJet constant_jet(Complex v, int j, int k, Complex z0 = {}, Complex zb0 = {}) {
    BiJet r(j, k, Complex{}, z0, zb0);
    r(0, 0) = v;
    return r;
}

// the coordinate function z (or zbar) expanded at (z0, zb0)
inline BiJet coordinate_jet(bool zbar, int j, int k, Complex z0 = {}, Complex zb0 = {}) {
    BiJet r(j, k, Complex{}, z0, zb0);
    r(0, 0) = zbar ? zb0 : z0;
    if (zbar) {
        if (k >= 1) r(0, 1) = 1.0;
    } else if (j >= 1) {
        r(1, 0) = 1.0;
    }
    return r;
}

inline MatrixBiJet identity_jet(Eigen::Index n, int j, int k, Complex z0 = {}, Complex zb0 = {}) {
    MatrixBiJet r(j, k, Matrix::Zero(n, n), z0, zb0);
    r(0, 0) = Matrix::Identity(n, n);
    return r;
}

inline MatrixBiJet scalar_times_identity(const BiJet& s, Eigen::Index n) {
    MatrixBiJet r(s.order_z(), s.order_zbar(), Matrix::Zero(n, n), s.z0(), s.zbar0());
    return r + s;
}

inline BiJet entry(const MatrixBiJet& m, Eigen::Index r, Eigen::Index c) {
    BiJet out(m.order_z(), m.order_zbar(), Complex{}, m.z0(), m.zbar0());
    for (int j = 0; j <= m.order_z(); ++j)
        for (int k = 0; k <= m.order_zbar(); ++k) out(j, k) = m(j, k)(r, c);
    out.set_lost(m.lost_z(), m.lost_zbar());
    return out;
}

inline BiJet trace(const MatrixBiJet& m) {
    BiJet out(m.order_z(), m.order_zbar(), Complex{}, m.z0(), m.zbar0());
    for (int j = 0; j <= m.order_z(); ++j)
        for (int k = 0; k <= m.order_zbar(); ++k) out(j, k) = m(j, k).trace();
    out.set_lost(m.lost_z(), m.lost_zbar());
    return out;
}

inline MatrixBiJet commutator(const MatrixBiJet& a, const MatrixBiJet& b) { return a * b - b * a; }

// 1/a for a scalar jet with a(0,0) != 0
inline BiJet reciprocal(const BiJet& a) {
    const Complex a00 = a(0, 0);
    if (std::abs(a00) <= 1e-300) throw InvalidInput("jet: reciprocal of a jet vanishing at the point");
    BiJet b = a.like();
    for (int j = 0; j <= a.order_z(); ++j)
        for (int k = 0; k <= a.order_zbar(); ++k) {
            Complex acc = (j == 0 && k == 0) ? Complex(1.0) : Complex{};
            for (int p = 0; p <= j; ++p)
                for (int q = 0; q <= k; ++q)
                    if (p != 0 || q != 0) acc -= a(p, q) * b(j - p, k - q);
            b(j, k) = acc / a00;
        }
    return b;
}

inline BiJet operator/(const BiJet& a, const BiJet& b) { return a * reciprocal(b); }

// F(G(z, zbar)) for F holomorphic, expanded at G's value at the point.
inline BiJet compose(const BiJet& f, const BiJet& g) {
    if (std::abs(f.z0() - g(0, 0)) > 1e-14 * std::max(1.0, std::abs(f.z0())))
        throw InvalidInput("compose: outer jet is not expanded at the inner jet's value");
    BiJet h = g;
    h(0, 0) = 0.0;
    BiJet r = g.like();
    BiJet hp = constant_jet(1.0, g.order_z(), g.order_zbar(), g.z0(), g.zbar0());
    hp.set_lost(g.lost_z(), g.lost_zbar());
    for (int m = 0; m <= g.order_z() + g.order_zbar(); ++m) {
        if (m <= f.order_z()) r += hp * f(m, 0);
        hp = hp * h;
    }
    r.set_lost(std::max(f.lost_z(), g.lost_z()), std::max(r.lost_zbar(), g.lost_zbar()));
    return r;
}

inline BiJet random_jet(std::mt19937_64& rng, int j, int k, double scale = 1.0, Complex z0 = {}, Complex zb0 = {}) {
    BiJet r(j, k, Complex{}, z0, zb0);
    for (int a = 0; a <= j; ++a)
        for (int b = 0; b <= k; ++b) r(a, b) = Complex(uniform(rng, -scale, scale), uniform(rng, -scale, scale));
    return r;
}

inline MatrixBiJet random_matrix_jet(std::mt19937_64& rng, Eigen::Index n, int j, int k, double scale = 1.0,
                                     Complex z0 = {}, Complex zb0 = {}) {
    MatrixBiJet r(j, k, Matrix::Zero(n, n), z0, zb0);
    for (int a = 0; a <= j; ++a)
        for (int b = 0; b <= k; ++b) r(a, b) = random_matrix(rng, n, scale);
    return r;
}

// sum_m c_m (z - z0)^m as a jet
inline BiJet holomorphic_jet(const std::vector<Complex>& coeffs, int j, int k, Complex z0 = {}, Complex zb0 = {}) {
    BiJet r(j, k, Complex{}, z0, zb0);
    for (int m = 0; m < static_cast<int>(coeffs.size()) && m <= j; ++m) r(m, 0) = coeffs[static_cast<std::size_t>(m)];
    return r;
}

// F'''/F' - 3/2 (F''/F')^2, derivatives in z only
inline BiJet schwarzian(const BiJet& f) {
    if (f.order_z() < 1 || std::abs(f(1, 0)) <= 1e-12)
        throw InvalidInput("schwarzian: first derivative vanishes at the point");
    const BiJet d1 = f.d_z(), d2 = d1.d_z(), d3 = d2.d_z();
    const BiJet inv = reciprocal(d1);
    const BiJet r = d2 * inv;
    return d3 * inv - 1.5 * (r * r);
}

}  // namespace isomono

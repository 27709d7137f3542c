#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "algebra.hpp"

namespace isomono {

// L(z) = sum_a p_a / (z - x_a) on the Riemann sphere.
struct FuchsianConnection {
    Complex kappa{1.0, 0.0};
    std::vector<Complex> points;
    std::vector<OrbitPoint> residues;
    bool trivial_at_infinity = true;

    std::size_t size() const { return points.size(); }
    Eigen::Index dim() const { return residues.empty() ? 0 : residues.front().dim(); }

    double scale() const {
        double s = 1.0;
        for (auto x : points) s = std::max(s, std::abs(x));
        return s;
    }

    Matrix residue_sum() const {
        Matrix s = Matrix::Zero(dim(), dim());
        for (const auto& r : residues) s += r.p;
        return s;
    }

    MatrixList residue_matrices() const {
        MatrixList out;
        out.reserve(residues.size());
        for (const auto& r : residues) out.push_back(r.p);
        return out;
    }

    void validate() const {
        if (kappa == Complex{}) throw InvalidInput("connection: kappa must be nonzero");
        if (points.size() != residues.size())
            throw InvalidInput("connection: points and residues differ in count");
        if (points.empty()) throw InvalidInput("connection: no marked points");
        const auto n = dim();
        if (n < 2) throw InvalidInput("connection: dimension must be at least 2");
        for (std::size_t a = 0; a < residues.size(); ++a) {
            if (residues[a].dim() != n)
                throw InvalidInput("connection: residue " + std::to_string(a) + " has wrong dimension");
            residues[a].validate();
        }
        for (std::size_t a = 0; a < points.size(); ++a)
            for (std::size_t b = a + 1; b < points.size(); ++b)
                if (std::abs(points[a] - points[b]) <= 1e-12 * scale())
                    throw InvalidInput("connection: points " + std::to_string(a) + " and " +
                                       std::to_string(b) + " coincide");
        if (trivial_at_infinity) {
            double pn = 1.0;
            for (const auto& r : residues) pn = std::max(pn, r.p.norm());
            if (residue_sum().norm() >= 1e-12 * pn)
                throw InvalidInput("connection: residues do not sum to zero");
        }
    }
};

inline Matrix evaluate_L(const FuchsianConnection& conn, Complex z) {
    Matrix l = Matrix::Zero(conn.dim(), conn.dim());
    const double tiny = 1e-12 * conn.scale();
    for (std::size_t a = 0; a < conn.size(); ++a) {
        const Complex w = z - conn.points[a];
        if (std::abs(w) <= tiny)
            throw InvalidInput("evaluate_L: z coincides with marked point " + std::to_string(a));
        l += conn.residues[a].p / w;
    }
    return l;
}

// Coefficient c of c / (z - x_point)^order.
struct PrincipalTerm {
    std::size_t point;
    int order;
    Complex coeff;
};

// det(lambda + L(z)) = lambda^N + sum_k s_k(z) lambda^(N-k).
struct SpectralCurveData {
    std::vector<Complex> points;
    std::vector<std::vector<PrincipalTerm>> s;  // s[k-1] holds s_k
    std::vector<std::vector<Complex>> tail;     // polynomial part of s_k, ascending powers

    int dim() const { return static_cast<int>(s.size()); }

    Complex coefficient(int k, Complex z) const {
        if (k < 1 || k > dim()) throw InvalidInput("spectral curve: k out of range");
        Complex v{};
        for (const auto& t : s[k - 1]) v += t.coeff / std::pow(z - points[t.point], t.order);
        Complex zp{1.0, 0.0};
        for (auto c : tail[k - 1]) {
            v += c * zp;
            zp *= z;
        }
        return v;
    }

    Complex characteristic(Complex lambda, Complex z) const {
        const int n = dim();
        Complex v = std::pow(lambda, n);
        for (int k = 1; k <= n; ++k) v += coefficient(k, z) * std::pow(lambda, n - k);
        return v;
    }
};

namespace detail {

using Series = std::vector<Complex>;  // truncated power series in w

inline Series series_mul(const Series& a, const Series& b, std::size_t len) {
    Series r(len, Complex{});
    for (std::size_t i = 0; i < a.size() && i < len; ++i)
        for (std::size_t j = 0; j < b.size() && i + j < len; ++j) r[i + j] += a[i] * b[j];
    return r;
}

// Elementary symmetric functions e_1..e_N of the eigenvalues of a matrix power
// series M(w) = sum_j M_j w^j, each truncated to len terms.
inline std::vector<Series> elementary_series(const std::vector<Matrix>& m, std::size_t len) {
    const auto n = m.front().rows();
    // powers[j] = coefficients of M(w)^r, updated in place
    std::vector<Matrix> pw = m;
    std::vector<Series> psum(static_cast<std::size_t>(n) + 1, Series(len, Complex{}));
    for (Eigen::Index r = 1; r <= n; ++r) {
        if (r > 1) {
            std::vector<Matrix> next(len, Matrix::Zero(n, n));
            for (std::size_t i = 0; i < len; ++i)
                for (std::size_t j = 0; i + j < len; ++j) next[i + j] += pw[i] * m[j];
            pw = std::move(next);
        }
        for (std::size_t i = 0; i < len; ++i) psum[r][i] = pw[i].trace();
    }
    // Newton: k e_k = sum_{i=1..k} (-1)^(i-1) e_{k-i} p_i
    std::vector<Series> e(static_cast<std::size_t>(n) + 1, Series(len, Complex{}));
    e[0][0] = 1.0;
    for (Eigen::Index k = 1; k <= n; ++k) {
        Series acc(len, Complex{});
        for (Eigen::Index i = 1; i <= k; ++i) {
            const Series t = series_mul(e[k - i], psum[i], len);
            const double sgn = (i % 2 == 1) ? 1.0 : -1.0;
            for (std::size_t q = 0; q < len; ++q) acc[q] += sgn * t[q];
        }
        for (std::size_t q = 0; q < len; ++q) e[k][q] = acc[q] / static_cast<double>(k);
    }
    return e;
}

}  // namespace detail

inline SpectralCurveData spectral_curve(const FuchsianConnection& conn) {
    conn.validate();
    const auto n = conn.dim();
    const std::size_t len = static_cast<std::size_t>(n);  // w^0 .. w^(N-1)
    SpectralCurveData out;
    out.points = conn.points;
    out.s.assign(static_cast<std::size_t>(n), {});
    // s_k vanishes at infinity because L = O(1/z), so the polynomial tail is zero
    out.tail.assign(static_cast<std::size_t>(n), {});

    for (std::size_t a = 0; a < conn.size(); ++a) {
        // w L(x_a + w) = p_a + sum_{j>=1} C_{j-1} w^j
        std::vector<Matrix> m(len, Matrix::Zero(n, n));
        m[0] = conn.residues[a].p;
        for (std::size_t j = 1; j < len; ++j) {
            const int mm = static_cast<int>(j) - 1;
            for (std::size_t b = 0; b < conn.size(); ++b) {
                if (b == a) continue;
                const Complex d = conn.points[a] - conn.points[b];
                const double sgn = (mm % 2 == 0) ? 1.0 : -1.0;
                m[j] += conn.residues[b].p * (sgn / std::pow(d, mm + 1));
            }
        }
        const auto e = detail::elementary_series(m, len);
        for (Eigen::Index k = 1; k <= n; ++k)
            for (int order = 1; order <= k; ++order) {
                const Complex c = e[k][static_cast<std::size_t>(k - order)];
                if (c != Complex{}) out.s[k - 1].push_back({a, order, c});
            }
    }
    return out;
}

struct ModuliDimension {
    long value;
    bool no_moduli;  // value < 0
};

inline ModuliDimension moduli_dimension(long genus, long n, long j) {
    if (genus < 0 || n < 0) throw InvalidInput("moduli_dimension: genus and n must be non-negative");
    if (j < 2) throw InvalidInput("moduli_dimension: j must be at least 2");
    const long v = (2 * j - 1) * (genus - 1) + (j - 1) * n;
    return {v, v < 0};
}

}  // namespace isomono

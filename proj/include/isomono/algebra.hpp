#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace isomono {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using MatrixList = std::vector<Matrix>;

inline constexpr double kPi = 3.14159265358979323846;
inline const Complex kI{0.0, 1.0};

namespace detail {

inline void require_square(const Matrix& x, const char* what) {
    if (x.rows() != x.cols() || x.rows() == 0)
        throw InvalidInput(std::string(what) + ": matrix is not square");
}

inline void require_same_dim(const Matrix& x, const Matrix& y, const char* what) {
    require_square(x, what);
    require_square(y, what);
    if (x.rows() != y.rows())
        throw InvalidInput(std::string(what) + ": dimension mismatch (" +
                           std::to_string(x.rows()) + " vs " + std::to_string(y.rows()) + ")");
}

inline bool all_finite(const Matrix& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (!std::isfinite(x.data()[i].real()) || !std::isfinite(x.data()[i].imag())) return false;
    return true;
}

}  // namespace detail

inline double norm_max(const Matrix& x) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x.data()[i]));
    return m;
}

inline Matrix commutator(const Matrix& x, const Matrix& y) {
    detail::require_same_dim(x, y, "commutator");
    return x * y - y * x;
}

inline Complex trace_pairing(const Matrix& x, const Matrix& y) {
    detail::require_same_dim(x, y, "trace_pairing");
    // tr(XY) without forming the product
    return (x.transpose().array() * y.array()).sum();
}

inline bool is_trace_free(const Matrix& x, double rel = 1e-12) {
    return std::abs(x.trace()) <= rel * std::max(1.0, x.norm());
}

inline std::vector<Complex> eigenvalues(const Matrix& p) {
    detail::require_square(p, "eigenvalues");
    Eigen::ComplexEigenSolver<Matrix> es(p, false);
    if (es.info() != Eigen::Success) throw NumericalFailure("eigenvalue solver did not converge");
    std::vector<Complex> out(es.eigenvalues().data(), es.eigenvalues().data() + p.rows());
    return out;
}

// Minimal max-deviation between two multisets of equal size under the best
// matching. Exhaustive over permutations; N stays small (<= 8).
inline double spectrum_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    if (a.size() != b.size()) throw InvalidInput("spectrum_distance: size mismatch");
    const std::size_t n = a.size();
    if (n > 9) throw InvalidInput("spectrum_distance: N too large for exhaustive matching");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
        double worst = 0.0;
        for (std::size_t i = 0; i < n && worst < best; ++i)
            worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
        best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

struct OrbitPoint {
    Matrix p;
    std::vector<Complex> reference_spectrum;

    Eigen::Index dim() const { return p.rows(); }

    double spectrum_drift(const Matrix& q) const {
        return spectrum_distance(eigenvalues(q), reference_spectrum);
    }

    // Throws if p is off its declared orbit or not trace-free.
    void validate(double tol = 1e-9) const {
        detail::require_square(p, "OrbitPoint");
        if (!detail::all_finite(p)) throw InvalidInput("OrbitPoint: non-finite entry");
        if (static_cast<Eigen::Index>(reference_spectrum.size()) != p.rows())
            throw InvalidInput("OrbitPoint: reference spectrum has wrong length");
        if (!is_trace_free(p)) throw InvalidInput("OrbitPoint: residue is not trace-free");
        if (spectrum_drift(p) > tol * std::max(1.0, p.norm()))
            throw InvalidInput("OrbitPoint: eigenvalues do not match reference spectrum");
    }
};

// Orbit point whose reference spectrum is read off from p itself.
inline OrbitPoint orbit_from_matrix(const Matrix& p) {
    detail::require_square(p, "orbit_from_matrix");
    if (!is_trace_free(p)) throw InvalidInput("orbit_from_matrix: residue is not trace-free");
    return OrbitPoint{p, eigenvalues(p)};
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            m(i, j) = Complex(uniform(rng, -scale, scale), uniform(rng, -scale, scale));
    return m;
}

inline double condition_number(const Matrix& g) {
    Eigen::JacobiSVD<Matrix> svd(g);
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) == 0.0) return INFINITY;
    return s(0) / s(s.size() - 1);
}

enum class Conjugator { Random, Identity };

inline OrbitPoint orbit_sample(const std::vector<Complex>& spectrum, std::uint64_t seed,
                               Conjugator mode = Conjugator::Random) {
    const std::size_t n = spectrum.size();
    if (n < 2) throw InvalidInput("orbit_sample: need at least two eigenvalues");
    Complex sum = std::accumulate(spectrum.begin(), spectrum.end(), Complex{});
    double scale = 0.0;
    for (auto s : spectrum) scale = std::max(scale, std::abs(s));
    if (std::abs(sum) > 1e-12 * std::max(1.0, scale))
        throw InvalidInput("orbit_sample: spectrum does not sum to zero");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(spectrum[i] - spectrum[j]) <= 1e-12 * std::max(1.0, scale))
                throw InvalidInput("orbit_sample: repeated eigenvalue");

    Matrix d = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) d(i, i) = spectrum[i];
    if (mode == Conjugator::Identity) return OrbitPoint{d, spectrum};

    std::mt19937_64 rng(seed);
    const auto nn = static_cast<Eigen::Index>(n);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Matrix g = Matrix::Identity(nn, nn) + random_matrix(rng, nn, 0.5);
        if (condition_number(g) > 1e6) continue;
        Matrix p = g * d * g.inverse();
        // exact zero trace, rounding removed
        p -= (p.trace() / static_cast<double>(n)) * Matrix::Identity(nn, nn);
        return OrbitPoint{p, spectrum};
    }
    throw NumericalFailure("orbit_sample: no well-conditioned conjugator found");
}

inline std::vector<Complex> casimir_values(const Matrix& p, int kmax = -1) {
    detail::require_square(p, "casimir_values");
    if (kmax < 0) kmax = static_cast<int>(p.rows());
    if (kmax < 2) throw InvalidInput("casimir_values: kmax must be at least 2");
    std::vector<Complex> out;
    Matrix pk = p * p;
    for (int k = 2; k <= kmax; ++k) {
        out.push_back(pk.trace());
        if (k < kmax) pk = pk * p;
    }
    return out;
}

// sum_a <p_a, [gradF_a, gradG_a]>
inline Complex lie_poisson_bracket(const MatrixList& grad_f, const MatrixList& grad_g,
                                   const MatrixList& state) {
    if (grad_f.size() != state.size() || grad_g.size() != state.size())
        throw InvalidInput("lie_poisson_bracket: site count mismatch");
    Complex acc{};
    for (std::size_t a = 0; a < state.size(); ++a)
        acc += trace_pairing(state[a], commutator(grad_f[a], grad_g[a]));
    return acc;
}

}  // namespace isomono

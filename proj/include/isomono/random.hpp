#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "isoflow.hpp"

namespace isomono {

struct RandomStateSpec {
    std::size_t points = 3;
    Eigen::Index dim = 2;
    Complex kappa{1.0, 0.0};
    double max_norm = 1.0;      // Frobenius bound on every residue
    double min_norm = 0.3;
    double min_separation = 1.0;
    double box = 2.0;           // positions in [-box, box]^2
    double min_gap = 0.2;       // smallest eigenvalue spacing of each residue
};

struct FlowSpec {
    std::size_t direction = 0;
    Complex t_end{};
    double min_path_separation = 0.5;
};

namespace detail {

inline std::vector<Complex> random_spectrum(std::mt19937_64& rng, Eigen::Index n) {
    std::vector<Complex> s(static_cast<std::size_t>(n));
    Complex sum{};
    for (auto& v : s) {
        v = Complex(uniform(rng, -1, 1), uniform(rng, -1, 1));
        sum += v;
    }
    for (auto& v : s) v -= sum / static_cast<double>(n);
    return s;
}

inline double min_gap(const std::vector<Complex>& s) {
    double g = INFINITY;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = i + 1; j < s.size(); ++j) g = std::min(g, std::abs(s[i] - s[j]));
    return g;
}

}  // namespace detail

// Seeded random state with sum p_a = 0. When a flow is given, the state is
// also admissible for it: the moving point stays clear of the others and the
// star loops keep their homotopy class.
inline SchlesingerState random_schlesinger_state(const RandomStateSpec& spec, std::uint64_t seed,
                                                 std::optional<FlowSpec> flow = std::nullopt) {
    if (spec.points < 2) throw InvalidInput("random state: need at least two points");
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        std::vector<Complex> x;
        for (int tries = 0; x.size() < spec.points && tries < 10000; ++tries) {
            const Complex c(uniform(rng, -spec.box, spec.box), uniform(rng, -spec.box, spec.box));
            bool ok = true;
            for (auto y : x) ok = ok && std::abs(c - y) >= spec.min_separation;
            if (ok) x.push_back(c);
        }
        if (x.size() < spec.points) continue;

        std::vector<OrbitPoint> p;
        Matrix sum = Matrix::Zero(spec.dim, spec.dim);
        bool ok = true;
        for (std::size_t a = 0; a + 1 < spec.points && ok; ++a) {
            auto s = detail::random_spectrum(rng, spec.dim);
            if (detail::min_gap(s) < spec.min_gap) {
                ok = false;
                break;
            }
            OrbitPoint o = orbit_sample(s, rng());
            const double target = uniform(rng, spec.min_norm, spec.max_norm);
            const double f = target / o.p.norm();
            o.p *= f;
            for (auto& v : o.reference_spectrum) v *= f;
            if (detail::min_gap(o.reference_spectrum) < spec.min_gap) ok = false;
            sum += o.p;
            p.push_back(std::move(o));
        }
        if (!ok) continue;
        Matrix last = -sum;
        last -= (last.trace() / static_cast<double>(spec.dim)) * Matrix::Identity(spec.dim, spec.dim);
        if (last.norm() > spec.max_norm || last.norm() < spec.min_norm) continue;
        OrbitPoint lo = orbit_from_matrix(last);
        if (detail::min_gap(lo.reference_spectrum) < spec.min_gap) continue;
        p.push_back(std::move(lo));

        SchlesingerState st = make_state(spec.kappa, x, p);
        if (flow) {
            const std::size_t a = flow->direction;
            if (a >= x.size()) throw InvalidInput("random state: flow direction out of range");
            bool clear = true;
            for (std::size_t c = 0; c < x.size(); ++c)
                if (c != a && distance_to_segment(x[c], LineSegment{x[a], x[a] + flow->t_end}) < flow->min_path_separation)
                    clear = false;
            if (!clear) continue;
            const Complex base = audit_base_point(st, a, flow->t_end);
            if (!loop_topology_stable(x, a, x[a] + flow->t_end, base)) continue;
        }
        // the last residue must still sum to zero exactly enough for validation
        try {
            st.validate();
        } catch (const InvalidInput&) {
            continue;
        }
        return st;
    }
    throw NumericalFailure("random state: no admissible configuration found");
}

}  // namespace isomono

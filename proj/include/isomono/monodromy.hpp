#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "connection.hpp"
#include "ode.hpp"

namespace isomono {

struct LineSegment {
    Complex from, to;

    Complex at(double s) const { return from + s * (to - from); }
    Complex tangent(double) const { return to - from; }
};

// c + r exp(i (theta0 + s sweep)), s in [0,1]; sweep > 0 is counterclockwise.
struct ArcSegment {
    Complex center;
    double radius;
    double theta0;
    double sweep;

    Complex at(double s) const { return center + std::polar(radius, theta0 + s * sweep); }
    Complex tangent(double s) const { return kI * sweep * std::polar(radius, theta0 + s * sweep); }
};

using Segment = std::variant<LineSegment, ArcSegment>;

inline Complex segment_at(const Segment& g, double s) {
    return std::visit([s](const auto& x) { return x.at(s); }, g);
}

inline Complex segment_tangent(const Segment& g, double s) {
    return std::visit([s](const auto& x) { return x.tangent(s); }, g);
}

inline Segment reversed(const Segment& g) {
    if (auto l = std::get_if<LineSegment>(&g)) return LineSegment{l->to, l->from};
    const auto& a = std::get<ArcSegment>(g);
    return ArcSegment{a.center, a.radius, a.theta0 + a.sweep, -a.sweep};
}

inline double distance_to_segment(Complex p, const LineSegment& l) {
    const Complex d = l.to - l.from;
    const double len2 = std::norm(d);
    if (len2 == 0.0) return std::abs(p - l.from);
    const double s = std::clamp(((p - l.from) * std::conj(d)).real() / len2, 0.0, 1.0);
    return std::abs(p - l.at(s));
}

inline double distance_to_segment(Complex p, const ArcSegment& a) {
    const double twopi = 2 * kPi;
    if (std::abs(a.sweep) >= twopi) return std::abs(std::abs(p - a.center) - a.radius);
    const Complex q = p - a.center;
    if (q != Complex{}) {
        // angular offset of p from theta0 measured in the sweep direction
        double off = std::arg(q) - a.theta0;
        if (a.sweep < 0) off = -off;
        off = std::fmod(off, twopi);
        if (off < 0) off += twopi;
        if (off <= std::abs(a.sweep)) return std::abs(std::abs(q) - a.radius);
    } else {
        return a.radius;
    }
    return std::min(std::abs(p - a.at(0.0)), std::abs(p - a.at(1.0)));
}

inline double distance_to_segment(Complex p, const Segment& g) {
    return std::visit([p](const auto& x) { return distance_to_segment(p, x); }, g);
}

struct ContourPath {
    std::vector<Segment> segments;
    double clearance = 0.0;

    Complex start() const { return segment_at(segments.front(), 0.0); }
    Complex end() const { return segment_at(segments.back(), 1.0); }

    ContourPath reversed() const {
        ContourPath r{{}, clearance};
        for (auto it = segments.rbegin(); it != segments.rend(); ++it)
            r.segments.push_back(isomono::reversed(*it));
        return r;
    }

    // this followed by other
    ContourPath then(const ContourPath& other) const {
        ContourPath r = *this;
        r.segments.insert(r.segments.end(), other.segments.begin(), other.segments.end());
        r.clearance = std::min(clearance, other.clearance);
        return r;
    }

    double distance_to(Complex p) const {
        double d = INFINITY;
        for (const auto& g : segments) d = std::min(d, distance_to_segment(p, g));
        return d;
    }

    void validate(const std::vector<Complex>& poles) const {
        if (segments.empty()) throw InvalidInput("contour: empty path");
        if (!(clearance > 0)) throw InvalidInput("contour: clearance must be positive");
        for (std::size_t i = 1; i < segments.size(); ++i) {
            const Complex a = segment_at(segments[i - 1], 1.0), b = segment_at(segments[i], 0.0);
            if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
                throw InvalidInput("contour: segment " + std::to_string(i) + " is disconnected");
        }
        for (std::size_t a = 0; a < poles.size(); ++a)
            for (std::size_t i = 0; i < segments.size(); ++i)
                if (distance_to_segment(poles[a], segments[i]) < clearance * (1 - 1e-12))
                    throw InvalidInput("contour: segment " + std::to_string(i) +
                                       " violates clearance at point " + std::to_string(a));
    }
};

inline ContourPath circle_path(Complex center, double radius, Complex start_dir = 1.0,
                               double sweep = 2 * kPi, double clearance = 0.0) {
    ContourPath p;
    p.segments.push_back(ArcSegment{center, radius, std::arg(start_dir), sweep});
    p.clearance = clearance > 0 ? clearance : radius / 2;
    return p;
}

struct TransportResult {
    Matrix u;
    OdeStats stats;
};

// U with Psi(end) = U Psi(start) for kappa dPsi/dz = -L Psi.
inline TransportResult transport_with_stats(const FuchsianConnection& conn, const ContourPath& path,
                                            double tol) {
    if (!(tol >= 1e-13 && tol <= 1e-6)) throw InvalidInput("transport: tol outside [1e-13, 1e-6]");
    path.validate(conn.points);
    const auto n = conn.dim();
    const Complex inv_kappa = 1.0 / conn.kappa;
    State y = Eigen::Map<const State>(Matrix::Identity(n, n).eval().data(), n * n);
    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol;
    OdeStats total;
    for (std::size_t i = 0; i < path.segments.size(); ++i) {
        const Segment& g = path.segments[i];
        Dop853 ode(
            [&](double s, const State& v, State& dv) {
                const Complex z = segment_at(g, s);
                Matrix l = Matrix::Zero(n, n);
                for (std::size_t a = 0; a < conn.size(); ++a)
                    l += conn.residues[a].p / (z - conn.points[a]);
                const Complex c = -inv_kappa * segment_tangent(g, s);
                Eigen::Map<const Matrix> psi(v.data(), n, n);
                dv.resize(n * n);
                Eigen::Map<Matrix> out(dv.data(), n, n);
                out.noalias() = c * (l * psi);
            },
            opt);
        try {
            total += ode.integrate(y, 0.0, 1.0);
        } catch (const NumericalFailure& e) {
            throw NumericalFailure(e.what(), "segment " + std::to_string(i));
        }
    }
    return {Eigen::Map<const Matrix>(y.data(), n, n), total};
}

inline Matrix transport(const FuchsianConnection& conn, const ContourPath& path, double tol) {
    return transport_with_stats(conn, path, tol).u;
}

inline Complex default_base_point(const std::vector<Complex>& points) {
    double m = 0.0, mi = 0.0;
    for (auto x : points) {
        m = std::max(m, std::abs(x));
        mi = std::max(mi, std::abs(x.imag()));
    }
    return Complex(1.0 + m, 1.0 + mi);
}

namespace detail {

inline double min_separation(const std::vector<Complex>& pts) {
    double d = INFINITY;
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) d = std::min(d, std::abs(pts[a] - pts[b]));
    return d;
}

inline double loop_clearance(const std::vector<Complex>& pts, Complex base) {
    double db = INFINITY;
    for (auto x : pts) db = std::min(db, std::abs(base - x));
    return 0.25 * std::min(min_separation(pts), db);
}

// Straight segment with minor-arc detours around poles it passes too close to.
inline std::vector<Segment> detoured_line(Complex from, Complex to, const std::vector<Complex>& pts,
                                          std::size_t skip, double radius) {
    struct Hit {
        double s_in, s_out;
        std::size_t c;
    };
    const Complex d = to - from;
    const double len = std::abs(d);
    std::vector<Hit> hits;
    for (std::size_t c = 0; c < pts.size(); ++c) {
        if (c == skip) continue;
        if (distance_to_segment(pts[c], LineSegment{from, to}) >= radius) continue;
        const double s0 = ((pts[c] - from) * std::conj(d)).real() / (len * len);
        const double h = std::abs(((pts[c] - from) * std::conj(d)).imag()) / len;
        const double half = std::sqrt(std::max(0.0, radius * radius - h * h)) / len;
        const double s_in = s0 - half, s_out = s0 + half;
        if (s_in <= 0.0 || s_out >= 1.0)
            throw InvalidInput("contour: endpoint too close to marked point " + std::to_string(c));
        hits.push_back({s_in, s_out, c});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.s_in < b.s_in; });
    std::vector<Segment> out;
    double s = 0.0;
    for (const auto& h : hits) {
        if (h.s_in < s) throw InvalidInput("contour: overlapping detours");
        const Complex p_in = from + h.s_in * d, p_out = from + h.s_out * d;
        if (h.s_in > s) out.push_back(LineSegment{from + s * d, p_in});
        const Complex c = pts[h.c];
        const double t_in = std::arg(p_in - c);
        double sweep = std::arg((p_out - c) / (p_in - c));
        // chord through the centre: fixed clockwise choice
        if (std::abs(std::abs(sweep) - kPi) < 1e-12) sweep = -kPi;
        out.push_back(ArcSegment{c, radius, t_in, sweep});
        s = h.s_out;
    }
    out.push_back(LineSegment{from + s * d, to});
    return out;
}

}  // namespace detail

struct LoopSystem {
    Complex base;
    double clearance;
    std::vector<ContourPath> loops;        // indexed by marked point
    std::vector<std::size_t> loop_order;   // counterclockwise as seen from the base point
};

// One positively oriented loop per marked point: out from the base point to a
// small circle around x_a, once around, and back.
inline LoopSystem standard_loops(const std::vector<Complex>& pts, Complex base) {
    if (pts.empty()) throw InvalidInput("loops: no marked points");
    const double delta = detail::loop_clearance(pts, base);
    if (!(delta > 0)) throw InvalidInput("loops: base point coincides with a marked point");
    LoopSystem sys{base, delta, {}, {}};
    for (std::size_t a = 0; a < pts.size(); ++a) {
        double r = INFINITY;
        for (std::size_t b = 0; b < pts.size(); ++b)
            if (b != a) r = std::min(r, std::abs(pts[a] - pts[b]));
        r = std::min(0.5 * r, 0.5 * std::abs(base - pts[a]));
        const Complex u = (base - pts[a]) / std::abs(base - pts[a]);
        const Complex entry = pts[a] + r * u;
        ContourPath p{detail::detoured_line(base, entry, pts, a, 2 * delta), delta};
        p.segments.push_back(ArcSegment{pts[a], r, std::arg(u), 2 * kPi});
        ContourPath back{detail::detoured_line(base, entry, pts, a, 2 * delta), delta};
        p = p.then(back.reversed());
        p.validate(pts);
        sys.loops.push_back(std::move(p));
    }
    // angles measured from the direction towards the centroid
    Complex centroid{};
    for (auto x : pts) centroid += x;
    centroid /= static_cast<double>(pts.size());
    const Complex ref = centroid - base;
    std::vector<double> ang(pts.size());
    for (std::size_t a = 0; a < pts.size(); ++a) ang[a] = std::arg((pts[a] - base) / ref);
    sys.loop_order.resize(pts.size());
    std::iota(sys.loop_order.begin(), sys.loop_order.end(), 0);
    std::stable_sort(sys.loop_order.begin(), sys.loop_order.end(),
                     [&](std::size_t a, std::size_t b) { return ang[a] < ang[b]; });
    return sys;
}

// Counterclockwise circle enclosing every marked point, attached to the base point.
inline ContourPath big_loop(const std::vector<Complex>& pts, Complex base) {
    Complex c{};
    for (auto x : pts) c += x;
    c /= static_cast<double>(pts.size());
    double rmax = 0.0;
    for (auto x : pts) rmax = std::max(rmax, std::abs(x - c));
    const double delta = detail::loop_clearance(pts, base);
    const double rb = std::abs(base - c);
    const double big = rmax + 1.0;
    if (rb >= big) {
        ContourPath p = circle_path(c, rb, base - c, 2 * kPi, delta);
        return p;
    }
    const Complex u = rb > 0 ? (base - c) / rb : Complex{1.0, 0.0};
    const Complex out = c + big * u;
    ContourPath p{detail::detoured_line(base, out, pts, pts.size(), 2 * delta), delta};
    p.segments.push_back(ArcSegment{c, big, std::arg(u), 2 * kPi});
    ContourPath back{detail::detoured_line(base, out, pts, pts.size(), 2 * delta), delta};
    p = p.then(back.reversed());
    p.validate(pts);
    return p;
}

struct MonodromyRep {
    Complex base;
    std::vector<ContourPath> loops;
    std::vector<std::size_t> loop_order;
    MatrixList y;  // indexed by marked point
    double tol = 0.0;
    double det_defect = 0.0;  // max |det Y_a - 1|
    std::string convention = "star-ccw";

    // Y_{order[n-1]} ... Y_{order[0]}
    Matrix ordered_product() const {
        const auto n = y.front().rows();
        Matrix p = Matrix::Identity(n, n);
        for (std::size_t i : loop_order) p = y[i] * p;
        return p;
    }

    double product_defect() const {
        const auto n = y.front().rows();
        return norm_max(ordered_product() - Matrix::Identity(n, n));
    }
};

inline MonodromyRep monodromy_rep(const FuchsianConnection& conn, Complex base, double tol,
                                  bool concurrent = true) {
    conn.validate();
    LoopSystem sys = standard_loops(conn.points, base);
    MonodromyRep rep{base, sys.loops, sys.loop_order, {}, tol, 0.0};
    rep.y.resize(conn.size());
    if (concurrent && conn.size() > 1) {
        std::vector<std::future<Matrix>> jobs;
        for (std::size_t a = 0; a < conn.size(); ++a)
            jobs.push_back(std::async(std::launch::async,
                                      [&, a] { return transport(conn, sys.loops[a], tol); }));
        for (std::size_t a = 0; a < conn.size(); ++a) rep.y[a] = jobs[a].get();
    } else {
        for (std::size_t a = 0; a < conn.size(); ++a) rep.y[a] = transport(conn, sys.loops[a], tol);
    }
    for (const auto& m : rep.y) {
        const Complex d = m.determinant();
        if (std::abs(d) < 1e-300) throw NumericalFailure("monodromy matrix is singular");
        rep.det_defect = std::max(rep.det_defect, std::abs(d - 1.0));
    }
    return rep;
}

inline MonodromyRep monodromy_rep(const FuchsianConnection& conn, double tol) {
    return monodromy_rep(conn, default_base_point(conn.points), tol);
}

struct WordTrace {
    std::string word;
    Complex trace;
};

inline std::vector<WordTrace> word_invariants(const MonodromyRep& rep, int max_len) {
    if (max_len < 1 || max_len > 3) throw InvalidInput("word_invariants: max_len must be 1, 2 or 3");
    const std::size_t n = rep.y.size();
    auto name = [](std::initializer_list<std::size_t> idx) {
        std::string s;
        for (auto i : idx) s += "Y" + std::to_string(i + 1);
        return s;
    };
    std::vector<WordTrace> out;
    for (std::size_t a = 0; a < n; ++a) out.push_back({name({a}), rep.y[a].trace()});
    if (max_len >= 2)
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b)
                out.push_back({name({a, b}), (rep.y[a] * rep.y[b]).trace()});
    if (max_len >= 3)
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b)
                for (std::size_t c = b + 1; c < n; ++c)
                    out.push_back({name({a, b, c}), (rep.y[a] * rep.y[b] * rep.y[c]).trace()});
    return out;
}

inline double rep_distance(const MonodromyRep& r1, const MonodromyRep& r2) {
    if (r1.y.size() != r2.y.size()) throw InvalidInput("rep_distance: point count mismatch");
    if (r1.convention != r2.convention) throw InvalidInput("rep_distance: loop convention mismatch");
    const auto w1 = word_invariants(r1, 2), w2 = word_invariants(r2, 2);
    double d = 0.0;
    for (std::size_t i = 0; i < w1.size(); ++i) d = std::max(d, std::abs(w1[i].trace - w2[i].trace));
    return d;
}

inline MonodromyRep conjugated(const MonodromyRep& r, const Matrix& g) {
    MonodromyRep out = r;
    const Matrix gi = g.inverse();
    for (auto& m : out.y) m = g * m * gi;
    return out;
}

namespace detail {

inline double cross(Complex a, Complex b) { return (std::conj(a) * b).imag(); }

inline bool in_triangle(Complex p, Complex a, Complex b, Complex c) {
    const double d1 = cross(b - a, p - a), d2 = cross(c - b, p - b), d3 = cross(a - c, p - c);
    const bool neg = d1 < 0 || d2 < 0 || d3 < 0, pos = d1 > 0 || d2 > 0 || d3 > 0;
    return !(neg && pos);
}

inline bool segments_cross(Complex p1, Complex p2, Complex q1, Complex q2) {
    const double d1 = cross(q2 - q1, p1 - q1), d2 = cross(q2 - q1, p2 - q1);
    const double d3 = cross(p2 - p1, q1 - p1), d4 = cross(p2 - p1, q2 - p1);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace detail

// True when moving point `moving` straight from `before` to `after` keeps every
// star loop from `base` in its homotopy class.
inline bool loop_topology_stable(const std::vector<Complex>& pts, std::size_t moving, Complex after,
                                 Complex base) {
    const Complex before = pts[moving];
    for (std::size_t c = 0; c < pts.size(); ++c) {
        if (c == moving) continue;
        if (detail::in_triangle(pts[c], base, before, after)) return false;
        if (detail::segments_cross(before, after, base, pts[c])) return false;
    }
    return true;
}

}  // namespace isomono

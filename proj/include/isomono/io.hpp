#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "isoflow.hpp"
#include "wstructures.hpp"

namespace isomono {

using json = nlohmann::json;

// Schema violation at a JSON path such as "connection.residues[1]".
class ConfigError : public InvalidInput {
public:
    ConfigError(const std::string& path, const std::string& what)
        : InvalidInput(path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

namespace io {

inline std::string child(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline std::string item(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline const json& require(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(child(path, key), "missing required field");
    return *it;
}

inline double to_real(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    return j.get<double>();
}

inline long to_int(const json& j, const std::string& path) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) throw ConfigError(path, "expected an integer");
    return j.get<long>();
}

inline bool to_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) throw ConfigError(path, "expected a boolean");
    return j.get<bool>();
}

inline json from_complex(Complex c) { return json::array({c.real(), c.imag()}); }

inline Complex to_complex(const json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError(path, "expected a complex number [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json from_matrix(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(from_complex(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix to_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(j.size());
    Matrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        const std::string rp = item(path, static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
            throw ConfigError(rp, "row length does not match the matrix dimension");
        for (Eigen::Index c = 0; c < n; ++c)
            m(r, c) = to_complex(row[static_cast<std::size_t>(c)], item(rp, static_cast<std::size_t>(c)));
    }
    return m;
}

inline json from_connection(const FuchsianConnection& c) {
    json j;
    j["kappa"] = from_complex(c.kappa);
    j["points"] = json::array();
    for (auto x : c.points) j["points"].push_back(from_complex(x));
    j["residues"] = json::array();
    for (const auto& r : c.residues) j["residues"].push_back(from_matrix(r.p));
    j["trivial_at_infinity"] = c.trivial_at_infinity;
    return j;
}

inline FuchsianConnection to_connection(const json& j, const std::string& path) {
    FuchsianConnection c;
    c.kappa = to_complex(require(j, "kappa", path), child(path, "kappa"));
    const auto& pts = require(j, "points", path);
    if (!pts.is_array()) throw ConfigError(child(path, "points"), "expected an array");
    for (std::size_t i = 0; i < pts.size(); ++i) c.points.push_back(to_complex(pts[i], item(child(path, "points"), i)));
    const auto& res = require(j, "residues", path);
    if (!res.is_array()) throw ConfigError(child(path, "residues"), "expected an array");
    for (std::size_t i = 0; i < res.size(); ++i) {
        const std::string rp = item(child(path, "residues"), i);
        const Matrix m = to_matrix(res[i], rp);
        try {
            c.residues.push_back(orbit_from_matrix(m));
        } catch (const InvalidInput& e) {
            throw ConfigError(rp, e.what());
        }
    }
    if (j.contains("trivial_at_infinity"))
        c.trivial_at_infinity = to_bool(j["trivial_at_infinity"], child(path, "trivial_at_infinity"));
    try {
        c.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(path.empty() ? "<root>" : path, e.what());
    }
    return c;
}

inline json from_jet(const BiJet& a) {
    json rows = json::array();
    for (int j = 0; j <= a.order_z(); ++j) {
        json row = json::array();
        for (int k = 0; k <= a.order_zbar(); ++k) row.push_back(from_complex(a(j, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline BiJet to_jet(const json& j, int jo, int ko, Complex z0, Complex zb0, const std::string& path) {
    if (!j.is_array() || static_cast<int>(j.size()) != jo + 1)
        throw ConfigError(path, "expected " + std::to_string(jo + 1) + " rows of coefficients");
    BiJet r(jo, ko, Complex{}, z0, zb0);
    for (int a = 0; a <= jo; ++a) {
        const auto& row = j[static_cast<std::size_t>(a)];
        const std::string rp = item(path, static_cast<std::size_t>(a));
        if (!row.is_array() || static_cast<int>(row.size()) != ko + 1)
            throw ConfigError(rp, "expected " + std::to_string(ko + 1) + " coefficients");
        for (int b = 0; b <= ko; ++b) r(a, b) = to_complex(row[static_cast<std::size_t>(b)], item(rp, static_cast<std::size_t>(b)));
    }
    return r;
}

// Matrix jets are stored entrywise: an N x N array of scalar coefficient arrays.
inline MatrixBiJet to_matrix_jet(const json& j, Eigen::Index n, int jo, int ko, Complex z0, Complex zb0,
                                 const std::string& path) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
        throw ConfigError(path, "expected " + std::to_string(n) + " rows of entry jets");
    MatrixBiJet m(jo, ko, Matrix::Zero(n, n), z0, zb0);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        const std::string rp = item(path, static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
            throw ConfigError(rp, "expected " + std::to_string(n) + " entry jets");
        for (Eigen::Index c = 0; c < n; ++c) {
            const BiJet e = to_jet(row[static_cast<std::size_t>(c)], jo, ko, z0, zb0, item(rp, static_cast<std::size_t>(c)));
            for (int a = 0; a <= jo; ++a)
                for (int b = 0; b <= ko; ++b) m(a, b)(r, c) = e(a, b);
        }
    }
    return m;
}

inline json from_matrix_jet(const MatrixBiJet& m) {
    const auto n = m.zero().rows();
    json rows = json::array();
    for (Eigen::Index r = 0; r < n; ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < n; ++c) row.push_back(from_jet(entry(m, r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

// {"kappa", "level", "n", "z0", "zbar0", "orders":[J,K], "fields":{"T","mu","W","rho","A","Abar"}}
inline WFieldSample to_sample(const json& j, const std::string& path) {
    const Complex kappa = to_complex(require(j, "kappa", path), child(path, "kappa"));
    const int level = static_cast<int>(to_int(require(j, "level", path), child(path, "level")));
    const auto n = static_cast<Eigen::Index>(j.contains("n") ? to_int(j["n"], child(path, "n")) : 2);
    const Complex z0 = j.contains("z0") ? to_complex(j["z0"], child(path, "z0")) : Complex{};
    const Complex zb0 = j.contains("zbar0") ? to_complex(j["zbar0"], child(path, "zbar0")) : std::conj(z0);
    const auto& ord = require(j, "orders", path);
    if (!ord.is_array() || ord.size() != 2) throw ConfigError(child(path, "orders"), "expected [J, K]");
    const int jo = static_cast<int>(to_int(ord[0], child(path, "orders") + "[0]"));
    const int ko = static_cast<int>(to_int(ord[1], child(path, "orders") + "[1]"));
    if (jo < 0 || ko < 0) throw ConfigError(child(path, "orders"), "orders must be non-negative");
    const std::string fp = child(path, "fields");
    const auto& f = require(j, "fields", path);
    auto T = to_jet(require(f, "T", fp), jo, ko, z0, zb0, child(fp, "T"));
    auto mu = to_jet(require(f, "mu", fp), jo, ko, z0, zb0, child(fp, "mu"));
    WFieldSample s = make_sample(kappa, level, n, std::move(T), std::move(mu));
    if (level == 3) {
        s.W = to_jet(require(f, "W", fp), jo, ko, z0, zb0, child(fp, "W"));
        s.rho = to_jet(require(f, "rho", fp), jo, ko, z0, zb0, child(fp, "rho"));
    }
    if (f.contains("A") || f.contains("Abar")) {
        s.gauged = true;
        s.A = to_matrix_jet(require(f, "A", fp), n, jo, ko, z0, zb0, child(fp, "A"));
        s.Abar = to_matrix_jet(require(f, "Abar", fp), n, jo, ko, z0, zb0, child(fp, "Abar"));
    }
    try {
        s.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(path.empty() ? "<root>" : path, e.what());
    }
    return s;
}

inline json from_sample(const WFieldSample& s) {
    json j;
    j["kappa"] = from_complex(s.kappa);
    j["level"] = s.level;
    j["n"] = s.n;
    j["z0"] = from_complex(s.T.z0());
    j["zbar0"] = from_complex(s.T.zbar0());
    j["orders"] = json::array({s.order_z(), s.order_zbar()});
    j["fields"]["T"] = from_jet(s.T);
    j["fields"]["mu"] = from_jet(s.mu);
    if (s.level == 3) {
        j["fields"]["W"] = from_jet(s.W);
        j["fields"]["rho"] = from_jet(s.rho);
    }
    if (s.gauged) {
        j["fields"]["A"] = from_matrix_jet(s.A);
        j["fields"]["Abar"] = from_matrix_jet(s.Abar);
    }
    return j;
}

inline json from_rep(const MonodromyRep& r, int max_len = 2) {
    json j;
    j["base"] = from_complex(r.base);
    j["invariants"] = json::array();
    for (const auto& w : word_invariants(r, max_len))
        j["invariants"].push_back({{"word", w.word}, {"trace", from_complex(w.trace)}});
    j["product_defect"] = r.product_defect();
    j["loop_order"] = json::array();
    for (auto i : r.loop_order) j["loop_order"].push_back(i + 1);
    return j;
}

inline json from_stats(const OdeStats& s) {
    return {{"steps", s.steps}, {"rejected", s.rejected}, {"evaluations", s.evaluations}, {"max_error", s.max_error}};
}

}  // namespace io

}  // namespace isomono

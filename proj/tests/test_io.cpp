#include <functional>

#include <gtest/gtest.h>

#include <isomono/io.hpp>
#include <isomono/random.hpp>

using namespace isomono;

namespace {

std::string error_path(const std::function<void()>& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<no error>";
}

}  // namespace

TEST(Io, ComplexAndMatrixRoundTrip) {
    const Complex c(0.1, -2.5);
    EXPECT_EQ(io::to_complex(io::from_complex(c), "x"), c);
    EXPECT_EQ(io::to_complex(json(3.0), "x"), Complex(3.0));
    std::mt19937_64 rng(1);
    const Matrix m = random_matrix(rng, 3);
    EXPECT_EQ(norm_max(io::to_matrix(io::from_matrix(m), "m") - m), 0.0);
}

TEST(Io, ConnectionRoundTrip) {
    RandomStateSpec spec;
    spec.points = 4;
    const auto c = random_schlesinger_state(spec, 3).connection();
    const auto back = io::to_connection(json::parse(io::from_connection(c).dump()), "connection");
    ASSERT_EQ(back.size(), c.size());
    EXPECT_EQ(back.kappa, c.kappa);
    for (std::size_t a = 0; a < c.size(); ++a) {
        EXPECT_EQ(back.points[a], c.points[a]);
        EXPECT_EQ(norm_max(back.residues[a].p - c.residues[a].p), 0.0);
    }
}

TEST(Io, ErrorsNameTheFieldPath) {
    json j = json::parse(R"({"points": [[0,0],[1,0]], "residues": [[[0.3,0],[0,-0.3]], [[-0.3,0],[0,0.3]]]})");
    EXPECT_EQ(error_path([&] { io::to_connection(j, "connection"); }), "connection.kappa");
    j["kappa"] = "one";
    EXPECT_EQ(error_path([&] { io::to_connection(j, "connection"); }), "connection.kappa");
    j["kappa"] = 1.0;
    EXPECT_NO_THROW(io::to_connection(j, "connection"));
    j["residues"][1] = json::parse("[[1, 2, 3], [4, 5, 6]]");
    EXPECT_EQ(error_path([&] { io::to_connection(j, "connection"); }), "connection.residues[1][0]");
    j["residues"][1] = json::parse("[[0.2, 0], [0, -0.2]]");
    EXPECT_EQ(error_path([&] { io::to_connection(j, "connection"); }), "connection");
}

TEST(Io, SampleRoundTrip) {
    std::mt19937_64 rng(4);
    for (int level : {2, 3})
        for (bool gauged : {false, true}) {
            const auto s = random_sample(rng, level, 2, gauged, Complex(0.7, 0.2));
            const auto back = io::to_sample(json::parse(io::from_sample(s).dump()), "sample");
            EXPECT_EQ(back.level, level);
            EXPECT_EQ(back.gauged, gauged);
            EXPECT_EQ((back.T - s.T).max_abs(), 0.0);
            EXPECT_EQ((back.mu - s.mu).max_abs(), 0.0);
            if (level == 3) EXPECT_EQ((back.rho - s.rho).max_abs(), 0.0);
            if (gauged) EXPECT_EQ((back.Abar - s.Abar).max_abs(), 0.0);
        }
}

TEST(Io, SampleErrors) {
    std::mt19937_64 rng(5);
    json j = io::from_sample(random_sample(rng, 3, 2, false, 1.0));
    j["orders"] = json::array({4, 1});
    EXPECT_EQ(error_path([&] { io::to_sample(j, "sample"); }), "sample.fields.T");
    j = io::from_sample(random_sample(rng, 3, 2, false, 1.0));
    j["fields"].erase("rho");
    EXPECT_EQ(error_path([&] { io::to_sample(j, "sample"); }), "sample.fields.rho");
}

TEST(Io, RepresentationReport) {
    RandomStateSpec spec;
    const auto rep = monodromy_rep(random_schlesinger_state(spec, 6).connection(), 1e-10);
    const json j = io::from_rep(rep);
    EXPECT_EQ(j["invariants"].size(), 6u);
    EXPECT_EQ(j["invariants"][3]["word"], "Y1Y2");
    EXPECT_TRUE(j["product_defect"].is_number());
    EXPECT_EQ(j["base"].size(), 2u);
    EXPECT_EQ(j["loop_order"].size(), 3u);
}

#include <doctest.h>

#include "qgraph/approx.hpp"
#include "qgraph/chain.hpp"

using namespace qgraph;
using namespace qgraph::approx;

namespace {

// one loop closed through a two-end vertex in ST form
UnitCell loop_with(const STForm& st)
{
    UnitCell c;
    c.periods = {1.0};
    c.edges = {{1.0, 0.0, "loop"}};
    c.vertices.push_back({st_to_ab(st), {{0, Side::end, {-1}}, {0, Side::start, {0}}}});
    return c;
}

STForm two_end(Complex s, Complex t)
{
    STForm st;
    st.n = 2;
    st.m = 1;
    st.S = MatrixXc::Constant(1, 1, s);
    st.T = MatrixXc::Constant(1, 1, t);
    return st;
}

}  // namespace

TEST_SUITE("approx")
{
    TEST_CASE("signed modulus")
    {
        CHECK(signed_modulus({3, 4}) == 5);
        CHECK(signed_modulus({-3, 4}) == -5);
        CHECK(signed_modulus({0, -2}) == 2);
    }

    TEST_CASE("star graph for the chain vertex")
    {
        const double a = 1.0 / 3, c = 8, d0 = 1e-3;
        ApproxGraph g = build_from_st(chain_family({a, a, c, 1}), d0);
        CHECK(g.nodes.size() == 4);
        CHECK(g.lines.size() == 5);
        auto got = named_values(g);
        auto disp = paper_display_star(a, c, d0);
        for (const char* key : {"v3", "v4", "w12", "w13", "w14", "w23", "w24"})
            CHECK(got.at(key) == doctest::Approx(disp.at(key)).epsilon(1e-12));
        // junction nodes use the exclusive sum; the printed value is the inclusive one
        CHECK(got.at("v1") == doctest::Approx((2 * a - 3) / d0).epsilon(1e-12));
        CHECK(got.at("v2") == doctest::Approx((2 * a - 3) / d0).epsilon(1e-12));
        CHECK(disp.at("v1") == doctest::Approx(got.at("v1") - (c + 2 * a * a / d0)).epsilon(1e-12));
        for (const auto& ln : g.lines) CHECK(ln.A == 0.0);
        CHECK(g.nodes[0].degree == 3);
        CHECK(g.nodes[2].degree == 2);
    }

    TEST_CASE("ladder junction graphs")
    {
        const double a = 1.0 / 3, c = 8, d0 = 1e-3;
        ApproxGraph g = ladder_vertex_approx(a, c, d0);
        REQUIRE(g.nodes.size() == 6);
        auto got = named_values(g);
        auto disp = paper_display_ladder(a, c, d0);
        CHECK(got.at("v1") == doctest::Approx((a - 2) / d0).epsilon(1e-12));
        CHECK(got.at("v3") == doctest::Approx(2 / d0).epsilon(1e-12));
        CHECK(got.at("w15") == doctest::Approx((-2 + 1 / a) / d0).epsilon(1e-12));
        for (const char* key : {"v4", "v5", "v6", "w12", "w34", "w36"})
            CHECK(got.at(key) == doctest::Approx(disp.at(key)).epsilon(1e-12));
        CHECK(got.at("v1") != doctest::Approx(disp.at("v1")));
        CHECK(got.at("v3") != doctest::Approx(disp.at("v3")));
        CHECK_NOTHROW(ladder_vertex_approx(a, 0.0, d0));
        CHECK_THROWS_AS(ladder_vertex_approx(0.0, c, d0), DomainError);
        CHECK_THROWS_AS(paper_display_ladder(a, 0.0, d0), DomainError);
    }

    TEST_CASE("m = 0 produces isolated nodes")
    {
        STForm st;
        st.n = 3;
        st.m = 0;
        st.S = MatrixXc(0, 0);
        st.T = MatrixXc(0, 3);
        ApproxGraph g = build_from_st(st, 1e-2);
        CHECK(g.lines.empty());
        CHECK(g.nodes.size() == 3);
        for (const auto& nd : g.nodes) CHECK(nd.v == doctest::Approx(100.0));
        CHECK_THROWS_AS(build_from_st(st, 0.0), DomainError);
    }

    TEST_CASE("complex T gives a vector potential on the line")
    {
        const double d0 = 1e-2;
        ApproxGraph g = build_from_st(two_end(0.0, Complex(0, 0.5)), d0);
        REQUIRE(g.lines.size() == 1);
        CHECK(g.lines[0].A == doctest::Approx(pi / 2 / (2 * d0)));
        CHECK(g.signs == std::vector<int>{1, 1, 1});
        ApproxGraph h = build_from_st(two_end(0.0, -0.5), d0);
        CHECK(h.lines[0].A == doctest::Approx(0.0));
        CHECK(h.signs[0] == -1);
        CHECK(h.lines[0].w == doctest::Approx((-2 - 2) / d0));
    }

    TEST_CASE("substituted cells are well-formed")
    {
        const UnitCell ref = chain::chain_cell({1.0 / 3, 1.0 / 3, 8, 1, 1});
        ApproxGraph g = build_from_st(chain_family({1.0 / 3, 1.0 / 3, 8, 1}), 1e-3);
        UnitCell cell = substitute(ref, g, {0});
        CHECK_NOTHROW(check_cell(cell));
        CHECK(cell.edges.size() == 2 + 2 * g.lines.size());
        CHECK(cell.vertices.size() == g.nodes.size() + g.lines.size());
        for (const auto& v : cell.vertices) CHECK(validate(v.coupling).ok);
    }

    TEST_CASE("shifting the line potential by 2 pi / (2 d0) leaves the spectrum unchanged")
    {
        const double d0 = 1e-2;
        const STForm st = two_end(0.7, std::polar(0.8, 1.1));
        ApproxGraph g = build_from_st(st, d0);
        UnitCell a = substitute(loop_with(st), g, {0});
        UnitCell b = a;
        for (std::size_t e = 1; e < b.edges.size(); ++e)
            b.edges[e].potential += (e % 2 ? 1 : -1) * pi / d0;
        for (double k : {0.6, 1.9, 3.4}) {
            auto ra = bloch_phases(a, k, 0).roots, rb = bloch_phases(b, k, 0).roots;
            REQUIRE(ra.size() == rb.size());
            for (std::size_t i = 0; i < ra.size(); ++i) CHECK(std::abs(ra[i] - rb[i]) < 1e-8);
        }
    }

    TEST_CASE("complex coupling on a loop: bands converge")
    {
        const STForm st = two_end(0.7, std::polar(0.8, 1.1));
        std::vector<UnitCell> cells;
        std::vector<double> d0s = {3e-2, 3e-3};
        for (double d0 : d0s) cells.push_back(substitute(loop_with(st), build_from_st(st, d0), {0}));
        StudyOptions o;
        o.kmax = 6.0;
        o.n = 600;
        o.bands = 2;
        ConvergenceReport r = compare_bands(loop_with(st), cells, d0s, o);
        REQUIRE(r.max_err.size() == 2);
        CHECK(r.reference.size() == 2);
        CHECK(r.strictly_decreasing);
        CHECK(r.order_ratios[0] < 0.2);  // first order in d0
    }

    TEST_CASE("complex S and T: Bloch phases converge to the target, not its conjugate")
    {
        // three-end vertex on a loop plus a pendant edge
        STForm st;
        st.n = 3;
        st.m = 2;
        st.S.resize(2, 2);
        st.S << 0.4, Complex(0.3, 0.5), Complex(0.3, -0.5), -0.6;
        st.T.resize(2, 1);
        st.T << std::polar(0.8, 1.1), std::polar(0.5, -2.0);
        UnitCell cell;
        cell.periods = {1.0};
        cell.edges = {{1.0, 0.0, "loop"}, {0.7, 0.0, "pendant"}};
        cell.vertices.push_back({st_to_ab(st), {{0, Side::end, {-1}}, {0, Side::start, {0}}, {1, Side::start, {0}}}});
        cell.vertices.push_back({delta_coupling(1, 0.3), {{1, Side::end, {0}}}});
        const double k = 1.5;
        auto ref = bloch_phases(cell, k, 0).roots;
        REQUIRE(ref.size() == 2);
        // the spectrum is not symmetric under z -> conj(z) here
        CHECK(std::abs(std::arg(ref[0]) + std::arg(ref[1])) > 0.5);
        double prev = 1e300;
        for (double d0 : {1e-2, 1e-3, 1e-4}) {
            ApproxGraph g = build_from_st(st, d0);
            CHECK(g.lines.size() == 3);
            auto got = bloch_phases(substitute(cell, g, {0}), k, 0).roots;
            REQUIRE(got.size() == 2);
            const double err = std::max(std::abs(got[0] - ref[0]), std::abs(got[1] - ref[1]));
            CHECK(err < prev);
            prev = err;
        }
        CHECK(prev < 2e-3);
    }

    TEST_CASE("chain vertex: convergence on the first bands")
    {
        StudyOptions o;
        o.kmax = 5.0;
        o.n = 400;
        o.bands = 2;
        ConvergenceReport r = convergence_study(1.0 / 3, 8, {1e-2, 1e-3}, o);
        CHECK(r.strictly_decreasing);
        CHECK_FALSE(r.sign_flip);
        CHECK(r.rows.size() == 4);
        CHECK(convergence_csv(r).rfind("d0,band,edge_lo_err,edge_hi_err\n", 0) == 0);
    }
}

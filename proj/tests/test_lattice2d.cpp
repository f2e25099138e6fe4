#include <doctest.h>

#include <random>

#include "qgraph/lattice2d.hpp"

using namespace qgraph;
using namespace qgraph::lattice2d;

TEST_SUITE("lattice2d")
{
    TEST_CASE("cell structure")
    {
        const UnitCell c = lattice_cell({1, 1, 1, 1});
        CHECK(c.directions() == 2);
        CHECK(c.periods[1] == 2.0);
        CHECK_NOTHROW(check_cell(c));
        MatrixXc M = assemble(c, 1.1, {std::polar(1.0, 0.3), std::polar(1.0, -0.4)});
        CHECK(M.rows() == 8);
        CHECK_THROWS_AS(lattice_cell({1, 1, 1, 0}), DomainError);
    }

    TEST_CASE("generic value is the mean of reciprocal unit roots")
    {
        Lattice2DParams p{1, 1, 1, 1};
        for (double k : {0.7, 1.3, 2.2}) {
            const double X = secular_2d_generic(p, k, 0.4);
            if (std::abs(X) > 1) continue;
            const double qy = std::acos(X) / (2 * p.ell);
            MatrixXc M = assemble(lattice_cell(p), k, {std::polar(1.0, 0.4), std::polar(1.0, 2 * p.ell * qy)});
            MatrixXc M0 = assemble(lattice_cell(p), k, {std::polar(1.0, 0.4), 1.0});
            CHECK(std::abs(M.determinant()) < 1e-9 * std::max(1.0, std::abs(M0.determinant())));
        }
    }

    TEST_CASE("audit: cosine cross term matches the generic assembly, sine does not")
    {
        std::mt19937 rng(29);
        std::uniform_real_distribution<double> kd(0.2, 6), qd(-pi, pi);
        for (Lattice2DParams p : {Lattice2DParams{1, 1, 1, 1}, Lattice2DParams{0.7, 1.9, 1, 0.6}}) {
            int cos_ok = 0, sin_ok = 0, n = 0;
            while (n < 50) {
                const double k = kd(rng), q = qd(rng);
                if (std::abs(std::sin(k * p.L)) < 1e-3) continue;
                const double g = secular_2d_generic(p, k, q);
                const double c = p.ell == p.L ? secular_2d_equal(p, k, q, CrossTerm::cosine)
                                              : secular_2d_display(p, k, q, CrossTerm::cosine);
                const double s = p.ell == p.L ? secular_2d_equal(p, k, q, CrossTerm::sine)
                                              : secular_2d_display(p, k, q, CrossTerm::sine);
                const double sc = 1 + std::abs(g);
                cos_ok += std::abs(c - g) < 1e-8 * sc;
                sin_ok += std::abs(s - g) < 1e-8 * sc;
                ++n;
            }
            CHECK(cos_ok == 50);
            CHECK(sin_ok < 5);
        }
    }

    TEST_CASE("general display reduces to the equal-length form at ell = L")
    {
        Lattice2DParams p{0.8, 1.4, 1, 1};
        for (double k : {0.4, 1.1, 2.9, 5.2})
            for (double q : {0.0, 0.7, 2.0})
                CHECK(secular_2d_display(p, k, q, CrossTerm::cosine) ==
                      doctest::Approx(secular_2d_equal(p, k, q, CrossTerm::cosine)).epsilon(1e-10));
        CHECK_THROWS_AS(secular_2d_equal(p, pi, 0.1, CrossTerm::cosine), DomainError);
        // the generic path takes over at the guard
        CHECK_NOTHROW(secular_2d(p, pi, 0.1));
    }

    TEST_CASE("parity in qx")
    {
        CHECK(parity_probe({1, 1, 1, 1}) < 1e-8);
        CHECK(parity_probe({0.3, 2.0, 1.0, 0.7}) < 1e-8);
        auto g = qx_grid({1, 1, 1, 1}, 5, true);
        CHECK(g.front() == 0.0);
        CHECK(g.back() == doctest::Approx(pi));
        auto h = qx_grid({1, 1, 1, 1}, 5, false);
        CHECK(h.front() == doctest::Approx(-pi));
    }

    TEST_CASE("gaps for u = v = 1 and their stability under grid refinement")
    {
        Lattice2DParams p{1, 1, 1, 1};
        GapOptions o;
        o.kmax = 5.0;
        o.nk = 500;
        o.nqx = 64;
        GapReport a = find_gaps(p, o);
        o.nk = 1000;
        o.nqx = 128;
        GapReport b = find_gaps(p, o);
        REQUIRE(a.gaps.size() == b.gaps.size());
        REQUIRE(a.gaps.size() >= 2);
        CHECK(a.symmetric_grid);
        for (std::size_t i = 0; i < a.gaps.size(); ++i) {
            CHECK(std::abs(a.gaps[i].lo - b.gaps[i].lo) < 2e-3);
            CHECK(std::abs(a.gaps[i].hi - b.gaps[i].hi) < 2e-3);
        }
        // every gap midpoint has no state, every point between gaps has one
        const auto grid = qx_grid(p, 256, true);
        for (const auto& g : b.gaps) CHECK_FALSE(in_band(p, 0.5 * (g.lo + g.hi), grid));
        for (std::size_t i = 0; i + 1 < b.gaps.size(); ++i)
            CHECK(in_band(p, 0.5 * (b.gaps[i].hi + b.gaps[i + 1].lo), grid));
        bool has_paper_gap = false;
        for (const auto& g : b.gaps)
            has_paper_gap = has_paper_gap || (std::abs(g.lo - 4.431) < 5e-3 && std::abs(g.hi - 4.712) < 5e-3);
        CHECK(has_paper_gap);
    }

    TEST_CASE("currents: Kirchhoff balance and vanishing horizontal flow at qx = 0")
    {
        Lattice2DParams p{1, 1, 1, 1};
        int n = 0;
        for (int i = 1; i <= 60; ++i) {
            const double k = 0.1 * i;
            auto qy = solve_qy(p, k, 0.0);
            if (!qy) continue;
            Currents2D c = currents_2d(p, k, 0.0, *qy);
            for (double r : c.kirchhoff) CHECK(std::abs(r) <= 1e-10);
            CHECK(std::abs(c.J1x) <= 1e-10 * c.vnorm2);
            CHECK(std::abs(c.J2x) <= 1e-10 * c.vnorm2);
            CHECK(c.eig.residual <= 1e-8);
            ++n;
        }
        CHECK(n > 10);
        CHECK_THROWS_AS(currents_2d(p, 1.0, 1.0, 0.123), NoStateError);
    }

    TEST_CASE("all currents vanish at qx = 1, k = pi/2")
    {
        Lattice2DParams p{1, 1, 1, 1};
        auto qy = solve_qy(p, pi / 2, 1.0);
        REQUIRE(qy);
        Currents2D c = currents_2d(p, pi / 2, 1.0, *qy);
        for (double J : {c.J1x, c.J2x, c.J1y, c.J2y}) CHECK(std::abs(J) <= 1e-10 * c.vnorm2);
    }

    TEST_CASE("current roots near k = 0.754 at qx = 1")
    {
        Lattice2DParams p{1, 1, 1, 1};
        CurrentRoot r = find_current_root(p, 1.0, 0.743, 0.763, J2x | J1y | J2y);
        REQUIRE(r.found);
        CHECK(r.k == doctest::Approx(0.7539059332679536).epsilon(1e-6));
        CHECK(std::abs(r.currents.J1x) > 0.1);
    }
}

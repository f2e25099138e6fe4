#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qgraph/bloch.hpp"
#include "qgraph/chain.hpp"
#include "qgraph/ladder.hpp"
#include "qgraph/lattice2d.hpp"
#include "qgraph/polynomial.hpp"

using namespace qgraph;

namespace {

UnitCell free_loop(double L)
{
    UnitCell c;
    c.periods = {L};
    c.edges = {{L, 0.0, "loop"}};
    c.vertices.push_back({delta_coupling(2, 0.0), {{0, Side::end, {-1}}, {0, Side::start, {0}}}});
    return c;
}

// the same loop written with an identification instead of an explicit vertex
UnitCell free_loop_identified(double L)
{
    UnitCell c;
    c.periods = {L};
    c.edges = {{L, 0.0, "loop"}};
    c.identifications.push_back({{0, Side::end, {}}, {0, Side::start, {}}, 0});
    return c;
}

UnitCell kp_comb(double v, double L)
{
    UnitCell c = free_loop(L);
    c.vertices[0].coupling = delta_coupling(2, v);
    return c;
}

}  // namespace

TEST_SUITE("bloch")
{
    TEST_CASE("cell checks")
    {
        UnitCell c = free_loop(1.0);
        CHECK_NOTHROW(check_cell(c));
        c.vertices[0].ends[1].side = Side::end;  // end attached twice, start never
        CHECK_THROWS_AS(check_cell(c), StructuralError);
        UnitCell d = free_loop(1.0);
        d.periods = {-1.0};
        CHECK_THROWS_AS(check_cell(d), StructuralError);
        UnitCell e = free_loop(1.0);
        e.vertices[0].coupling = delta_coupling(3, 0.0);
        CHECK_THROWS_AS(check_cell(e), StructuralError);
        CHECK_THROWS_AS(assemble(free_loop(1.0), 0.0, {1.0}), DomainError);
        CHECK_THROWS_AS(assemble(free_loop(1.0), -1.0, {1.0}), DomainError);
    }

    TEST_CASE("free loop: singular exactly at z = exp(+-ikL)")
    {
        for (double k : {0.3, 1.0, 2.7}) {
            const double L = 1.3;
            for (double sgn : {1.0, -1.0}) {
                MatrixXc M = assemble(free_loop(L), k, {std::polar(1.0, sgn * k * L)});
                CHECK(std::abs(M.determinant()) < 1e-12);
            }
            MatrixXc M = assemble(free_loop(L), k, {std::polar(1.0, 0.5)});
            CHECK(std::abs(M.determinant()) > 1e-3);
        }
    }

    TEST_CASE("free loop: quadratic with roots exp(+-ikL)")
    {
        const double L = 1.0, k = 0.9;
        SecularPolynomial sp = secular_polynomial(free_loop(L), k, 0);
        CHECK(sp.degree == 2);
        CHECK_FALSE(sp.flat);
        auto r = polynomial_roots(sp.coeffs);
        REQUIRE(r.size() == 2);
        std::vector<double> args = {std::arg(r[0]), std::arg(r[1])};
        std::sort(args.begin(), args.end());
        CHECK(args[0] == doctest::Approx(-k * L).epsilon(1e-12));
        CHECK(args[1] == doctest::Approx(k * L).epsilon(1e-12));

        BlochRoots br = bloch_phases(free_loop(L), k, 0);
        REQUIRE(br.roots.size() == 2);
        CHECK(std::abs(br.roots[0] - std::polar(1.0, -k * L)) < 1e-12);
        CHECK(std::abs(br.roots[1] - std::polar(1.0, k * L)) < 1e-12);

        BlochRoots bi = bloch_phases(free_loop_identified(L), k, 0);
        REQUIRE(bi.roots.size() == 2);
        CHECK(std::abs(bi.roots[1] - std::polar(1.0, k * L)) < 1e-12);
    }

    TEST_CASE("free loop eigenvector at z = exp(ikL) is a pure right-mover")
    {
        const double k = 1.7, L = 1.0;
        EigenResult ev = eigenvector(free_loop(L), k, {std::polar(1.0, k * L)});
        CHECK(ev.residual < 1e-12);
        CHECK(std::abs(ev.v(1)) < 1e-12);
        CHECK(std::abs(ev.v(0)) == doctest::Approx(1.0));
        CHECK(flux(ev.v, k, 0) == doctest::Approx(k));
    }

    TEST_CASE("flux of plane waves")
    {
        VectorXc v(2);
        v << 1.0, 0.0;
        CHECK(flux(v, 2.0, 0) == doctest::Approx(2.0));
        v << Complex(0.3, 0.4), Complex(0.3, 0.4);
        CHECK(flux(v, 2.0, 0) == doctest::Approx(0.0));
    }

    TEST_CASE("single-strand Kronig-Penney against the transfer-matrix oracle")
    {
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> kd(0.05, 12.0), vd(-6.0, 6.0), Ld(0.4, 2.0);
        int compared = 0;
        for (int t = 0; t < 200; ++t) {
            const double k = kd(rng), v = vd(rng), L = Ld(rng);
            const double x = oracle::kp_cos(v, L, k);
            // textbook relation, independent of both codes
            CHECK(x == doctest::Approx(std::cos(k * L) + v / (2 * k) * std::sin(k * L)).epsilon(1e-12));
            BlochRoots br = bloch_phases(kp_comb(v, L), k, 0);
            if (std::abs(x) < 1 - 1e-6) {
                REQUIRE(br.roots.size() == 2);
                for (Complex z : br.roots) CHECK(std::abs(z.real() - x) < 1e-9);
                ++compared;
            } else if (std::abs(x) > 1 + 1e-6) {
                CHECK(br.roots.empty());
            }
        }
        CHECK(compared > 50);
    }

    TEST_CASE("chain model at k = 1: quartic whose unit roots give the closed-form branches")
    {
        chain::ChainParams p{1.0 / 3, 1.0 / 3, 8, 1, 1};
        const UnitCell cell = chain::chain_cell(p);
        SecularPolynomial sp = secular_polynomial(cell, 1.0, 0);
        CHECK(sp.degree == 4);
        // independent: eigenvalues of the one-period transfer matrix
        auto ref = oracle::unit_cos(oracle::chain_transfer_eigs(cell.vertices[0].coupling, 1.0, 1.0));
        BlochRoots br = bloch_phases(cell, 1.0, 0);
        std::vector<double> got;
        for (Complex z : br.roots) got.push_back(z.real());
        std::sort(got.begin(), got.end());
        got.erase(std::unique(got.begin(), got.end(), [](double a, double b) { return std::abs(a - b) < 1e-6; }),
                  got.end());
        REQUIRE(got.size() == ref.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - ref[i]) < 1e-9);
    }

    TEST_CASE("chain assembly equals the 4x4 AF + ikBG matrix up to z^-1")
    {
        chain::ChainParams p{0.4, -0.7, 3.0, 0.5, 1.2};
        const UnitCell cell = chain::chain_cell(p);
        const VertexCoupling c = cell.vertices[0].coupling;
        const double k = 1.9;
        const Complex z = std::polar(1.0, 0.77);
        const Complex E = std::polar(1.0, k * p.L);
        // rows of F: psi1(0-), psi1(0+), psi2(0-), psi2(0+) in the (alpha, beta) basis;
        // G holds the outward derivatives divided by ik
        MatrixXc F = MatrixXc::Zero(4, 4), G = MatrixXc::Zero(4, 4);
        F.row(0) << E / z, 1.0 / (E * z), 0, 0;
        F.row(1) << 1, 1, 0, 0;
        F.row(2) << 0, 0, E / z, 1.0 / (E * z);
        F.row(3) << 0, 0, 1, 1;
        G.row(0) << -E / z, 1.0 / (E * z), 0, 0;
        G.row(1) << 1, -1, 0, 0;
        G.row(2) << 0, 0, -E / z, 1.0 / (E * z);
        G.row(3) << 0, 0, 1, -1;
        MatrixXc expect = c.A * F + (I * k) * c.B * G;
        CHECK((assemble(cell, k, {z}) - expect).norm() < 1e-13);
    }

    TEST_CASE("ladder cell gives a 6x6 system")
    {
        MatrixXc M = assemble(ladder::ladder_cell({1, 1, 1, 1}), 0.8, {std::polar(1.0, 0.3)});
        CHECK(M.rows() == 6);
        CHECK(M.cols() == 6);
    }

    TEST_CASE("ladder u = v = 1 has zones with four unit roots")
    {
        const UnitCell cell = ladder::ladder_cell({1, 1, 1, 1});
        int four = 0, two = 0, zero = 0;
        for (int i = 1; i <= 300; ++i) {
            const double k = 0.02 * i;
            const int c = count_unit_roots(cell, k, 0);
            four += c == 4;
            two += c == 2;
            zero += c == 0;
        }
        CHECK(four > 0);
        CHECK(two > 0);
        CHECK(zero > 0);
    }

    TEST_CASE("property: polynomial consistency at 2 x degree random points")
    {
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> ang(-pi, pi), rad(0.7, 1.4), kk(0.2, 8.0);
        std::vector<UnitCell> cells = {chain::chain_cell({0.3, 0.6, 2.0, -0.5, 1.0}),
                                       ladder::ladder_cell({1.0, 2.0, 1.0, 0.6}), kp_comb(1.5, 1.0)};
        double worst = 0;
        for (const auto& cell : cells) {
            for (int t = 0; t < 5; ++t) {
                const double k = kk(rng);
                SecularPolynomial sp = secular_polynomial(cell, k, 0);
                for (int s = 0; s < 2 * sp.degree; ++s) {
                    const Complex z = std::polar(rad(rng), ang(rng));
                    const Complex lhs = assemble(cell, k, {z}).determinant() * std::pow(z, sp.offset);
                    const Complex rhs = polyval(sp.coeffs, z);
                    const double scale = sp.coeffs.cwiseAbs().sum();
                    worst = std::max(worst, std::abs(lhs - rhs) / scale);
                }
            }
        }
        CHECK(worst < 1e-9);
    }

    TEST_CASE("property: Kirchhoff sums, eigen residuals and flux constancy")
    {
        std::vector<UnitCell> cells = {chain::chain_cell({1.0 / 3, -1.0 / 3, 8, 1, 1}),
                                       ladder::ladder_cell({1, 1, 1, 1}), kp_comb(-2.0, 1.3)};
        // a cell with a vector potential on one edge
        UnitCell mag = chain::chain_cell({0.5, 0.2, 1.0, 0.3, 1.0});
        mag.edges[0].potential = 0.8;
        cells.push_back(mag);
        double worst_k = 0, worst_r = 0, worst_c = 0;
        int states = 0;
        for (const auto& cell : cells) {
            for (int i = 1; i <= 60; ++i) {
                const double k = 0.17 * i;
                for (Complex z : bloch_phases(cell, k, 0).roots) {
                    EigenResult ev = eigenvector(cell, k, {z});
                    worst_r = std::max(worst_r, ev.residual);
                    for (double r : kirchhoff_residuals(cell, ev.v, k)) worst_k = std::max(worst_k, std::abs(r));
                    for (int e = 0; e < static_cast<int>(cell.edges.size()); ++e) {
                        const double J = flux(ev.v, k, e);
                        for (int s = 0; s < 5; ++s) {
                            const double x = cell.edges[e].length * s / 4.0;
                            worst_c = std::max(worst_c, std::abs(current_at(cell, ev.v, k, e, x) - J));
                        }
                    }
                    ++states;
                }
            }
        }
        CHECK(states > 100);
        CHECK(worst_k <= 1e-10);
        CHECK(worst_r <= 1e-8);
        CHECK(worst_c <= 1e-10);
    }

    TEST_CASE("flux matches a finite-difference current at mid-edge")
    {
        const UnitCell cell = chain::chain_cell({1.0 / 3, -1.0 / 3, 8, 1, 1});
        const double k = 1.3;
        auto roots = bloch_phases(cell, k, 0).roots;
        REQUIRE(!roots.empty());
        EigenResult ev = eigenvector(cell, k, {roots.back()});
        for (int e = 0; e < 2; ++e) {
            const double x = 0.5, h = 1e-5;
            const Complex psi = psi_at(cell, ev.v, k, e, x);
            const Complex d = (psi_at(cell, ev.v, k, e, x + h) - psi_at(cell, ev.v, k, e, x - h)) / (2 * h);
            CHECK(std::imag(std::conj(psi) * d) == doctest::Approx(flux(ev.v, k, e)).epsilon(1e-8));
        }
    }

    TEST_CASE("property: conjugation symmetry for real couplings")
    {
        const UnitCell cell = ladder::ladder_cell({0.7, 1.3, 1.0, 0.8});
        for (int i = 1; i <= 40; ++i) {
            const double k = 0.25 * i;
            auto roots = bloch_phases(cell, k, 0).roots;
            for (Complex z : roots) {
                bool partner = false;
                for (Complex w : roots) partner = partner || std::abs(w - std::conj(z)) < 1e-8;
                CHECK(partner);
                EigenResult a = eigenvector(cell, k, {z});
                EigenResult b = eigenvector(cell, k, {std::conj(z)});
                if (a.degenerate || b.degenerate) continue;
                // conj(v(z)) solves the system at conj(z) with alpha and beta swapped
                VectorXc w(a.v.size());
                for (Index e = 0; 2 * e < a.v.size(); ++e) {
                    w(2 * e) = std::conj(a.v(2 * e + 1));
                    w(2 * e + 1) = std::conj(a.v(2 * e));
                }
                CHECK(std::abs(std::abs(w.dot(b.v)) - 1.0) < 1e-8);
            }
        }
    }

    TEST_CASE("two decoupled loops give a flagged two-dimensional null space")
    {
        UnitCell c;
        c.periods = {1.0};
        c.edges = {{1.0, 0.0, "a"}, {1.0, 0.0, "b"}};
        c.vertices.push_back({delta_coupling(2, 0.0), {{0, Side::end, {-1}}, {0, Side::start, {0}}}});
        c.vertices.push_back({delta_coupling(2, 0.0), {{1, Side::end, {-1}}, {1, Side::start, {0}}}});
        const double k = 1.1;
        EigenResult ev = eigenvector(c, k, {std::polar(1.0, k)});
        CHECK(ev.degenerate);
        REQUIRE(ev.second.size() == ev.v.size());
        CHECK(std::abs(ev.v.dot(ev.second)) < 1e-10);
        CHECK(ev.residual < 1e-10);
        MatrixXc M = assemble(c, k, {std::polar(1.0, k)});
        CHECK((M * ev.second).norm() < 1e-10 * M.norm());
        // both are right-movers
        CHECK(std::abs(ev.v(1)) + std::abs(ev.v(3)) < 1e-10);
        EigenResult single = eigenvector(free_loop(1.0), k, {std::polar(1.0, k)});
        CHECK_FALSE(single.degenerate);
    }

    TEST_CASE("scan rows and CSV header")
    {
        const UnitCell cell = kp_comb(1.0, 1.0);
        std::vector<double> ks;
        for (int i = 0; i <= 20; ++i) ks.push_back(1.0 + 0.025 * i);
        BandScan s = scan(cell, ks);
        REQUIRE(!s.rows.empty());
        for (const auto& r : s.rows) CHECK(r.branch == "b0");
        const std::string csv = band_scan_csv(s);
        CHECK(csv.rfind("k,E,q0,branch,J1,log_ratio,rel_sign\n", 0) == 0);
        CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
        CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
        CHECK(format_number(1.0 / 3) == "0.333333333333");
    }

    TEST_CASE("flux_ratio sentinels")
    {
        FluxResult a = flux_ratio(1.0, 0.0);
        CHECK(std::isinf(a.log_ratio));
        CHECK(a.log_ratio > 0);
        CHECK(a.rel_sign == 0);
        FluxResult b = flux_ratio(0.0, 1.0);
        CHECK(b.log_ratio < 0);
        FluxResult c = flux_ratio(-2.0, 0.2);
        CHECK(c.rel_sign == -1);
        CHECK(c.log_ratio == doctest::Approx(1.0));
    }

    TEST_CASE("band edges of the KP comb match the closed relation")
    {
        const double v = 2.0, L = 1.0;
        EdgeScanOptions o;
        o.kmin = 0.1;
        o.kmax = 7.0;
        o.n = 300;
        auto edges = band_edges(kp_comb(v, L), o);
        REQUIRE(!edges.empty());
        for (const auto& e : edges) {
            const double x = std::cos(e.k * L) + v / (2 * e.k) * std::sin(e.k * L);
            CHECK(std::abs(std::abs(x) - 1.0) < 1e-7);
        }
    }
}

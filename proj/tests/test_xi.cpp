#include <doctest.h>

#include <memory>

#include "lowdisc/xi.hpp"

using namespace lowdisc;

namespace {

std::shared_ptr<PhiGrid> grid_for(long nd, int P = 30, const char* eps = "5e-16") {
    return std::make_shared<PhiGrid>(KroneckerCharacter(FundamentalDiscriminant::make(nd)), P,
                                     BigReal(eps, P));
}

}  // namespace

TEST_CASE("xi_t is even in x") {
    const int P = 30;
    auto grid = grid_for(-163);
    XiEvaluator xi(grid, BigReal("0.1", P));
    for (const char* xs : {"0.1", "1", "7"}) {
        BigReal x(xs, P);
        XiEvaluator::Value a = xi.xi(x), b = xi.xi(-x);
        CHECK(abs(a.value - b.value) < 2 * a.err);
    }
    // 50 pseudo-random points across the resolvable range
    XiEvaluator xi0(grid);
    uint64_t s = 12345;
    for (int i = 0; i < 50; ++i) {
        s = s * 6364136223846793005ull + 1442695040888963407ull;
        double xv = ((s >> 11) + 0.5) / 9007199254740992.0 * 20.0;
        BigReal x = BigReal::from_double(xv, P);
        XiEvaluator::Value a = xi0.xi(x), b = xi0.xi(-x);
        CHECK(abs(a.value - b.value) < 2 * a.err);
    }
}

TEST_CASE("heat-time domain is [-1/2, 1/2]") {
    auto grid = grid_for(-163);
    CHECK_THROWS_AS(XiEvaluator(grid, BigReal("0.51", 30)), std::domain_error);
    CHECK_NOTHROW(XiEvaluator(grid, BigReal("-0.5", 30)));
}

TEST_CASE("undeformed-only operations enforce t = 0") {
    auto grid = grid_for(-163);
    XiEvaluator deformed(grid, BigReal("0.1", 30));
    CHECK_THROWS_AS(deformed.moments(), std::domain_error);
    CHECK_THROWS_AS(deformed.z_value(BigReal(0, 30)), std::domain_error);
}

TEST_CASE("-115147: Z(0) value and the sign change at the first zero") {
    const int P = 30;
    auto grid = grid_for(-115147);
    XiEvaluator xi(grid);
    BigReal z0 = xi.z_value(BigReal(0, P));
    CHECK(abs(z0 - BigReal("6.03627e-5", P)) < BigReal("1e-9", P));
    // sign change of Xi_0 across x = 0.0031576
    BigReal lo = xi(BigReal("0.0031", P));
    BigReal hi = xi(BigReal("0.0032", P));
    CHECK(lo.sign() != hi.sign());
    CHECK(xi(BigReal(0, P)) > 0);
}

TEST_CASE("Z is even and positive at the origin for -163") {
    const int P = 30;
    auto grid = grid_for(-163);
    XiEvaluator xi(grid);
    BigReal t("0.3", P);
    BigReal zp = xi.z_value(t), zm = xi.z_value(-t);
    CHECK(abs(zp - zm) < BigReal("1e-13", P));
    CHECK(xi.z_value(BigReal(0, P)) > 0);
}

TEST_CASE("backward-heat residual vanishes at second order (-163, t=0.1, x=0.5)") {
    const int P = 30;
    auto grid = grid_for(-163);
    const BigReal t("0.1", P), x("0.5", P);
    auto residual = [&](const BigReal& h) {
        XiEvaluator up(grid, t + h), dn(grid, t - h), mid(grid, t);
        BigReal dt = (up(x) - dn(x)) / (2 * h);
        BigReal dxx = (mid(x + h) - 2 * mid(x) + mid(x - h)) / (h * h);
        return dt + dxx;
    };
    BigReal r1 = residual(BigReal("0.02", P));
    BigReal r2 = residual(BigReal("0.01", P));
    // second-order stencils: halving h divides the residual by ~4
    CHECK(abs(r2) < abs(r1));
    BigReal ratio = abs(r1) / abs(r2);
    CHECK(ratio > BigReal("2.5", P));
    CHECK(ratio < BigReal("6.0", P));
}

TEST_CASE("backward-heat residual decays at second order at 5 scattered (t,x) points") {
    const int P = 30;
    auto grid = grid_for(-163);
    const double pts[5][2] = {{0.05, 0.3}, {0.2, 1.1}, {0.32, 2.4}, {-0.15, 0.8}, {0.4, 0.15}};
    for (const auto& p : pts) {
        BigReal t = BigReal::from_double(p[0], P), x = BigReal::from_double(p[1], P);
        auto residual = [&](const BigReal& h) {
            XiEvaluator up(grid, t + h), dn(grid, t - h), mid(grid, t);
            return (up(x) - dn(x)) / (2 * h) +
                   (mid(x + h) - 2 * mid(x) + mid(x - h)) / (h * h);
        };
        BigReal r1 = residual(BigReal("0.02", P));
        BigReal r2 = residual(BigReal("0.01", P));
        BigReal ratio = abs(r1) / abs(r2);
        CHECK(ratio > BigReal(2, P));
        CHECK(ratio < BigReal(8, P));
    }
}

TEST_CASE("moments: refinement convergence contract and error bookkeeping") {
    const int P = 30;
    auto grid = grid_for(-163);
    XiEvaluator xi(grid);
    MomentPair mp = xi.moments();
    CHECK(mp.xi0 > 0);
    CHECK(mp.xi2 < 0);
    CHECK(mp.err > 0);
    // a forced-deeper grid moves xi0 by less than err
    QuadOptions deeper;
    deeper.base_panels = 2 * grid->options().base_panels;
    auto grid2 = std::make_shared<PhiGrid>(KroneckerCharacter(FundamentalDiscriminant::make(-163)),
                                           P, BigReal("5e-16", P), deeper);
    MomentPair mp2 = XiEvaluator(grid2).moments();
    CHECK(abs(mp.xi0 - mp2.xi0) < mp.err);
    CHECK(abs(mp.xi2 - mp2.xi2) < mp.err);
}

TEST_CASE("(log Z)''(0) identity matches a direct finite difference to 6 digits (-163)") {
    const int P = 30;
    auto grid = grid_for(-163);
    XiEvaluator xi(grid);
    BigReal identity = xi.log_z_second();
    // direct route: second difference of log Z on a Z grid; Z'(0) = 0 by
    // evenness so (log Z)''(0) = 2 (log Z(h) - log Z(0)) / h^2
    BigReal h("2e-4", P);
    BigReal fd = 2 * (log(xi.z_value(h)) - log(xi.z_value(BigReal(0, P)))) / (h * h);
    CHECK(abs(fd - identity) < BigReal("1e-6", P) * abs(identity));
    CHECK(xi.log_l_second() == identity);
}

TEST_CASE("log_z_second plus the doubled zero sum approaches the trigamma constant (-163)") {
    const int P = 30;
    auto grid = grid_for(-163);
    XiEvaluator xi(grid);
    MomentPair mp = xi.moments();
    // -1/2 xi2/xi0 = sum gamma_j^{-2} over j >= 1, so log_z_second plus the
    // sum over all +-gamma_j recovers (1/4) psi'(3/4) exactly in the limit;
    // with the moment route the identity is exact up to quadrature error
    BigReal zero_sum_all = -(mp.xi2 / mp.xi0);  // sum over both signs
    BigReal recovered = xi.log_z_second(mp) + zero_sum_all;
    CHECK(abs(recovered - trigamma_quarter(P)) < BigReal("1e-12", P));
    CHECK(abs(recovered - BigReal("0.63547", P)) < BigReal("5e-6", P));
}

TEST_CASE("quadrature failure carries a numerical error, not garbage") {
    const int P = 30;
    QuadOptions tiny;
    tiny.max_level = 1;
    auto grid = std::make_shared<PhiGrid>(KroneckerCharacter(FundamentalDiscriminant::make(-163)),
                                          P, BigReal("5e-16", P), tiny);
    XiEvaluator xi(grid);
    CHECK_THROWS_AS(xi.xi(BigReal(300, P)), numerical_error);
}

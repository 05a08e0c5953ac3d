#include <doctest.h>

#include <memory>
#include <sstream>

#include "lowdisc/zeros.hpp"

using namespace lowdisc;

namespace {

std::shared_ptr<PhiGrid> grid_for(long nd, int P = 30, const char* eps = "5e-16") {
    return std::make_shared<PhiGrid>(KroneckerCharacter(FundamentalDiscriminant::make(nd)), P,
                                     BigReal(eps, P));
}

ZeroSearchOptions opts(long count, int P = 30, const char* tol = "1e-9") {
    ZeroSearchOptions o;
    o.count = count;
    o.tol = BigReal(tol, P);
    return o;
}

}  // namespace

TEST_CASE("first zeros of -115147 and -163 match the reference ordinates") {
    const int P = 30;
    XiEvaluator xi115(grid_for(-115147));
    ZeroList zl = find_zeros(xi115, opts(2));
    REQUIRE(zl.count() == 2);
    CHECK(abs(zl.gammas[0] - BigReal("0.0031576", P)) < BigReal("1e-6", P));

    XiEvaluator xi163(grid_for(-163));
    ZeroList zl163 = find_zeros(xi163, opts(1));
    CHECK(abs(zl163.gammas[0] - BigReal("0.202901", P)) < BigReal("5e-7", P));
}

TEST_CASE("brackets straddle sign changes and respect tol") {
    const int P = 30;
    XiEvaluator xi(grid_for(-163));
    ZeroList zl = find_zeros(xi, opts(5));
    REQUIRE(zl.count() == 5);
    for (size_t j = 0; j < zl.count(); ++j) {
        const auto& b = zl.brackets[j];
        CHECK(b.hi - b.lo <= zl.tol);
        CHECK(zl.gammas[j] >= b.lo);
        CHECK(zl.gammas[j] <= b.hi);
        CHECK(xi(b.lo).sign() * xi(b.hi).sign() <= 0);
        if (j > 0) CHECK(zl.gammas[j] > zl.gammas[j - 1]);
        CHECK(zl.gammas[j] > 0);
    }
}

TEST_CASE("a twice-finer scan grid finds the same zeros (grid independence)") {
    XiEvaluator xi(grid_for(-163));
    ZeroSearchOptions coarse = opts(10);
    ZeroSearchOptions fine = opts(10);
    fine.grid_factor = 16.0;
    ZeroList a = find_zeros(xi, coarse);
    ZeroList b = find_zeros(xi, fine);
    REQUIRE(a.count() == b.count());
    for (size_t j = 0; j < a.count(); ++j)
        CHECK(abs(a.gammas[j] - b.gammas[j]) <= 2 * a.tol);
}

TEST_CASE("certify: positive shrinking residual; removing gamma_1 bumps it exactly") {
    const int P = 30;
    XiEvaluator xi(grid_for(-163));
    MomentPair mp = xi.moments();
    ZeroList zl = find_zeros(xi, opts(20), &mp);
    BigReal r20 = zl.residual;
    CHECK(r20 > 0);
    ZeroList zl10 = zl;
    zl10.gammas.resize(10);
    zl10.brackets.resize(10);
    BigReal r10 = certify(zl10, mp);
    CHECK(r10 > r20);

    ZeroList missing_first = zl;
    missing_first.gammas.erase(missing_first.gammas.begin());
    missing_first.brackets.erase(missing_first.brackets.begin());
    BigReal r_missing = certify(missing_first, mp);
    BigReal g1 = zl.gammas.front();
    CHECK(abs((r_missing - zl.residual) - 1 / (g1 * g1)) < BigReal("1e-20", P));
    // a residual inflated by a whole gamma_1^{-2} violates the tail allowance
    CHECK(missing_first.residual_tail_anomaly);
}

TEST_CASE("find_zeros raises incomplete_zero_list when fed a truncated moment target") {
    // simulate a 'missed zero' by injecting moments whose zero sum is larger
    // than the scan can account for: certify sees residual < -2 err
    XiEvaluator xi(grid_for(-163));
    MomentPair mp = xi.moments();
    MomentPair cooked = mp;
    cooked.xi2 = mp.xi2 / 4;  // pretend sum gamma^-2 is a quarter of reality
    CHECK_THROWS_AS(find_zeros(xi, opts(5), &cooked), incomplete_zero_list);
}

TEST_CASE("scan refuses to walk into the precision floor") {
    const int P = 17;
    auto grid = grid_for(-3, P, "1e-12");
    XiEvaluator xi(grid);
    ZeroSearchOptions o = opts(25, P, "1e-8");
    o.certify_completeness = false;
    CHECK_THROWS_AS(find_zeros(xi, o), numerical_error);
}

TEST_CASE("search options are validated") {
    XiEvaluator xi(grid_for(-163));
    ZeroSearchOptions bad;
    bad.count = 3;
    bad.tol = BigReal(0, 30);
    CHECK_THROWS_AS(find_zeros(xi, bad), config_error);
    bad.tol = BigReal("1e-40", 30);  // below 10^(2-P)
    CHECK_THROWS_AS(find_zeros(xi, bad), config_error);
    ZeroSearchOptions none;
    none.tol = BigReal("1e-9", 30);
    CHECK_THROWS_AS(find_zeros(xi, none), config_error);
}

TEST_CASE("height-target mode stops past the requested height") {
    const int P = 30;
    XiEvaluator xi(grid_for(-163));
    ZeroSearchOptions o;
    o.height = BigReal(3, P);
    o.tol = BigReal("1e-9", P);
    ZeroList zl = find_zeros(xi, o);
    REQUIRE(zl.count() >= 2);
    CHECK(zl.gammas.front() < 3);
    for (const auto& g : zl.gammas) CHECK(g < BigReal("3.2", P));
}

TEST_CASE("classify_origin: maxima for the low-zero examples, minima for tiny D") {
    CHECK(classify_origin(XiEvaluator(grid_for(-115147))) == OriginClass::positive_local_max);
    CHECK(classify_origin(XiEvaluator(grid_for(-163))) == OriginClass::positive_local_max);
    CHECK(classify_origin(XiEvaluator(grid_for(-3))) == OriginClass::positive_local_min);
    CHECK(classify_origin(XiEvaluator(grid_for(-4))) == OriginClass::positive_local_min);
}

TEST_CASE("classify_origin agrees with the direct shape of Z near the origin") {
    // -20 sits just past the curvature threshold (2 sum gamma^-2 barely above
    // (1/4) psi'(3/4)), a case where a sign slip in the identity would flip
    // the class; the raw Z values arbitrate
    const int P = 30;
    for (long nd : {-19L, -20L, -24L, -3L, -8L, -11L}) {
        XiEvaluator xi(grid_for(nd));
        OriginClass c = classify_origin(xi);
        BigReal z0 = xi.z_value(BigReal(0, P));
        REQUIRE(z0 > 0);
        bool shape_min = true;
        for (const char* hs : {"0.2", "0.1", "0.05"}) {
            if (!(xi.z_value(BigReal(hs, P)) > z0)) shape_min = false;
        }
        CHECK(c == (shape_min ? OriginClass::positive_local_min : OriginClass::positive_local_max));
    }
}

TEST_CASE("import_zero_list parses ordinates and validates monotonicity") {
    const int P = 30;
    FundamentalDiscriminant disc = FundamentalDiscriminant::make(-163);
    std::istringstream in("# comment line\n0.2029013\n\n2.3685\n3.5\n");
    ZeroList zl = import_zero_list(disc, in, BigReal("1e-6", P), P);
    REQUIRE(zl.count() == 3);
    CHECK(zl.gammas[1].to_double() == doctest::Approx(2.3685));
    CHECK(zl.brackets[0].lo < zl.gammas[0]);

    std::istringstream bad("1.0\n0.5\n");
    CHECK_THROWS_AS(import_zero_list(disc, bad, BigReal("1e-6", P), P), config_error);
    std::istringstream neg("-1.0\n");
    CHECK_THROWS_AS(import_zero_list(disc, neg, BigReal("1e-6", P), P), config_error);
}

TEST_CASE("imported external zeros are consistent with the scan (cross-validation)") {
    const int P = 30;
    XiEvaluator xi(grid_for(-163));
    MomentPair mp = xi.moments();
    ZeroList scanned = find_zeros(xi, opts(5), &mp);
    std::ostringstream dump;
    for (const auto& g : scanned.gammas) dump << g.str() << "\n";
    std::istringstream in(dump.str());
    ZeroList imported = import_zero_list(scanned.disc, in, scanned.tol, P);
    BigReal r = certify(imported, mp);
    CHECK(abs(r - scanned.residual) < BigReal("1e-15", P));
}

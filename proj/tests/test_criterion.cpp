#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "h2lab/criterion.hpp"

#include <random>

using namespace h2lab;

namespace {

using Q = QuadNum;

LatticeBasis<Q> basis(Q a, Q b, Q c, Q d) { return LatticeBasis<Q>(QMat{a, b, c, d}); }
LatticeBasis<Q> z2() { return basis(1, 0, 0, 1); }

// Exhaustive oracle for the isogeny scalar: smallest tau = a/b (a, b <= N)
// with tau L1 in L2, checked by direct coordinate integrality.
std::optional<Rational> brute_tau(const LatticeBasis<Q>& L1, const LatticeBasis<Q>& L2, long long N) {
    std::optional<Rational> best;
    for (long long b = 1; b <= N; ++b)
        for (long long a = 1; a <= N; ++a) {
            Rational tau(a, b);
            bool ok = true;
            for (int c = 0; c < 2 && ok; ++c) {
                Vec2<Q> x = L2.coords(Q(tau) * L1.gen(c));
                ok = x.x.is_rational() && x.y.is_rational() && x.x.a().is_integer() && x.y.a().is_integer();
            }
            if (ok && (!best || tau < *best)) best = tau;
        }
    return best;
}

}  // namespace

TEST_CASE("isogeny scalar") {
    CHECK(isogeny_scalar(z2(), z2()) == Rational(1));
    LatticeBasis<Q> half = basis(Rational(1, 2), 0, 0, Rational(1, 2));
    CHECK(isogeny_scalar(z2(), half) == Rational(1, 2));
    auto P = prototypical_pair({0, 1, 2});
    CHECK_FALSE(isogeny_scalar(P.first, P.second).has_value());
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> ent(-4, 4);
    int compared = 0;
    for (int it = 0; it < 60; ++it) {
        QMat a{ent(rng), ent(rng), ent(rng), ent(rng)}, b{ent(rng), ent(rng), ent(rng), ent(rng)};
        if (a.det().is_zero() || b.det().is_zero()) continue;
        LatticeBasis<Q> L1(a), L2(b);
        auto tau = isogeny_scalar(L1, L2);
        auto oracle = brute_tau(L1, L2, 40);
        REQUIRE(tau.has_value());  // rational lattices are always commensurable
        if (oracle) {
            CHECK(*tau == *oracle);
            ++compared;
        } else {
            CHECK((tau->num() > 40 || tau->den() > 40));
        }
    }
    CHECK(compared > 20);
    LatticeBasis<Q> s3 = basis(Q::sqrt_of(3), 0, 0, 1);
    CHECK_THROWS_AS(isogeny_scalar(s3, P.second), DomainError);
}

TEST_CASE("relations for Z^2") {
    LatticePair<Q> pair{z2(), z2()};
    auto pres = present(pair, {Q(1), Q(0)});
    REQUIRE(pres);
    CHECK(pres->r == Q(1));
    CHECK(pres->v == Vec2<Q>{Q(0), Q(1)});
    CHECK(pres->w == Vec2<Q>{Q(0), Q(1)});
    RelationResult rel = solve_relations(*pres);
    REQUIRE(rel.solved);
    const RelationData& d = rel.data;
    CHECK(d.i == 0);
    CHECK(d.j == 1);
    CHECK(d.m == 0);
    CHECK(d.n == 1);
    CHECK(d.t == Q(1));
    CHECK(d.s == Q(1));
    CHECK(d.k == 1);
    CHECK(relation_residuals(d).all_zero());
    auto T = mixed_splitting(d);
    CHECK(T.first.basis == QMat{Q(1), Q(0), Q(1), Q(1)});
    CHECK(T.second.basis == QMat{Q(1), Q(0), Q(1), Q(1)});
    CHECK(isogeny_matrix(d) == QMat::identity());
    CHECK(mixed_isogeny_matrix(d) == QMat::identity());
    CHECK_THROWS_AS(present(pair, {Q(2), Q(0)}), DomainError);
}

TEST_CASE("relations for the prototypical (0,1,2) pair") {
    auto P = prototypical_pair({0, 1, 2});
    RelationResult rel = solve_relations(P);
    REQUIRE(rel.solved);
    const RelationData& d = rel.data;
    CHECK(d.k == 2);
    CHECK(d.r == Q::sqrt_of(2));
    CHECK(d.r_prime_sq == Rational(2));
    CHECK(relation_residuals(d).all_zero());
    // the printed certificate matrices agree with an independent change-of-basis solve
    auto T = mixed_splitting(d);
    CHECK(mixed_isogeny_matrix(d) == T.second.basis.inverse() * T.first.basis);
    CHECK(isogeny_matrix(d) == d.pres.lambda2.basis.inverse() * d.pres.lambda1.basis);
    CHECK(T.first.basis.det() + T.second.basis.det() == P.first.area() + P.second.area());
}

TEST_CASE("relations: random exact presentations re-substitute with zero residual") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> ent(-5, 5);
    Q s2 = Q::sqrt_of(2);
    int solved = 0;
    for (int it = 0; it < 300; ++it) {
        QMat a{ent(rng), ent(rng), ent(rng), ent(rng)}, b{ent(rng), ent(rng), ent(rng), ent(rng)};
        if (a.det().is_zero() || b.det().is_zero()) continue;
        // second lattice over Q(sqrt 2) scaled, first rational: still commensurable directions
        LatticePair<Q> pair{LatticeBasis<Q>(a), LatticeBasis<Q>(s2 * b)};
        RelationResult rel = solve_relations(pair);
        if (!rel.solved) continue;
        ++solved;
        CHECK(relation_residuals(rel.data).all_zero());
        try {
            auto T = mixed_splitting(rel.data);
            CHECK(T.first.basis.det() + T.second.basis.det() ==
                  rel.data.pres.lambda1.basis.det() + rel.data.pres.lambda2.basis.det());
            CHECK(mixed_isogeny_matrix(rel.data) == T.second.basis.inverse() * T.first.basis);
        } catch (const DomainError&) {
        }
    }
    CHECK(solved > 100);
}

TEST_CASE("relations: non-commensurable pair is reported unsolvable") {
    LatticePair<Q> pair{z2(), basis(1, Q::sqrt_of(2), 0, 1)};
    RelationResult rel = solve_relations(pair);
    CHECK_FALSE(rel.solved);
    CHECK(rel.reason.find("not a closed-orbit presentation") != std::string::npos);
    CriterionResult c = teichmuller_criterion(pair, 0.1);
    CHECK(c.verdict == Verdict::Undetermined);
}

TEST_CASE("criterion: equal areas with k = 1") {
    CriterionResult c = teichmuller_criterion({z2(), z2()});
    REQUIRE(c.verdict == Verdict::Curve);
    CHECK(c.k == 1);
    CHECK(c.p == 1);
    CHECK(c.q == 1);
    CHECK(c.first->tau == Rational(1));
    CHECK(c.second->tau == Rational(1));
    CHECK(c.first->tau.is_integer());
    CHECK(c.d_bound_branch == "D=4m");
    CHECK(criterion_json(c).find("\"verdict\":\"curve\"") != std::string::npos);
}

TEST_CASE("criterion: prototypical (0,1,2) pair needs the area deformation") {
    auto P = prototypical_pair({0, 1, 2});
    CriterionResult plain = teichmuller_criterion(P);
    CHECK(plain.verdict == Verdict::Undetermined);
    CHECK(plain.k == 2);
    CriterionResult c = teichmuller_criterion(P, 0.1);
    REQUIRE(c.verdict == Verdict::Curve);
    CHECK(c.k == 2);
    CHECK(c.p == 3);
    CHECK(c.q == 4);
    CHECK(c.epsilon == doctest::Approx(0.0607).epsilon(1e-3));
    CHECK(c.epsilon < 0.1);
    // ratio * sqrt 2 is rational for the certified pair
    Q ratio = c.certified_pair.first.area() / c.certified_pair.second.area();
    CHECK((ratio * Q(2)).is_rational());
    CHECK(c.relations->r.is_rational());
    CHECK(c.d_bound_branch == "square");
}

TEST_CASE("criterion: mismatched square-free parts stay undetermined") {
    // A1 = 1, A2 = 2: r' = 1, so k = 1 but sqrt(A1/A2) = 1/sqrt 2 is irrational
    LatticePair<Q> pair{z2(), basis(Q::sqrt_of(2), 0, 0, Q::sqrt_of(2))};
    CriterionResult c = teichmuller_criterion(pair, 0.1);
    CHECK(c.verdict == Verdict::Undetermined);
    CHECK(c.k == 1);
    CHECK(c.reason.find("areas differ") != std::string::npos);
}

TEST_CASE("criterion: L-shaped presentations give integral certificates") {
    for (long long d = 4; d <= 30; d += 2) {
        CAPTURE(d);
        CriterionResult c = teichmuller_criterion(lshape_pair(d));
        REQUIRE(c.verdict == Verdict::Curve);
        CHECK(c.k == 1);
        CHECK(relation_residuals(*c.relations).all_zero());
        CHECK(isogeny_matrix(*c.relations) == QMat{Q(d / 2), Q(0), Q(0), Q(Rational(2, d))});
        CHECK(c.first->tau == Rational(d / 2));
        for (const auto& cert : {*c.first, *c.second}) {
            CHECK(cert.matrix.a.is_integer());
            CHECK(cert.matrix.b.is_integer());
            CHECK(cert.matrix.c.is_integer());
            CHECK(cert.matrix.d.is_integer());
            CHECK(Q(cert.tau) * cert.bases.first.basis ==
                  cert.bases.second.basis * QMat{Q(cert.matrix.a), Q(cert.matrix.b), Q(cert.matrix.c), Q(cert.matrix.d)});
        }
    }
    CHECK_THROWS_AS(lshape_pair(5), DomainError);
}

TEST_CASE("criterion: eigenform prototypes certify after deformation") {
    int curves = 0, total = 0;
    for (long long D = 5; D <= 60; ++D) {
        if (D % 4 != 0 && D % 4 != 1) continue;
        for (const auto& p : enumerate_eigenform_prototypes(D)) {
            if (p.e != 0) continue;  // the deformation needs equal areas
            ++total;
            CriterionResult c = teichmuller_criterion(prototypical_pair(p), 0.05);
            if (c.verdict == Verdict::Curve) ++curves;
        }
    }
    CHECK(total > 5);
    CHECK(curves == total);
}

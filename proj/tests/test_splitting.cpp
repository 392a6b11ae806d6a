#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "h2lab/splitting.hpp"

#include <random>

using namespace h2lab;

namespace {

using Q = QuadNum;

Q q(long long n, long long d = 1) { return Q(Rational(n, d)); }

LatticeBasis<Q> qbasis(Q a, Q b, Q c, Q d) { return LatticeBasis<Q>(Mat2<Q>{a, b, c, d}); }

SplittingTriple<Q> d8_triple() {
    Q s2 = Q::sqrt_of(2);
    return {qbasis(q(2), q(0), q(0), q(1)), qbasis(s2, q(0), q(0), s2), {s2, q(0)}, PrimitiveIn::Second};
}

// Oracle: lattice points on [0,v] by scanning all small integer combinations.
int brute_count(const Lattice& L, const Vec2d& v) {
    int count = 0;
    for (int m = -30; m <= 30; ++m)
        for (int n = -30; n <= 30; ++n) {
            Vec2d p = L.basis * Vec2d{double(m), double(n)};
            double c = cross(p, v), t = dot(p, v) / norm2(v);
            if (std::fabs(c) < 1e-9 && t > -1e-9 && t < 1 + 1e-9) ++count;
        }
    return count;
}

}  // namespace

TEST_CASE("validate_splitting examples") {
    SplittingTriple<double> a{Lattice::from_vectors({2, 0}, {0, 0.5}), Lattice(Mat2d::identity()), {1, 0}};
    ValidationReport ra = validate_splitting(a);
    CHECK(ra.valid);
    CHECK(ra.primitive_in == PrimitiveIn::Second);

    SplittingTriple<double> b{Lattice(Mat2d::identity()), Lattice(Mat2d::identity()), {0.5, 0}};
    ValidationReport rb = validate_splitting(b);
    CHECK_FALSE(rb.valid);
    CHECK(rb.reason == "v lies in neither lattice");

    ValidationReport rc = validate_splitting(d8_triple());
    CHECK(rc.valid);
    CHECK(rc.primitive_in == PrimitiveIn::Second);

    SplittingTriple<double> z{Lattice(Mat2d::identity()), Lattice(Mat2d::identity()), {0, 0}};
    CHECK_THROWS_AS(validate_splitting(z), DomainError);

    // v = 2 e1 in Z^2 and in 2Z: Z^2 has an interior point (witness)
    SplittingTriple<double> w{Lattice(Mat2d::identity()), Lattice(2.0 * Mat2d::identity()), {2, 0}};
    ValidationReport rw = validate_splitting(w);
    CHECK_FALSE(rw.valid);
    CHECK_FALSE(rw.witness.empty());
}

TEST_CASE("segment lattice points match brute force") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-2, 2);
    for (int i = 0; i < 200; ++i) {
        Lattice L = Lattice::from_vectors({1 + 0.1 * U(rng), 0.2 * U(rng)}, {0.3 * U(rng), 1 + 0.1 * U(rng)});
        int m = int(rng() % 7) - 3, n = int(rng() % 7) - 3;
        if (m == 0 && n == 0) continue;
        Vec2d v = L.basis * Vec2d{double(m), double(n)};
        auto pts = segment_lattice_points(L, v);
        CHECK(int(pts.points.size()) == brute_count(L, v));
        CHECK(pts.contains_v);
    }
}

TEST_CASE("validity is invariant under GL2+") {
    SplittingTriple<double> t = to_double(d8_triple());
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int i = 0; i < 200; ++i) {
        Mat2d g = rotation(3 * U(rng)) * geodesic(2 * U(rng)) * horocycle(U(rng));
        g = (1.5 + U(rng)) * g;
        CHECK(validate_splitting(act_splitting(g, t)).valid);
    }
    // exact rational g
    SplittingTriple<Q> e = d8_triple();
    for (int i = 0; i < 20; ++i) {
        Mat2<Q> g{q(1 + long(rng() % 5)), q(long(rng() % 7) - 3, 2), q(long(rng() % 3), 3), q(2)};
        if (g.det().sign() <= 0) continue;
        ValidationReport r = validate_splitting(act_splitting(g, e));
        CHECK(r.valid);
        CHECK(r.primitive_in == PrimitiveIn::Second);
    }
    CHECK(validate_splitting(act_splitting(Mat2<Q>{q(1), q(0), q(0), q(1)}, e)).valid);
}

TEST_CASE("area_ratio examples") {
    CHECK(area_ratio(d8_triple()) == Q(1));
    SplittingTriple<Q> l16{qbasis(q(2), q(0), q(0), q(1)), qbasis(q(1), q(0), q(0), q(2)), {q(1), q(0)}};
    CHECK(area_ratio(l16) == Q(1));
    CHECK(total_area(l16) == Q(4));
}

TEST_CASE("deform_area and normalize_area") {
    SplittingTriple<double> t = to_double(normalize_area(d8_triple()));
    CHECK(total_area(t) == doctest::Approx(1.0));
    CHECK(normalize_area(d8_triple()).lambda1.basis.a == q(1));  // prototype (0,1,2): scaled by 1/2
    SplittingTriple<double> t0 = deform_area(t, 0);
    CHECK(max_abs_entry(t0.lambda1.basis - t.lambda1.basis) == 0);
    CHECK(max_abs_entry(t0.lambda2.basis - t.lambda2.basis) == 0);

    // Square roots of the areas scale by (1+eps); the area ratio by (1+eps)^2.
    SplittingTriple<double> t1 = deform_area(t, 0.1);
    CHECK(std::sqrt(area_ratio(t1)) == doctest::Approx(1.1).epsilon(1e-14));
    CHECK(area_ratio(t1) == doctest::Approx(1.21).epsilon(1e-14));

    // round trip with (1+eps)(1+eps') = 1
    SplittingTriple<double> back = deform_area(t1, 1 / 1.1 - 1);
    CHECK(max_abs_entry(back.lambda1.basis - t.lambda1.basis) < 1e-15);
    CHECK(max_abs_entry(back.lambda2.basis - t.lambda2.basis) < 1e-15);
    CHECK(norm(back.v - t.v) < 1e-15);

    // composition law deform(e) o deform(e') = deform(e + e' + e e')
    for (double e1 : {-0.1, -0.05, 0.1, 0.4})
        for (double e2 : {-0.15, 0.0, 0.25}) {
            SplittingTriple<double> c = deform_area(deform_area(t, e2), e1);
            SplittingTriple<double> d = deform_area(t, e1 + e2 + e1 * e2);
            CHECK(max_abs_entry(c.lambda1.basis - d.lambda1.basis) < 1e-12);
            CHECK(max_abs_entry(c.lambda2.basis - d.lambda2.basis) < 1e-12);
        }
    CHECK_THROWS_AS(deform_area(t, 1.0), DomainError);
    // shrinking L1 below |v| makes the slit hit L1
    CHECK_THROWS_WITH_AS(deform_area(t, -0.3), doctest::Contains("extra points"), DomainError);

    // double-size triple: scaled back by 1/sqrt 2 per factor
    SplittingTriple<double> dbl{Lattice(std::sqrt(2.0) * t.lambda1.basis), Lattice(std::sqrt(2.0) * t.lambda2.basis),
                                std::sqrt(2.0) * t.v};
    CHECK(total_area(dbl) == doctest::Approx(2.0));
    CHECK(max_abs_entry(normalize_area(dbl).lambda1.basis - t.lambda1.basis) < 1e-15);
    CHECK(max_abs_entry(normalize_area(t).lambda1.basis - t.lambda1.basis) < 1e-15);
    // exact normalisation needs sqrt(total area) in the field (here sqrt 5 against sqrt 3 entries)
    Q s3 = Q::sqrt_of(3);
    SplittingTriple<Q> odd{qbasis(s3, q(0), q(0), s3), qbasis(q(1), q(0), q(0), q(2)), {q(1), q(0)}};
    CHECK_THROWS_AS(normalize_area(odd), DomainError);
}

#include "h2lab/criterion.hpp"

#include "json.hpp"

#include <stdexcept>

namespace h2lab {

namespace {

using Q = QuadNum;

// A nonzero vector (x, y) with rational slope, written as c (x, y) = (a, b)
// with c > 0 and (a, b) coprime integers.
struct IntegralDirection {
    long long a = 0, b = 0;
    Q c;
};

bool fits(const BigInt& z, long long bound) { return abs(z) <= BigInt(static_cast<long>(bound)); }

std::optional<IntegralDirection> integral_direction(const Q& x, const Q& y, long long bound) {
    IntegralDirection d;
    if (y.is_zero()) {
        if (x.is_zero()) throw DomainError("integral_direction: zero vector");
        d.a = x.sign();
        d.b = 0;
        d.c = Q(d.a) / x;
        return d;
    }
    Q slope = x / y;
    if (!slope.is_rational()) return std::nullopt;
    const Rational& ratio = slope.a();  // x / y = num / den, den > 0
    BigInt num = ratio.num(), den = ratio.den();
    if (!fits(num, bound) || !fits(den, bound)) return std::nullopt;
    int sg = y.sign();
    d.a = sg * num.get_si();
    d.b = sg * den.get_si();
    d.c = Q(d.b) / y;
    return d;
}

// (x, y) with a y - b x = 1 for coprime (a, b).
std::pair<long long, long long> complement(long long a, long long b) {
    BigInt g, s, t;
    mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), BigInt(static_cast<long>(a)).get_mpz_t(),
               BigInt(static_cast<long>(b)).get_mpz_t());
    // s a + t b = g = +-1  ->  a (s g) - b (-t g) = 1
    if (abs(g) != 1) throw DomainError("complement: coordinates are not coprime");
    long long sg = g.get_si();
    return {-t.get_si() * sg, s.get_si() * sg};
}

// Shortens q along p by the nearest integer multiple.
Vec2<Q> shorten(const Vec2<Q>& q, const Vec2<Q>& p) {
    BigInt k = (dot(q, p) / dot(p, p)).round();
    return q - Q(Rational(k)) * p;
}

std::optional<Rational> rational_of(const Q& x) {
    if (!x.is_rational()) return std::nullopt;
    return x.a();
}

std::optional<Rational> rational_sqrt(const Rational& x) {
    if (x.sign() < 0) return std::nullopt;
    BigInt n = x.num(), d = x.den();
    if (!is_perfect_square(n) || !is_perfect_square(d)) return std::nullopt;
    return Rational(isqrt(n), isqrt(d));
}

RMat to_rational(const QMat& m) {
    auto ra = rational_of(m.a), rb = rational_of(m.b), rc = rational_of(m.c), rd = rational_of(m.d);
    if (!ra || !rb || !rc || !rd) throw DomainError("certificate matrix has irrational entries");
    return {*ra, *rb, *rc, *rd};
}

bool is_integral(const RMat& m) {
    return m.a.is_integer() && m.b.is_integer() && m.c.is_integer() && m.d.is_integer();
}

QMat to_quad(const RMat& m) { return {Q(m.a), Q(m.b), Q(m.c), Q(m.d)}; }

Presentation with_w(const Presentation& p, const Vec2<Q>& w) {
    Presentation out = p;
    out.w = w;
    out.lambda2 = LatticeBasis<Q>::from_vectors(p.v_star, w);
    return out;
}

Certificate make_certificate(const QMat& M, const LatticeBasis<Q>& source, const LatticeBasis<Q>& target) {
    Certificate c;
    RMat Mr = to_rational(M);
    c.tau = clearing_scalar(Mr);
    c.matrix = Mat2<Rational>{c.tau * Mr.a, c.tau * Mr.b, c.tau * Mr.c, c.tau * Mr.d};
    c.bases = {source, target};
    // tau * source == target * (tau M), checked exactly
    if (!is_integral(c.matrix) || !(Q(c.tau) * source.basis == target.basis * to_quad(c.matrix)))
        throw std::logic_error("isogeny certificate failed its exact check");
    return c;
}

}  // namespace

Rational clearing_scalar(const RMat& m) {
    BigInt g = 0, l = 1;
    for (const Rational* x : {&m.a, &m.b, &m.c, &m.d}) {
        if (x->is_zero()) continue;
        BigInt n = abs(x->num());
        g = gcd(g, n);
        l = lcm(l, x->den());
    }
    if (g == 0) throw DomainError("clearing_scalar: zero matrix");
    return Rational(l, g);
}

std::optional<Rational> isogeny_scalar(const LatticeBasis<Q>& L1, const LatticeBasis<Q>& L2, long long bound) {
    QMat M = L2.basis.inverse() * L1.basis;
    auto ra = rational_of(M.a), rb = rational_of(M.b), rc = rational_of(M.c), rd = rational_of(M.d);
    if (!ra || !rb || !rc || !rd) return std::nullopt;
    Rational tau = clearing_scalar({*ra, *rb, *rc, *rd});
    if (!fits(tau.num(), bound) || !fits(tau.den(), bound)) return std::nullopt;
    return tau;
}

std::optional<Presentation> present(const LatticePair<Q>& pair, const Vec2<Q>& v_star) {
    const LatticeBasis<Q>& L1 = pair.first;
    const LatticeBasis<Q>& L2 = pair.second;
    Vec2<Q> c2 = L2.coords(v_star);
    auto x2 = rational_of(c2.x), y2 = rational_of(c2.y);
    if (!x2 || !y2 || !x2->is_integer() || !y2->is_integer() || gcd(x2->num(), y2->num()) != 1)
        throw DomainError("v* is not a primitive vector of the second lattice");
    Presentation p;
    p.v_star = v_star;
    auto [wx, wy] = complement(x2->num().get_si(), y2->num().get_si());
    Vec2<Q> w = Q(wx) * L2.gen(0) + Q(wy) * L2.gen(1);
    if (cross(v_star, w).sign() < 0) w = -w;
    p.w = shorten(w, v_star);

    auto dir = integral_direction(L1.coords(v_star).x, L1.coords(v_star).y, kDefaultSearchBound);
    if (!dir) return std::nullopt;
    p.r = dir->c;
    Vec2<Q> rv = p.r * v_star;
    auto [vx, vy] = complement(dir->a, dir->b);
    Vec2<Q> v = Q(vx) * L1.gen(0) + Q(vy) * L1.gen(1);
    if (cross(rv, v).sign() < 0) v = -v;
    p.v = shorten(v, rv);
    p.lambda1 = LatticeBasis<Q>::from_vectors(rv, p.v);
    p.lambda2 = LatticeBasis<Q>::from_vectors(v_star, p.w);
    return p;
}

std::optional<Presentation> present(const LatticePair<Q>& pair) { return present(pair, pair.second.gen(0)); }

RelationResult solve_relations(const Presentation& pres, long long search_bound) {
    RelationResult out;
    RelationData& d = out.data;
    d.pres = pres;
    d.r = pres.r;
    Vec2<Q> cw = pres.lambda1.coords(pres.w);
    auto dw = integral_direction(cw.x, cw.y, search_bound);
    if (!dw) {
        out.reason = "not a closed-orbit presentation: no multiple of w lies in the first lattice within the search bound";
        return out;
    }
    d.m = dw->a;
    d.n = dw->b;
    d.t = dw->c;
    Vec2<Q> cv = pres.lambda2.coords(pres.v);
    auto dv = integral_direction(cv.x, cv.y, search_bound);
    if (!dv) {
        out.reason = "not a closed-orbit presentation: no multiple of v lies in the second lattice within the search bound";
        return out;
    }
    d.i = dv->a;
    d.j = dv->b;
    d.s = dv->c;
    d.area_ratio = pres.lambda1.area() / pres.lambda2.area();
    auto rp = rational_of(d.r * d.r / d.area_ratio);
    auto sp = rational_of(d.s * d.s * d.area_ratio);
    auto tp = rational_of(d.t * d.t / d.area_ratio);
    if (!rp || !sp || !tp) {
        out.reason = "not a closed-orbit presentation: r'^2, s'^2 or t'^2 is irrational";
        return out;
    }
    d.r_prime_sq = *rp;
    d.s_prime_sq = *sp;
    d.t_prime_sq = *tp;
    if (!fits(rp->num(), search_bound) || !fits(rp->den(), search_bound)) {
        out.reason = "r'^2 exceeds the search bound";
        return out;
    }
    BigInt k = squarefree_part(BigInt(rp->num() * rp->den())).first;
    d.k = k.get_si();
    out.solved = true;
    return out;
}

RelationResult solve_relations(const LatticePair<Q>& pair, long long search_bound) {
    auto pres = present(pair);
    if (!pres) {
        RelationResult out;
        out.reason = "not a closed-orbit presentation: no multiple of v* lies in the first lattice";
        return out;
    }
    return solve_relations(*pres, search_bound);
}

bool RelationResiduals::all_zero() const {
    return tw.x.is_zero() && tw.y.is_zero() && sv.x.is_zero() && sv.y.is_zero() && s_area.is_zero() &&
           n_area.is_zero();
}

RelationResiduals relation_residuals(const RelationData& d) {
    const Presentation& p = d.pres;
    RelationResiduals res;
    res.tw = d.t * p.w - (Q(d.m) * d.r * p.v_star + Q(d.n) * p.v);
    res.sv = d.s * p.v - (Q(d.i) * p.v_star + Q(d.j) * p.w);
    res.s_area = d.s * d.area_ratio - Q(d.j) * d.r;
    res.n_area = Q(d.n) * d.area_ratio - d.r * d.t;
    return res;
}

LatticePair<Q> mixed_splitting(const RelationData& d) {
    const Presentation& p = d.pres;
    Vec2<Q> a1 = d.r * p.v_star + p.w, a2 = p.v_star + p.v;
    if (cross(a2, p.w).is_zero()) throw DomainError("factor mix degenerate: w is parallel to v* + v");
    if (cross(a1, p.v).is_zero()) throw DomainError("factor mix degenerate: r v* + w is parallel to v");
    return {LatticeBasis<Q>::from_vectors(a1, p.v), LatticeBasis<Q>::from_vectors(a2, p.w)};
}

QMat isogeny_matrix(const RelationData& d) {
    return {d.r, Q(d.i) / d.s, Q(0), Q(d.j) / d.s};
}

QMat mixed_isogeny_matrix(const RelationData& d) {
    Q si = d.s + Q(d.i);
    Q mrn = Q(d.m) * d.r - Q(d.n);
    if (si.is_zero() || mrn.is_zero()) throw DomainError("factor mix degenerate: vanishing denominator");
    return {d.r * d.s / si, Q(d.m) * d.r / mrn, Q(1) - d.r * Q(d.j) / si, -d.t / mrn};
}

CriterionResult teichmuller_criterion(const LatticePair<Q>& pair, double eta0, long long search_bound) {
    CriterionResult out;
    out.certified_pair = pair;
    RelationResult rel = solve_relations(pair, search_bound);
    if (!rel.solved) {
        out.reason = rel.reason;
        return out;
    }
    out.k = rel.data.k;
    if (!rel.data.r.is_rational()) {
        bool equal_areas = pair.first.area() == pair.second.area();
        if (!(eta0 > 0) || !equal_areas) {
            out.reason = "sqrt(A1/A2) sqrt(k) is irrational";
            if (eta0 > 0) out.reason += " and the areas differ, so no area deformation applies";
            return out;
        }
        AreaAdjustment adj = rational_area_adjust(rel.data.k, eta0);
        Q scale = rel.data.k == 1 ? Q(Rational(adj.p, adj.q)) : Q(Rational(0), Rational(adj.p, adj.q), rel.data.k);
        try {
            LatticePair<Q> deformed{LatticeBasis<Q>(scale * pair.first.basis), pair.second};
            rel = solve_relations(deformed, search_bound);
            out.certified_pair = deformed;
        } catch (const DomainError& e) {
            out.reason = std::string("area deformation leaves the coefficient field: ") + e.what();
            return out;
        }
        out.epsilon = adj.epsilon;
        if (!rel.solved || !rel.data.r.is_rational()) {
            out.reason = rel.solved ? "deformed pair still has irrational r" : rel.reason;
            return out;
        }
    }
    // Both algebraic sums must be isogenous.  The complement w is only
    // defined up to multiples of v*; try small shifts if the mix degenerates.
    std::string mix_error;
    for (int shift : {0, 1, -1, 2, -2}) {
        Presentation pres = with_w(rel.data.pres, rel.data.pres.w + Q(shift) * rel.data.pres.v_star);
        RelationResult attempt = shift == 0 ? rel : solve_relations(pres, search_bound);
        if (!attempt.solved) continue;
        const RelationData& d = attempt.data;
        try {
            LatticePair<Q> mix = mixed_splitting(d);
            Certificate c1 = make_certificate(isogeny_matrix(d), d.pres.lambda1, d.pres.lambda2);
            Certificate c2 = make_certificate(mixed_isogeny_matrix(d), mix.first, mix.second);
            out.first = c1;
            out.second = c2;
            out.relations = d;
            break;
        } catch (const DomainError& e) {
            mix_error = e.what();
        }
    }
    if (!out.relations) {
        out.reason = "no non-degenerate factor mix: " + mix_error;
        return out;
    }
    const RelationData& d = *out.relations;
    // sqrt(A1/A2) = (p/q) sqrt k  <=>  p/q = sqrt(k A1/A2) / k
    auto hk = rational_sqrt(*rational_of(Q(d.k) * d.area_ratio));
    if (!hk) throw std::logic_error("rational r but irrational sqrt(k A1/A2)");
    Rational pq = *hk / Rational(d.k);
    out.p = pq.num().get_si();
    out.q = pq.den().get_si();
    out.d_bound_branch = d.area_ratio == Q(1) ? "D=4m" : "square";
    out.verdict = Verdict::Curve;
    out.reason = "two isogenous algebraic sums";
    return out;
}

std::string criterion_json(const CriterionResult& r) {
    nlohmann::ordered_json j;
    j["verdict"] = r.verdict == Verdict::Curve ? "curve" : "undetermined";
    j["k"] = r.k;
    j["p"] = r.p;
    j["q"] = r.q;
    j["epsilon"] = r.epsilon;
    j["tau1"] = r.first ? r.first->tau.str() : "";
    j["tau2"] = r.second ? r.second->tau.str() : "";
    j["D_bound_branch"] = r.d_bound_branch;
    j["reason"] = r.reason;
    return j.dump();
}

LatticePair<Q> lshape_pair(long long d) {
    if (d < 4 || d % 2 != 0) throw DomainError("L-shape presentation needs even d >= 4");
    Q h(d / 2), one(1), z(0);
    return {LatticeBasis<Q>(QMat{h, z, z, one}), LatticeBasis<Q>(QMat{one, z, z, h})};
}

}  // namespace h2lab

#include "h2lab/splitting.hpp"

#include <cmath>
#include <sstream>

namespace h2lab {

namespace {

template <class T> std::vector<Vec2<T>> points_along(const LatticeBasis<T>& L, long long p, long long q,
                                                     long long count, int sgn) {
    std::vector<Vec2<T>> pts;
    Vec2<T> step = L.basis * Vec2<T>{scalar::from_int<T>(sgn * p), scalar::from_int<T>(sgn * q)};
    Vec2<T> cur{T(0), T(0)};
    for (long long n = 0; n <= count; ++n) {
        pts.push_back(cur);
        cur = cur + step;
    }
    return pts;
}

SegmentPoints<QuadNum> exact_points(const LatticeBasis<QuadNum>& L, const Vec2<QuadNum>& v) {
    SegmentPoints<QuadNum> out;
    Vec2<QuadNum> w = L.coords(v);
    long long p, q;
    QuadNum mu;
    if (w.y.is_zero()) {
        p = 1, q = 0, mu = w.x;
    } else if (w.x.is_zero()) {
        p = 0, q = 1, mu = w.y;
    } else {
        QuadNum ratio = w.x / w.y;
        if (!ratio.is_rational()) {
            out.points.push_back({QuadNum(0), QuadNum(0)});
            return out;
        }
        const Rational& r = ratio.a();
        if (!r.num().fits_slong_p() || !r.den().fits_slong_p())
            throw DomainError("segment direction too large for lattice-point enumeration");
        p = r.num().get_si();
        q = r.den().get_si();
        mu = w.y / QuadNum(q);
    }
    int sgn = mu.sign();
    QuadNum amu = mu.abs();
    BigInt cnt = amu.floor();
    if (!cnt.fits_slong_p() || cnt > 10000000) throw DomainError("too many lattice points on segment");
    out.points = points_along(L, p, q, cnt.get_si(), sgn);
    out.contains_v = amu.is_rational() && amu.a().is_integer();
    return out;
}

SegmentPoints<double> float_points(const LatticeBasis<double>& L, const Vec2d& v,
                                   std::vector<std::string>* warnings) {
    SegmentPoints<double> out;
    Vec2d w = L.coords(v);
    bool x_dom = std::fabs(w.x) >= std::fabs(w.y);
    double dom = x_dom ? w.x : w.y, oth = x_dom ? w.y : w.x;
    double adom = std::fabs(dom);
    if (adom > 1e7) throw DomainError("too many lattice points on segment");
    long long last = static_cast<long long>(std::floor(adom + kFloatTol));
    for (long long n = 0; n <= last; ++n) {
        double s = n / adom;
        double o = s * oth;
        double dist = std::fabs(o - std::round(o));
        if (dist <= kFloatTol) {
            double cx = x_dom ? std::copysign(double(n), dom) : std::round(o);
            double cy = x_dom ? std::round(o) : std::copysign(double(n), dom);
            out.points.push_back(L.basis * Vec2d{cx, cy});
            if (n == last && std::fabs(adom - double(last)) <= kFloatTol) out.contains_v = true;
        } else if (dist < 1e-6 && warnings) {
            std::ostringstream os;
            os << "near-degenerate: lattice point within " << dist << " of the slit line at step " << n;
            warnings->push_back(os.str());
        }
    }
    double frac = std::fabs(adom - std::round(adom));
    if (warnings && frac > kFloatTol && frac < 1e-6) {
        std::ostringstream os;
        os << "near-degenerate: slit length within " << frac << " of a lattice step";
        warnings->push_back(os.str());
    }
    return out;
}

}  // namespace

template <class T>
SegmentPoints<T> segment_lattice_points(const LatticeBasis<T>& L, const Vec2<T>& v,
                                        std::vector<std::string>* warnings) {
    if constexpr (std::is_same_v<T, double>) return float_points(L, v, warnings);
    else {
        (void)warnings;
        return exact_points(L, v);
    }
}

template <class T>
ValidationReport validate_splitting(const SplittingTriple<T>& t) {
    if (scalar::sign(t.v.x) == 0 && scalar::sign(t.v.y) == 0) throw DomainError("slit vector v = 0");
    ValidationReport rep;
    SegmentPoints<T> p1 = segment_lattice_points(t.lambda1, t.v, &rep.warnings);
    SegmentPoints<T> p2 = segment_lattice_points(t.lambda2, t.v, &rep.warnings);
    auto only_origin = [](const SegmentPoints<T>& s) { return s.points.size() == 1; };
    auto endpoints = [](const SegmentPoints<T>& s) { return s.points.size() == 2 && s.contains_v; };
    if (only_origin(p1) && endpoints(p2)) {
        rep.valid = true;
        rep.primitive_in = PrimitiveIn::Second;
        return rep;
    }
    if (only_origin(p2) && endpoints(p1)) {
        rep.valid = true;
        rep.primitive_in = PrimitiveIn::First;
        return rep;
    }
    auto add_witness = [&](const SegmentPoints<T>& s) {
        for (size_t i = 1; i < s.points.size(); ++i) rep.witness.push_back(to_double(s.points[i]));
    };
    if (!p1.contains_v && !p2.contains_v) {
        rep.reason = "v lies in neither lattice";
    } else {
        rep.reason = "slit meets a lattice at extra points";
    }
    add_witness(p1);
    add_witness(p2);
    return rep;
}

template SegmentPoints<double> segment_lattice_points(const LatticeBasis<double>&, const Vec2d&,
                                                      std::vector<std::string>*);
template SegmentPoints<QuadNum> segment_lattice_points(const LatticeBasis<QuadNum>&, const Vec2<QuadNum>&,
                                                       std::vector<std::string>*);
template ValidationReport validate_splitting(const SplittingTriple<double>&);
template ValidationReport validate_splitting(const SplittingTriple<QuadNum>&);

SplittingTriple<double> deform_area(const SplittingTriple<double>& t, double eps) {
    if (!(std::fabs(eps) < 1)) throw DomainError("deform_area requires |eps| < 1");
    double up = std::sqrt(1 + eps), down = 1 / up;
    SplittingTriple<double> out{Lattice(up * t.lambda1.basis), Lattice(down * t.lambda2.basis), down * t.v,
                                t.primitive_in};
    ValidationReport rep = validate_splitting(out);
    if (!rep.valid) {
        std::ostringstream os;
        os << "deformed splitting invalid: " << rep.reason;
        for (const Vec2d& w : rep.witness) os << " (" << w.x << "," << w.y << ")";
        throw DomainError(os.str());
    }
    out.primitive_in = rep.primitive_in;
    return out;
}

template <class T>
SplittingTriple<T> normalize_area(const SplittingTriple<T>& t) {
    T A = total_area(t);
    T s;
    if constexpr (std::is_same_v<T, double>) {
        s = 1 / std::sqrt(A);
    } else {
        std::optional<QuadNum> r = quad_sqrt(A);
        if (!r) throw DomainError("square root of total area " + A.str() + " is not in the field");
        s = r->inverse();
    }
    return {LatticeBasis<T>(s * t.lambda1.basis), LatticeBasis<T>(s * t.lambda2.basis), s * t.v, t.primitive_in};
}

template SplittingTriple<double> normalize_area(const SplittingTriple<double>&);
template SplittingTriple<QuadNum> normalize_area(const SplittingTriple<QuadNum>&);

}  // namespace h2lab

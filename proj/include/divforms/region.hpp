#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "forms.hpp"
#include "rational.hpp"

namespace divforms {

struct QPoint {
    Rational x, y;
};

struct LPoint {
    long double x, y;
};

// a*x1 + b*x2 <= c in unit coordinates, or < c when strict
struct HalfPlane {
    i64 a = 0, b = 0, c = 0;
    bool strict = false;
};

// a*x1 + b*x2 <= c in absolute (dilated) coordinates; strictness already
// folded into c since the left side is an integer on lattice points
struct AbsHalfPlane {
    i64 a = 0, b = 0;
    i128 c = 0;
};

struct ConvexPiece {
    std::vector<QPoint> vertices;  // counter-clockwise
    std::vector<bool> open_edge;   // edge i runs from vertex i to vertex i+1
    std::vector<HalfPlane> sides;
    Rational area;
};

// a perimeter may exceed r_inf by at most this factor; a square centred
// at the origin has perimeter exactly 8 r_inf
inline constexpr long double kBoundaryFactor = 8.0L;

inline Rational cross(const QPoint& o, const QPoint& p, const QPoint& q) {
    return (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x);
}

inline HalfPlane side_through(const QPoint& p, const QPoint& q, bool strict) {
    // interior to the left of p->q:  (qy-py) x1 - (qx-px) x2 <= (qy-py) px - (qx-px) py
    Rational a = q.y - p.y;
    Rational b = -(q.x - p.x);
    Rational c = a * p.x + b * p.y;
    i64 l = std::lcm(std::lcm(a.den(), b.den()), c.den());
    i64 ia = (a * Rational(l)).num(), ib = (b * Rational(l)).num(), ic = (c * Rational(l)).num();
    i64 g = std::gcd(std::gcd(ia < 0 ? -ia : ia, ib < 0 ? -ib : ib), ic < 0 ? -ic : ic);
    if (g > 1) {
        ia /= g;
        ib /= g;
        ic /= g;
    }
    return {ia, ib, ic, strict};
}

inline std::vector<LPoint> to_ld(const std::vector<QPoint>& v) {
    std::vector<LPoint> out;
    for (auto& p : v) out.push_back({p.x.to_ld(), p.y.to_ld()});
    return out;
}

// keep the part of a convex polygon with a*x + b*y <= c
inline std::vector<LPoint> clip(const std::vector<LPoint>& poly, long double a, long double b, long double c) {
    std::vector<LPoint> out;
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const LPoint& p = poly[i];
        const LPoint& q = poly[(i + 1) % n];
        long double fp = a * p.x + b * p.y - c, fq = a * q.x + b * q.y - c;
        if (fp <= 0) out.push_back(p);
        if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) {
            long double t = fp / (fp - fq);
            out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
        }
    }
    return out;
}

inline long double area_of(const std::vector<LPoint>& poly) {
    long double s = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const LPoint& p = poly[i];
        const LPoint& q = poly[(i + 1) % poly.size()];
        s += p.x * q.y - p.y * q.x;
    }
    return s / 2;
}

inline ConvexPiece make_piece(std::vector<QPoint> v, std::vector<bool> open) {
    std::size_t n = v.size();
    if (n < 3) throw DomainError("polygon needs at least 3 vertices");
    if (open.empty()) open.assign(n, false);
    if (open.size() != n) throw DomainError("open-edge flags must match the vertex count");
    Rational twice(0);
    for (std::size_t i = 0; i < n; ++i) twice += v[i].x * v[(i + 1) % n].y - v[i].y * v[(i + 1) % n].x;
    if (twice == Rational(0)) throw DomainError("degenerate polygon");
    if (twice < Rational(0)) {
        std::reverse(v.begin(), v.end());
        std::vector<bool> o(n);
        for (std::size_t i = 0; i < n; ++i) o[(2 * n - 2 - i) % n] = open[i];
        open = o;
        twice = -twice;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (cross(v[i], v[(i + 1) % n], v[(i + 2) % n]) <= Rational(0))
            throw DomainError("polygon is not strictly convex at vertex " + std::to_string((i + 1) % n));
    ConvexPiece piece;
    piece.vertices = std::move(v);
    piece.open_edge = std::move(open);
    piece.area = twice / Rational(2);
    for (std::size_t i = 0; i < n; ++i)
        piece.sides.push_back(side_through(piece.vertices[i], piece.vertices[(i + 1) % n], piece.open_edge[i]));
    return piece;
}

struct Region {
    std::string kind;
    std::vector<ConvexPiece> pieces;
    long double volume = 0;
    long double r_inf = 0;
    long double boundary_length = 0;

    // rect sides may be opened by name: "left", "right", "bottom", "top"
    static Region rect(Rational x0, Rational x1, Rational y0, Rational y1, const std::vector<std::string>& open = {}) {
        if (!(x0 < x1) || !(y0 < y1)) throw DomainError("rect needs x0 < x1 and y0 < y1");
        std::vector<bool> o(4, false);
        for (auto& s : open) {
            if (s == "bottom") o[0] = true;
            else if (s == "right") o[1] = true;
            else if (s == "top") o[2] = true;
            else if (s == "left") o[3] = true;
            else throw DomainError("unknown rect side '" + s + "'");
        }
        return finish("rect", {make_piece({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, o)});
    }

    static Region triangle(QPoint a, QPoint b, QPoint c, std::vector<bool> open = {}) {
        return finish("triangle", {make_piece({a, b, c}, std::move(open))});
    }

    static Region polygon(std::vector<QPoint> v, std::vector<bool> open = {}) {
        return finish("polygon", {make_piece(std::move(v), std::move(open))});
    }

    static Region union_of(const std::vector<Region>& parts) {
        std::vector<ConvexPiece> pieces;
        for (auto& r : parts) pieces.insert(pieces.end(), r.pieces.begin(), r.pieces.end());
        if (pieces.size() > 4) throw DomainError("a union may have at most 4 convex pieces");
        return finish("union", std::move(pieces));
    }

    // unit square (0,1]^2: the summation box of T(X) after dilation
    static Region positive_unit_square() { return rect(0, 1, 0, 1, {"left", "bottom"}); }

    std::vector<std::vector<LPoint>> ld_pieces() const {
        std::vector<std::vector<LPoint>> out;
        for (auto& p : pieces) out.push_back(to_ld(p.vertices));
        return out;
    }

    std::vector<AbsHalfPlane> absolute_sides(std::size_t piece, i64 X) const {
        std::vector<AbsHalfPlane> out;
        for (auto& s : pieces[piece].sides)
            out.push_back({s.a, s.b, checked_mul(s.c, X, "dilated side") - (s.strict ? 1 : 0)});
        return out;
    }

private:
    static Region finish(std::string kind, std::vector<ConvexPiece> pieces) {
        Region r;
        r.kind = std::move(kind);
        r.pieces = std::move(pieces);
        for (auto& p : r.pieces) {
            r.volume += p.area.to_ld();
            for (auto& v : p.vertices) r.r_inf = std::max({r.r_inf, std::fabs(v.x.to_ld()), std::fabs(v.y.to_ld())});
            std::size_t n = p.vertices.size();
            for (std::size_t i = 0; i < n; ++i) {
                long double dx = (p.vertices[(i + 1) % n].x - p.vertices[i].x).to_ld();
                long double dy = (p.vertices[(i + 1) % n].y - p.vertices[i].y).to_ld();
                r.boundary_length += std::sqrt(dx * dx + dy * dy);
            }
        }
        auto ld = r.ld_pieces();
        for (std::size_t i = 0; i < r.pieces.size(); ++i)
            for (std::size_t j = i + 1; j < r.pieces.size(); ++j) {
                std::vector<LPoint> inter = ld[i];
                for (auto& s : r.pieces[j].sides) inter = clip(inter, s.a, s.b, s.c);
                long double a = inter.size() >= 3 ? area_of(inter) : 0;
                if (a > 1e-12L * std::min(r.pieces[i].area.to_ld(), r.pieces[j].area.to_ld()))
                    throw DomainError("union pieces " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
                r.boundary_length -= 2 * shared_edge_length(r.pieces[i], r.pieces[j]);
            }
        if (r.boundary_length > kBoundaryFactor * r.r_inf * (1 + 1e-15L))
            throw DomainError("region boundary length " + std::to_string(double(r.boundary_length)) +
                              " exceeds the allowed " + std::to_string(double(kBoundaryFactor)) + " * r_inf");
        return r;
    }

    static long double shared_edge_length(const ConvexPiece& A, const ConvexPiece& B) {
        long double total = 0;
        std::size_t na = A.vertices.size(), nb = B.vertices.size();
        for (std::size_t i = 0; i < na; ++i)
            for (std::size_t j = 0; j < nb; ++j) {
                const QPoint &p = A.vertices[i], &q = A.vertices[(i + 1) % na];
                const QPoint &r = B.vertices[j], &s = B.vertices[(j + 1) % nb];
                if (cross(p, q, r) != Rational(0) || cross(p, q, s) != Rational(0)) continue;
                long double dx = (q.x - p.x).to_ld(), dy = (q.y - p.y).to_ld();
                long double len2 = dx * dx + dy * dy;
                auto t = [&](const QPoint& w) { return ((w.x - p.x).to_ld() * dx + (w.y - p.y).to_ld() * dy) / len2; };
                long double lo = std::max(0.0L, std::min(t(r), t(s))), hi = std::min(1.0L, std::max(t(r), t(s)));
                if (hi > lo) total += (hi - lo) * std::sqrt(len2);
            }
        return total;
    }
};

// sup over the region of max_i L_i(x), attained at a vertex
inline Rational r_prime(const FormTriple& forms, const Region& region) {
    if (region.pieces.empty()) throw DomainError("r_prime: empty region");
    bool first = true;
    Rational best(0);
    for (auto& piece : region.pieces)
        for (auto& v : piece.vertices)
            for (int i = 0; i < 3; ++i) {
                Rational val = Rational(forms[i].a) * v.x + Rational(forms[i].b) * v.y;
                if (first || val > best) best = val;
                first = false;
            }
    return best;
}

// inf over the region of min_i L_i(x); positive means every form is
// positive on the closure
inline Rational min_form_value(const FormTriple& forms, const Region& region) {
    bool first = true;
    Rational best(0);
    for (auto& piece : region.pieces)
        for (auto& v : piece.vertices)
            for (int i = 0; i < 3; ++i) {
                Rational val = Rational(forms[i].a) * v.x + Rational(forms[i].b) * v.y;
                if (first || val < best) best = val;
                first = false;
            }
    return best;
}

}  // namespace divforms

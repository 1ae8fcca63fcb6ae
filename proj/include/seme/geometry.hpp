#ifndef SEME_GEOMETRY_HPP
#define SEME_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace seme {

struct Vec2 {
    double x{0.0};
    double y{0.0};

    friend bool operator==(Vec2 const&, Vec2 const&) = default;
    friend Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
};

struct Vec3 {
    double x{0.0};
    double y{0.0};
    double z{0.0};

    friend bool operator==(Vec3 const&, Vec3 const&) = default;
    friend Vec3 operator+(Vec3 a, Vec3 b) noexcept { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) noexcept { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) noexcept { return {s * a.x, s * a.y, s * a.z}; }

    [[nodiscard]] Vec2 xy() const noexcept { return {x, y}; }
};

inline double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double dot(Vec3 a, Vec3 b) noexcept { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
inline double norm(Vec3 a) noexcept { return std::sqrt(dot(a, a)); }
inline double distance(Vec3 a, Vec3 b) noexcept { return norm(a - b); }

inline Vec3 normalized(Vec3 a) noexcept
{
    double const n = norm(a);
    return n > 0.0 ? (1.0 / n) * a : a;
}

struct Box2 {
    Vec2 lo;
    Vec2 hi;

    [[nodiscard]] bool overlaps_segment_box(Vec2 a, Vec2 b) const noexcept
    {
        return std::max(a.x, b.x) >= lo.x && std::min(a.x, b.x) <= hi.x && std::max(a.y, b.y) >= lo.y
            && std::min(a.y, b.y) <= hi.y;
    }
};

inline Box2 bounding_box(std::span<Vec2 const> pts) noexcept
{
    Box2 box{pts.front(), pts.front()};
    for (auto const& p : pts) {
        box.lo.x = std::min(box.lo.x, p.x);
        box.lo.y = std::min(box.lo.y, p.y);
        box.hi.x = std::max(box.hi.x, p.x);
        box.hi.y = std::max(box.hi.y, p.y);
    }
    return box;
}

/// Even-odd rule; points exactly on an edge may land on either side.
inline bool point_in_polygon(Vec2 p, std::span<Vec2 const> poly) noexcept
{
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        auto const& a = poly[i];
        auto const& b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            double const xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < xc) {
                inside = !inside;
            }
        }
    }
    return inside;
}

namespace detail {
    inline int orientation(Vec2 a, Vec2 b, Vec2 c) noexcept
    {
        double const v = cross(b - a, c - a);
        return (v > 0.0) - (v < 0.0);
    }

    inline bool on_segment(Vec2 a, Vec2 b, Vec2 p) noexcept
    {
        return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y
            && p.y <= std::max(a.y, b.y);
    }
} // namespace detail

/// Closed-segment intersection test, collinear overlaps included.
inline bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) noexcept
{
    using detail::on_segment;
    using detail::orientation;
    int const o1 = orientation(p1, p2, q1);
    int const o2 = orientation(p1, p2, q2);
    int const o3 = orientation(q1, q2, p1);
    int const o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) {
        return true;
    }
    return (o1 == 0 && on_segment(p1, p2, q1)) || (o2 == 0 && on_segment(p1, p2, q2))
        || (o3 == 0 && on_segment(q1, q2, p1)) || (o4 == 0 && on_segment(q1, q2, p2));
}

/// Parameter s in [0,1] along a->b where it crosses segment c->d, if the
/// crossing is proper (non-parallel).
inline std::optional<double> segment_crossing(Vec2 a, Vec2 b, Vec2 c, Vec2 d) noexcept
{
    Vec2 const r = b - a;
    Vec2 const q = d - c;
    double const den = cross(r, q);
    if (den == 0.0) {
        return std::nullopt;
    }
    Vec2 const ac = c - a;
    double const s = cross(ac, q) / den;
    double const u = cross(ac, r) / den;
    if (s < 0.0 || s > 1.0 || u < 0.0 || u > 1.0) {
        return std::nullopt;
    }
    return s;
}

/// True when no two non-adjacent edges touch and no adjacent edges fold back.
inline bool polygon_is_simple(std::span<Vec2 const> poly) noexcept
{
    std::size_t const n = poly.size();
    if (n < 3) {
        return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (poly[i] == poly[(i + 1) % n]) {
            return false;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 const a = poly[i];
        Vec2 const b = poly[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            bool const adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            Vec2 const c = poly[j];
            Vec2 const d = poly[(j + 1) % n];
            if (adjacent) {
                // shared vertex is fine, overlap along a collinear edge is not
                Vec2 const shared = (j == i + 1) ? b : a;
                Vec2 const other_i = (j == i + 1) ? a : b;
                Vec2 const other_j = (j == i + 1) ? d : c;
                if (detail::orientation(other_i, shared, other_j) == 0
                    && dot(other_i - shared, other_j - shared) > 0.0) {
                    return false;
                }
                continue;
            }
            if (segments_intersect(a, b, c, d)) {
                return false;
            }
        }
    }
    return true;
}

inline double polygon_area(std::span<Vec2 const> poly) noexcept
{
    double acc = 0.0;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        acc += cross(poly[j], poly[i]);
    }
    return 0.5 * std::abs(acc);
}

} // namespace seme

#endif // SEME_GEOMETRY_HPP

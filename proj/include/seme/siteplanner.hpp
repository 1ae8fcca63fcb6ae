#ifndef SEME_SITEPLANNER_HPP
#define SEME_SITEPLANNER_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "seme/blindspot.hpp"
#include "seme/chromosome.hpp"
#include "seme/geometry.hpp"
#include "seme/propagation.hpp"
#include "seme/scenario.hpp"
#include "seme/units.hpp"

namespace seme {

/// Free-space distance at which a link budget drops to `p_min_w`.
inline double free_space_range(double lambda, double p_tx_w, double g_tx_lin, double g_rx_lin, double p_min_w) noexcept
{
    return lambda / (4.0 * std::numbers::pi) * std::sqrt(p_tx_w * g_tx_lin * g_rx_lin / p_min_w);
}

/// Longest BTS -> EMS -> RoI path that still delivers P_th to an isotropic
/// receiver, using the strongest sector.
inline double max_single_hop_range(Scenario const& scn, double pth_dbm)
{
    return free_space_range(wavelength(scn), max_tx_power_w(scn), db_to_linear(max_sector_gain_dbi(scn)), 1.0,
                            dbm_to_watts(pth_dbm));
}

/// Points whose summed distance to two foci is at most `range` (a prolate
/// spheroid). Membership is tested in the canonical frame of the spheroid.
class EllipseRegion {
public:
    EllipseRegion(Vec3 focus_a, Vec3 focus_b, double range) : fa_(focus_a), fb_(focus_b), range_(range)
    {
        center_ = 0.5 * (focus_a + focus_b);
        Vec3 const axis = focus_b - focus_a;
        double const focal = 0.5 * norm(axis);
        axis_ = focal > 0.0 ? normalized(axis) : Vec3{1.0, 0.0, 0.0};
        a2_ = 0.25 * range * range;
        b2_ = a2_ - focal * focal;
    }

    [[nodiscard]] bool contains(Vec3 p) const noexcept
    {
        if (range_ < 0.0 || b2_ < 0.0) {
            return false;
        }
        Vec3 const d = p - center_;
        double const along = dot(d, axis_);
        Vec3 const perp_v = d - along * axis_;
        double const perp2 = dot(perp_v, perp_v);
        if (b2_ == 0.0) {
            return perp2 == 0.0 && along * along <= a2_;
        }
        return along * along * b2_ + perp2 * a2_ <= a2_ * b2_;
    }

    [[nodiscard]] Vec3 focus_a() const noexcept { return fa_; }
    [[nodiscard]] Vec3 focus_b() const noexcept { return fb_; }
    [[nodiscard]] double range() const noexcept { return range_; }

private:
    Vec3 fa_, fb_, center_{}, axis_{};
    double range_;
    double a2_{0.0};
    double b2_{0.0};
};

/// Intersection of the BTS visibility ball and the RoI reach ball.
struct AseRegion {
    Vec3 bts_center;
    double bts_radius{0.0};
    Vec3 roi_center;
    double roi_radius{0.0};

    [[nodiscard]] bool contains(Vec3 p) const noexcept
    {
        auto const a = p - bts_center;
        auto const b = p - roi_center;
        return dot(a, a) <= bts_radius * bts_radius && dot(b, b) <= roi_radius * roi_radius;
    }
};

/// RoI barycenter lifted to receiver height.
inline Vec3 roi_point(Vec2 barycenter, GridSpec const& grid) noexcept { return {barycenter.x, barycenter.y, grid.height}; }

/// Pointing targets per instant; absent instants fall back to the average.
inline std::vector<Vec3> roi_targets(Roi const& roi, GridSpec const& grid)
{
    std::vector<Vec3> out;
    for (auto const& b : roi.barycenters) {
        out.push_back(roi_point(b.value_or(roi.avg_barycenter), grid));
    }
    return out;
}

inline EllipseRegion ems_region(Scenario const& scn, Roi const& roi, double pth_dbm)
{
    return {scn.bts.position, roi_point(roi.avg_barycenter, scn.grid), max_single_hop_range(scn, pth_dbm)};
}

inline AseRegion ase_region(Scenario const& scn, Roi const& roi, SeeType const& kind, double pth_dbm)
{
    if (is_passive(kind.kind)) {
        throw std::invalid_argument("ase_region: " + std::string(to_string(kind.kind)) + " is a passive kind");
    }
    double const lambda = wavelength(scn);
    double const g_ase = db_to_linear(*kind.gain_dbi);
    AseRegion r;
    r.bts_center = scn.bts.position;
    r.bts_radius = free_space_range(lambda, max_tx_power_w(scn), db_to_linear(max_sector_gain_dbi(scn)), g_ase,
                                    dbm_to_watts(*kind.sensitivity_dbm));
    r.roi_center = roi_point(roi.avg_barycenter, scn.grid);
    r.roi_radius = free_space_range(lambda, dbm_to_watts(*kind.tx_power_dbm), 1.0, g_ase, dbm_to_watts(pth_dbm));
    return r;
}

/// BTS power an active entity collects at `point` through its array.
inline double ase_incident_power_dbm(Scenario const& scn, SeeType const& kind, Vec3 point, std::size_t t)
{
    return bts_power_dbm_at(scn, point, t) + kind.gain_dbi.value_or(0.0);
}

// ---------------------------------------------------------------------------
// verdicts

enum class Exclusion : std::uint8_t {
    NotAdmissible, // site mount/admissible kinds exclude the whole class
    OutsideRegion,
    UnfeasibleIncidentAngle,
    UnfeasibleReflectionAngle,
    LowIncidencePower,
    BelowSensitivity,
};

inline constexpr std::string_view to_string(Exclusion e) noexcept
{
    switch (e) {
    case Exclusion::NotAdmissible: return "not_admissible";
    case Exclusion::OutsideRegion: return "outside_region";
    case Exclusion::UnfeasibleIncidentAngle: return "unfeasible_incident_angle";
    case Exclusion::UnfeasibleReflectionAngle: return "unfeasible_reflection_angle";
    case Exclusion::LowIncidencePower: return "low_incidence_power";
    case Exclusion::BelowSensitivity: return "below_sensitivity";
    }
    return "?";
}

struct Verdict {
    std::optional<Exclusion> reason; // empty = feasible

    [[nodiscard]] bool feasible() const noexcept { return !reason; }
    friend bool operator==(Verdict const&, Verdict const&) = default;
};

/// Angle (deg) between a unit normal and the direction from `from` to `to`.
inline double angle_to_normal_deg(Vec3 normal, Vec3 from, Vec3 to) noexcept
{
    auto const d = normalized(to - from);
    return rad_to_deg(std::acos(std::clamp(dot(normal, d), -1.0, 1.0)));
}

/// Rules applied inside the EMS region, in fixed order: incident angle,
/// reflection angle, incident power at every instant.
inline Verdict ems_exclusion(Scenario const& scn, CandidateSite const& site, Roi const& roi, double pth_dbm)
{
    if (!site.normal) {
        throw std::invalid_argument("ems_exclusion: site has no facade normal");
    }
    auto const n = *site.normal;
    auto const src = radiating_point(site);
    if (dot(n, scn.bts.position - site.position) <= 0.0
        || angle_to_normal_deg(n, site.position, scn.bts.position) >= 90.0) {
        return {Exclusion::UnfeasibleIncidentAngle};
    }
    auto const target = roi_point(roi.avg_barycenter, scn.grid);
    if (dot(n, target - site.position) <= 0.0 || angle_to_normal_deg(n, site.position, target) >= 90.0) {
        return {Exclusion::UnfeasibleReflectionAngle};
    }
    for (std::size_t t = 0; t < scn.instants(); ++t) {
        if (bts_power_dbm_at(scn, src, t) < pth_dbm) {
            return {Exclusion::LowIncidencePower};
        }
    }
    return {};
}

inline Verdict ems_verdict(Scenario const& scn, CandidateSite const& site, Roi const& roi, double pth_dbm)
{
    if (!ems_region(scn, roi, pth_dbm).contains(site.position)) {
        return {Exclusion::OutsideRegion};
    }
    if (site.normal) {
        return ems_exclusion(scn, site, roi, pth_dbm);
    }
    CandidateSite oriented = site;
    oriented.normal = panel_normal(site, scn.bts.position, roi_point(roi.avg_barycenter, scn.grid));
    return ems_exclusion(scn, oriented, roi, pth_dbm);
}

inline Verdict ase_verdict(Scenario const& scn, CandidateSite const& site, Roi const& roi, SeeType const& kind,
                           double pth_dbm)
{
    if (!ase_region(scn, roi, kind, pth_dbm).contains(site.position)) {
        return {Exclusion::OutsideRegion};
    }
    for (std::size_t t = 0; t < scn.instants(); ++t) {
        if (ase_incident_power_dbm(scn, kind, site.position, t) < *kind.sensitivity_dbm) {
            return {Exclusion::BelowSensitivity};
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// qualification

enum class KindClass : std::uint8_t { Ems, Ase };

inline constexpr std::string_view to_string(KindClass c) noexcept { return c == KindClass::Ems ? "EMS" : "ASE"; }

struct FeasibilityRow {
    std::size_t site{0};
    std::size_t roi{0};
    KindClass cls{KindClass::Ems};
    Verdict verdict;
};

struct Qualification {
    std::vector<FeasibilityRow> report;         // site-major, then RoI, then EMS/ASE
    SiteKinds kinds;                            // feasible genes per site
    std::vector<std::vector<std::size_t>> rois; // RoIs each site serves
    std::vector<SeeAssignment> plan;            // one device model per feasible (site, gene)

    [[nodiscard]] std::size_t retained_sites() const noexcept
    {
        return static_cast<std::size_t>(std::count_if(kinds.begin(), kinds.end(), [](auto const& k) { return !k.empty(); }));
    }
};

/// Evaluate every (site, RoI, class) triple. A kind is kept at a site when it
/// is feasible for at least one RoI; its device is pointed at the feasible RoI
/// with the shortest path (ties to the lower RoI index).
///
/// The ASE class verdict is feasible if any active kind admitted at the site
/// is; otherwise it carries the reason of the first such kind in catalog order.
inline Qualification qualify_sites(Scenario const& scn, BlindSpot const& bs, double pth_dbm)
{
    Qualification q;
    std::size_t const N = scn.sites.size();
    q.kinds.resize(N);
    q.rois.resize(N);
    for (std::size_t n = 0; n < N; ++n) {
        auto const& site = scn.sites[n];
        std::vector<int> ems_genes;
        std::vector<int> ase_genes;
        for (auto k : site.admissible_kinds) {
            if (auto g = scn.gene_of(k)) {
                (is_passive(k) ? ems_genes : ase_genes).push_back(*g);
            }
        }
        std::sort(ems_genes.begin(), ems_genes.end());
        std::sort(ase_genes.begin(), ase_genes.end());

        // best (metric, roi) per gene
        std::map<int, std::pair<double, std::size_t>> best;
        auto consider = [&](int gene, double metric, std::size_t w) {
            auto it = best.find(gene);
            if (it == best.end() || metric < it->second.first) {
                best[gene] = {metric, w};
            }
        };

        for (std::size_t w = 0; w < bs.rois.size(); ++w) {
            auto const& roi = bs.rois[w];
            auto const target = roi_point(roi.avg_barycenter, scn.grid);
            bool serves = false;

            Verdict ems{Exclusion::NotAdmissible};
            if (!ems_genes.empty()) {
                ems = ems_verdict(scn, site, roi, pth_dbm);
                if (ems.feasible()) {
                    serves = true;
                    double const path = distance(scn.bts.position, site.position) + distance(site.position, target);
                    for (int g : ems_genes) {
                        consider(g, path, w);
                    }
                }
            }
            q.report.push_back({n, w, KindClass::Ems, ems});

            Verdict ase{Exclusion::NotAdmissible};
            bool first = true;
            for (int g : ase_genes) {
                auto const v = ase_verdict(scn, site, roi, scn.see_type(g), pth_dbm);
                if (v.feasible()) {
                    serves = true;
                    consider(g, distance(site.position, target), w);
                    ase = v;
                }
                else if (first) {
                    ase = v;
                }
                first = false;
            }
            q.report.push_back({n, w, KindClass::Ase, ase});
            if (serves) {
                q.rois[n].push_back(w);
            }
        }
        for (auto const& [gene, m] : best) {
            q.kinds[n].push_back(gene);
            q.plan.push_back({n, gene, roi_targets(bs.rois[m.second], scn.grid)});
        }
    }
    return q;
}

inline void write_feasibility_csv(Qualification const& q, std::ostream& out)
{
    out << "site,roi,class,verdict,reason\n";
    for (auto const& r : q.report) {
        out << (r.site + 1) << ',' << (r.roi + 1) << ',' << to_string(r.cls) << ','
            << (r.verdict.feasible() ? "feasible" : "excluded") << ','
            << (r.verdict.reason ? to_string(*r.verdict.reason) : std::string_view{}) << '\n';
    }
}

/// Region membership of every grid sample (at receiver height) for RoI `w`:
/// the EMS spheroid and one ASE lens per active catalog kind.
inline void write_region_raster_csv(Scenario const& scn, Roi const& roi, double pth_dbm, std::ostream& out)
{
    auto const ems = ems_region(scn, roi, pth_dbm);
    std::vector<std::pair<SeeKind, AseRegion>> ase;
    for (auto const& c : scn.catalog) {
        if (!is_passive(c.kind)) {
            ase.emplace_back(c.kind, ase_region(scn, roi, c, pth_dbm));
        }
    }
    out << "x_m,y_m,ems";
    for (auto const& [k, _] : ase) {
        out << ',' << to_string(k);
    }
    out << '\n';
    for (std::size_t c = 0; c < scn.grid.cell_count(); ++c) {
        auto const p = scn.grid.sample(c);
        out << p.x << ',' << p.y << ',' << (ems.contains(p) ? 1 : 0);
        for (auto const& [_, r] : ase) {
            out << ',' << (r.contains(p) ? 1 : 0);
        }
        out << '\n';
    }
}

} // namespace seme

#endif // SEME_SITEPLANNER_HPP

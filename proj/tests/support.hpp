// Test fixtures and independent oracles shared by the unit tests and the
// acceptance binary. Nothing here calls into the code under test to compute
// an expected value.

#ifndef SEME_TESTS_SUPPORT_HPP
#define SEME_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "seme/seme.hpp"

namespace seme::test {

inline constexpr double kC = 299'792'458.0;

/// Table I of the reference deployment study: costs 500/750/3000/7500 and
/// powers 0/2/20/350 W for SP-EMS/RP-EMS/SR/IAB.
inline std::vector<SeeType> table1_catalog()
{
    std::vector<SeeType> c(4);
    c[0].kind = SeeKind::SpEms;
    c[0].install_cost = 500;
    c[0].energy_w = 0;
    c[0].aperture_area_m2 = 4.58;
    c[0].reflection_efficiency = 0.8;
    c[1].kind = SeeKind::RpEms;
    c[1].install_cost = 750;
    c[1].energy_w = 2;
    c[1].aperture_area_m2 = 4.58;
    c[1].reflection_efficiency = 0.8;
    c[2].kind = SeeKind::Sr;
    c[2].install_cost = 3000;
    c[2].energy_w = 20;
    c[2].tx_power_dbm = 24;
    c[2].gain_dbi = 20;
    c[2].sensitivity_dbm = -90;
    c[3].kind = SeeKind::Iab;
    c[3].install_cost = 7500;
    c[3].energy_w = 350;
    c[3].tx_power_dbm = 33;
    c[3].gain_dbi = 20;
    c[3].sensitivity_dbm = -90;
    return c;
}

inline std::vector<Vec2> rect(double x0, double y0, double x1, double y1)
{
    return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

/// Open area at 3.5 GHz: one 20 W / 16.3 dBi sector at (0, 0, h) looking
/// east (+x) with zero downtilt, `instants` identical instants.
inline Scenario open_scenario(std::size_t instants = 1, double bts_height = 1.5)
{
    Scenario s;
    s.frequency_hz = 3.5e9;
    s.grid.origin = {10.0, -50.0};
    s.grid.spacing = 5.0;
    s.grid.nx = 20;
    s.grid.ny = 20;
    s.grid.height = 1.5;
    s.bts.position = {0.0, 0.0, bts_height};
    for (std::size_t t = 0; t < instants; ++t) {
        BtsInstant in;
        BtsSector sec;
        sec.azimuth_deg = 90.0;
        sec.downtilt_deg = 0.0;
        sec.tx_power_w = 20.0;
        sec.max_gain_dbi = 16.3;
        in.sectors.push_back(sec);
        s.bts.instants.push_back(in);
    }
    s.catalog = table1_catalog();
    return s;
}

/// Friis oracle in the dB domain: EIRP (dBm) minus free-space path loss.
inline double friis_dbm(double p_tx_w, double gain_dbi, double freq_hz, double d)
{
    double const lambda = kC / freq_hz;
    return 10.0 * std::log10(p_tx_w * 1000.0) + gain_dbi + 20.0 * std::log10(lambda / (4.0 * std::numbers::pi * d));
}

/// Field vector whose isotropic received power is `dbm`, along x.
inline FieldVector field_for_dbm(double dbm, double lambda)
{
    double const watts = std::pow(10.0, (dbm - 30.0) / 10.0);
    double const eta = std::sqrt(1.25663706212e-6 / 8.8541878128e-12);
    double const intensity = watts * 8.0 * std::numbers::pi * eta / (lambda * lambda);
    return {Complex{std::sqrt(intensity), 0.0}, Complex{}, Complex{}};
}

// ---------------------------------------------------------------------------
// toy HPP: 4 buildings, 1-sector BTS, T = 2, N = 6 all-kind sites, S = 4
// kinds, and a synthetic database whose contributions are placed by hand.

struct Toy {
    Scenario scn;
    MapDatabase db;
    BlindSpot blindspot;
    SiteKinds kinds;
    double pth_dbm{-65.0};
    Chromosome covering; // a known deployment that covers every blind cell
};

inline Toy make_toy(CombiningMode mode = CombiningMode::Incoherent)
{
    Toy toy;
    auto& s = toy.scn;
    s = open_scenario(2);
    s.grid.origin = {10.0, 10.0};
    s.grid.nx = 10;
    s.grid.ny = 10;
    s.buildings = {{rect(-40, -40, -30, -30), 20.0},
                   {rect(-40, 30, -30, 40), 20.0},
                   {rect(70, -40, 80, -30), 20.0},
                   {rect(70, 70, 80, 80), 20.0}};
    for (int n = 0; n < 6; ++n) {
        CandidateSite site;
        site.position = {12.0 + 8.0 * n, 55.0, 6.0};
        site.mount = Mount::Pole;
        site.admissible_kinds = {SeeKind::SpEms, SeeKind::RpEms, SeeKind::Sr, SeeKind::Iab};
        s.sites.push_back(site);
    }
    validate(s);

    double const lambda = kC / s.frequency_hz;
    auto& db = toy.db;
    db.grid = s.grid;
    db.instants = 2;
    db.sites = 6;
    db.lambda = lambda;
    db.mode = mode;
    db.scenario_hash = scenario_hash(s);
    auto const cells = s.grid.cell_count();
    auto idx = [&](int ix, int iy) { return static_cast<std::size_t>(iy * s.grid.nx + ix); };

    // RoI A: 2x2 block at (2..3, 2..3); RoI B: 2x2 block at (6..7, 6..7) at
    // t = 0, shifted one column right at t = 1.
    std::vector<std::vector<std::size_t>> a(2), b(2);
    for (int t = 0; t < 2; ++t) {
        for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
                a[t].push_back(idx(2 + dx, 2 + dy));
                b[t].push_back(idx(6 + dx + t, 6 + dy));
            }
        }
        std::sort(a[t].begin(), a[t].end());
        std::sort(b[t].begin(), b[t].end());
    }
    db.reference = FieldGrid(s.grid, 2);
    for (std::size_t t = 0; t < 2; ++t) {
        for (std::size_t c = 0; c < cells; ++c) {
            db.reference.set(t, c, field_for_dbm(-50.0, lambda));
        }
        for (auto c : a[t]) {
            db.reference.set(t, c, field_for_dbm(-80.0 + static_cast<double>(t), lambda));
        }
        for (auto c : b[t]) {
            db.reference.set(t, c, field_for_dbm(-78.0, lambda));
        }
    }
    auto contribution = [&](std::vector<std::pair<std::vector<std::size_t> const*, double>> parts,
                            std::size_t first = 0, std::size_t count = 4) {
        FieldGrid g(s.grid, 2);
        for (std::size_t t = 0; t < 2; ++t) {
            for (auto const& [set, dbm] : parts) {
                for (std::size_t k = first; k < std::min(first + count, set[t].size()); ++k) {
                    g.set(t, set[t][k], field_for_dbm(dbm, lambda));
                }
            }
        }
        return g;
    };
    FieldGrid const zero(s.grid, 2);
    // site 0: SP covers one A cell, RP two, SR all of A, IAB both RoIs
    db.entries[{0, 1}] = contribution({{a.data(), -60.0}}, 0, 1);
    db.entries[{0, 2}] = contribution({{a.data(), -60.0}}, 0, 2);
    db.entries[{0, 3}] = contribution({{a.data(), -60.0}});
    db.entries[{0, 4}] = contribution({{a.data(), -55.0}, {b.data(), -55.0}});
    // site 1: SP lifts B partially, RP covers half of B, SR all of B
    db.entries[{1, 1}] = contribution({{b.data(), -72.0}});
    db.entries[{1, 2}] = contribution({{b.data(), -60.0}}, 0, 2);
    db.entries[{1, 3}] = contribution({{b.data(), -60.0}});
    db.entries[{1, 4}] = zero;
    // site 2: SP lifts the upper half of A partially; nothing else helps
    db.entries[{2, 1}] = contribution({{a.data(), -70.0}}, 2, 2);
    for (int g = 2; g <= 4; ++g) {
        db.entries[{2, g}] = zero;
    }
    for (std::size_t n = 3; n < 6; ++n) {
        for (int g = 1; g <= 4; ++g) {
            db.entries[{n, g}] = zero;
        }
    }

    toy.kinds.assign(6, {1, 2, 3, 4});
    Chromosome const none(6, 0);
    std::vector<CoverageMap> maps;
    for (std::size_t t = 0; t < 2; ++t) {
        maps.push_back({s.grid, power_map(db, none, t)});
    }
    toy.blindspot = extract_blindspot(maps, toy.pth_dbm, 2);
    toy.covering = {4, 0, 0, 0, 0, 0};
    return toy;
}

// ---------------------------------------------------------------------------
// 10 x 10 grid with three devices (facade SP-EMS, pole SR, pole IAB)

struct ThreeDevices {
    Scenario scn;
    std::vector<SeeAssignment> plan; // site n carries plan[n]
};

inline ThreeDevices three_devices(std::size_t instants = 2)
{
    ThreeDevices d;
    auto& s = d.scn;
    s = open_scenario(instants, 12.0);
    s.grid.origin = {20.0, -20.0};
    s.grid.nx = 10;
    s.grid.ny = 10;
    if (instants > 1) {
        s.bts.instants[1].sectors[0].azimuth_deg = 75.0;
        s.bts.instants[1].sectors[0].downtilt_deg = 3.0;
    }
    s.buildings = {{rect(40, -5, 50, 5), 25.0}};
    CandidateSite ems;
    ems.position = {60.0, 20.0, 6.0};
    ems.mount = Mount::Facade;
    ems.normal = Vec3{-1.0, 0.0, 0.0};
    ems.admissible_kinds = {SeeKind::SpEms, SeeKind::RpEms};
    CandidateSite sr;
    sr.position = {30.0, 15.0, 6.0};
    sr.mount = Mount::Pole;
    sr.admissible_kinds = {SeeKind::Sr, SeeKind::Iab};
    CandidateSite iab = sr;
    iab.position = {45.0, -18.0, 8.0};
    s.sites = {ems, sr, iab};
    validate(s);
    std::vector<Vec3> const shadow(instants, Vec3{55.0, 0.0, 1.5});
    std::vector<Vec3> moving;
    for (std::size_t t = 0; t < instants; ++t) {
        moving.push_back({55.0 + 5.0 * static_cast<double>(t), -5.0, 1.5});
    }
    d.plan = {{0, 1, shadow}, {1, 3, moving}, {2, 4, shadow}};
    return d;
}

/// From-scratch received power (W) at a point: BTS field plus one emitter
/// per assignment, combined per `mode`.
inline double direct_power_w(Scenario const& scn, std::vector<SeeAssignment> const& devices, Vec3 p, std::size_t t,
                             CombiningMode mode)
{
    double const lambda = kC / scn.frequency_hz;
    FieldVector e = bts_field_at(scn, p, t);
    double intensity = field_intensity(e);
    for (auto const& a : devices) {
        auto const f = SeeEmitter(scn, a).field_at(p, t);
        for (std::size_t u = 0; u < 3; ++u) {
            e[u] += f[u];
        }
        intensity += field_intensity(f);
    }
    double const eta = std::sqrt(1.25663706212e-6 / 8.8541878128e-12);
    double const factor = lambda * lambda / (8.0 * std::numbers::pi * eta);
    return (mode == CombiningMode::Coherent ? field_intensity(e) : intensity) * factor;
}

// ---------------------------------------------------------------------------
// oracles

inline bool dominates_oracle(ObjectiveVector const& a, ObjectiveVector const& b)
{
    bool le = a.coverage <= b.coverage && a.cost <= b.cost && a.energy <= b.energy;
    bool lt = a.coverage < b.coverage || a.cost < b.cost || a.energy < b.energy;
    return le && lt;
}

/// Rank by repeated peeling of the non-dominated set, O(n^3).
inline std::vector<std::size_t> brute_force_ranks(std::vector<ObjectiveVector> const& pop)
{
    std::vector<std::size_t> rank(pop.size(), SIZE_MAX);
    std::size_t assigned = 0;
    for (std::size_t r = 0; assigned < pop.size(); ++r) {
        std::vector<std::size_t> front;
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (rank[i] != SIZE_MAX) {
                continue;
            }
            bool dominated = false;
            for (std::size_t j = 0; j < pop.size() && !dominated; ++j) {
                dominated = rank[j] == SIZE_MAX && dominates_oracle(pop[j], pop[i]);
            }
            if (!dominated) {
                front.push_back(i);
            }
        }
        for (auto i : front) {
            rank[i] = r;
        }
        assigned += front.size();
    }
    return rank;
}

/// Exact 2-objective hypervolume (minimization) of points w.r.t. `ref`.
inline double hypervolume2d(std::vector<std::pair<double, double>> pts, double rx, double ry)
{
    std::sort(pts.begin(), pts.end());
    double hv = 0.0;
    double best_y = ry;
    for (auto const& [x, y] : pts) {
        if (x >= rx || y >= best_y) {
            continue;
        }
        // staircase: add the strip from x to rx between y and best_y
        hv += (rx - x) * (best_y - y);
        best_y = y;
    }
    return hv;
}

/// Exact 3-objective hypervolume by slicing along the third objective.
inline double hypervolume3d(std::vector<ObjectiveVector> const& pts, ObjectiveVector const& ref)
{
    std::vector<ObjectiveVector> p;
    for (auto const& v : pts) {
        if (v.coverage < ref.coverage && v.cost < ref.cost && v.energy < ref.energy) {
            p.push_back(v);
        }
    }
    std::sort(p.begin(), p.end(), [](auto const& a, auto const& b) { return a.energy < b.energy; });
    double hv = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double const z0 = p[i].energy;
        double const z1 = i + 1 < p.size() ? p[i + 1].energy : ref.energy;
        if (z1 <= z0) {
            continue;
        }
        std::vector<std::pair<double, double>> slice;
        for (std::size_t k = 0; k <= i; ++k) {
            slice.emplace_back(p[k].coverage, p[k].cost);
        }
        hv += hypervolume2d(slice, ref.coverage, ref.cost) * (z1 - z0);
    }
    return hv;
}

/// Every chromosome over the per-site alphabets {0} + kinds[n].
inline std::vector<Chromosome> enumerate(SiteKinds const& kinds)
{
    std::vector<Chromosome> out;
    Chromosome chi(kinds.size(), 0);
    std::vector<std::size_t> digit(kinds.size(), 0);
    while (true) {
        for (std::size_t n = 0; n < kinds.size(); ++n) {
            chi[n] = digit[n] == 0 ? 0 : kinds[n][digit[n] - 1];
        }
        out.push_back(chi);
        std::size_t n = 0;
        while (n < kinds.size() && ++digit[n] > kinds[n].size()) {
            digit[n] = 0;
            ++n;
        }
        if (n == kinds.size()) {
            break;
        }
    }
    return out;
}

/// Indices of the non-dominated members of `f` (duplicates all kept).
inline std::vector<std::size_t> pareto_indices(std::vector<ObjectiveVector> const& f)
{
    // sort by coverage then check dominance only against the running set
    std::vector<std::size_t> order(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](auto i, auto j) {
        return std::tie(f[i].coverage, f[i].cost, f[i].energy) < std::tie(f[j].coverage, f[j].cost, f[j].energy);
    });
    std::vector<std::size_t> front;
    for (auto i : order) {
        bool dominated = false;
        for (auto j : front) {
            if (dominates_oracle(f[j], f[i])) {
                dominated = true;
                break;
            }
        }
        if (!dominated) {
            front.push_back(i);
        }
    }
    std::sort(front.begin(), front.end());
    return front;
}

/// Reference point: component-wise maximum plus 10 %.
inline ObjectiveVector hv_reference(std::vector<ObjectiveVector> const& f)
{
    ObjectiveVector m{0, 0, 0};
    for (auto const& v : f) {
        m.coverage = std::max(m.coverage, v.coverage);
        m.cost = std::max(m.cost, v.cost);
        m.energy = std::max(m.energy, v.energy);
    }
    auto bump = [](double x) { return x > 0.0 ? 1.1 * x : 0.1; };
    return {bump(m.coverage), bump(m.cost), bump(m.energy)};
}

} // namespace seme::test

#endif // SEME_TESTS_SUPPORT_HPP

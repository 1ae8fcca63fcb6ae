#ifndef SEME_PROPAGATION_HPP
#define SEME_PROPAGATION_HPP

#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "seme/chromosome.hpp"
#include "seme/geometry.hpp"
#include "seme/scenario.hpp"
#include "seme/units.hpp"

namespace seme {

using Complex = std::complex<double>;
using FieldVector = std::array<Complex, 3>; // x, y, z components, peak V/m

inline constexpr double kPatternFloorDb = 30.0;
/// Facade devices radiate from just in front of the wall so that rays leaving
/// or reaching the panel do not graze their own building.
inline constexpr double kFacadeStandoff = 0.05;
inline constexpr double kMinPathLength = 1.0; // near-field clamp, m

// ---------------------------------------------------------------------------
// antenna patterns

struct Direction {
    double azimuth_deg; // clockwise from +y
    double elevation_deg;
};

inline Direction direction_angles(Vec3 dir) noexcept
{
    double const n = norm(dir);
    double const el = n > 0.0 ? std::asin(std::clamp(dir.z / n, -1.0, 1.0)) : 0.0;
    double const az = std::atan2(dir.x, dir.y);
    double az_deg = rad_to_deg(az);
    if (az_deg < 0.0) {
        az_deg += 360.0;
    }
    return {az_deg, rad_to_deg(el)};
}

inline double wrap_deg(double a) noexcept
{
    a = std::fmod(a + 180.0, 360.0);
    if (a < 0.0) {
        a += 360.0;
    }
    return a - 180.0;
}

/// Quadratic (in dB) main-lobe rolloff around a boresight, clamped at the
/// 30 dB floor. Offsets of half a beamwidth cost exactly 3 dB.
inline double beam_gain_dbi(double max_gain_dbi, Direction boresight, double bw_az_deg, double bw_el_deg,
                            Vec3 dir) noexcept
{
    auto const d = direction_angles(dir);
    double const daz = wrap_deg(d.azimuth_deg - boresight.azimuth_deg);
    double const del = d.elevation_deg - boresight.elevation_deg;
    double const att = 12.0 * (daz / bw_az_deg) * (daz / bw_az_deg) + 12.0 * (del / bw_el_deg) * (del / bw_el_deg);
    return max_gain_dbi - std::min(att, kPatternFloorDb);
}

inline double sector_gain(BtsSector const& sector, Vec3 direction) noexcept
{
    return beam_gain_dbi(sector.max_gain_dbi, {sector.azimuth_deg, -sector.downtilt_deg}, sector.beamwidth_az_deg,
                         sector.beamwidth_el_deg, direction);
}

/// Half-power beamwidth (deg) of a pencil beam with the given linear gain.
inline double beamwidth_from_gain_deg(double gain_linear) noexcept
{
    return std::min(rad_to_deg(std::sqrt(4.0 * std::numbers::pi / gain_linear)), 179.0);
}

// ---------------------------------------------------------------------------
// occlusion

/// True when the 3D ray a->b is stopped by `b` under the linearized height
/// gate: the footprint must be crossed in 2D and the building must be taller
/// than the ray at its lowest point inside the footprint.
inline bool building_blocks(Building const& bl, Vec3 a, Vec3 b) noexcept
{
    auto const box = bounding_box(bl.footprint);
    if (!box.overlaps_segment_box(a.xy(), b.xy())) {
        return false;
    }
    double lowest = std::numeric_limits<double>::infinity();
    bool hit = false;
    auto ray_z = [&](double s) { return a.z + s * (b.z - a.z); };
    auto const& fp = bl.footprint;
    for (std::size_t i = 0, j = fp.size() - 1; i < fp.size(); j = i++) {
        if (auto s = segment_crossing(a.xy(), b.xy(), fp[j], fp[i])) {
            hit = true;
            lowest = std::min(lowest, ray_z(*s));
        }
    }
    if (point_in_polygon(a.xy(), fp)) {
        hit = true;
        lowest = std::min(lowest, a.z);
    }
    if (point_in_polygon(b.xy(), fp)) {
        hit = true;
        lowest = std::min(lowest, b.z);
    }
    return hit && bl.height > lowest;
}

inline double obstruction_loss_db(Scenario const& scn, Vec3 a, Vec3 b) noexcept
{
    int blocked = 0;
    for (auto const& bl : scn.buildings) {
        blocked += building_blocks(bl, a, b) ? 1 : 0;
    }
    return blocked * scn.propagation.penetration_loss_db;
}

// ---------------------------------------------------------------------------
// field primitives

/// Unit vector along increasing polar angle for propagation direction `d`;
/// used as the (co-polar) field orientation.
inline Vec3 theta_hat(Vec3 d) noexcept
{
    d = normalized(d);
    double const rho = std::hypot(d.x, d.y);
    if (rho < 1e-12) {
        return {1.0, 0.0, 0.0};
    }
    double const ct = d.z;
    return {ct * d.x / rho, ct * d.y / rho, -rho};
}

/// Spherical wave of the given EIRP from src observed at dst. Amplitude is
/// chosen so that an isotropic receiver sees EIRP * (lambda / 4 pi d)^2.
inline FieldVector spherical_wave(Vec3 src, Vec3 dst, double eirp_w, double phase0, double lambda,
                                  double extra_loss_db = 0.0) noexcept
{
    FieldVector e{};
    if (eirp_w <= 0.0) {
        return e;
    }
    double const d = std::max(distance(src, dst), kMinPathLength);
    double const eta = free_space_impedance();
    double const amp = std::sqrt(2.0 * eta * eirp_w / (4.0 * std::numbers::pi)) / d
        * std::pow(10.0, -extra_loss_db / 20.0);
    double const phase = phase0 - 2.0 * std::numbers::pi * d / lambda;
    Complex const c = std::polar(amp, phase);
    auto const pol = theta_hat(dst - src);
    e[0] = c * pol.x;
    e[1] = c * pol.y;
    e[2] = c * pol.z;
    return e;
}

inline double field_intensity(FieldVector const& e) noexcept
{
    return std::norm(e[0]) + std::norm(e[1]) + std::norm(e[2]);
}

/// lambda^2 G_RX / (8 pi eta0) with an isotropic receiver.
inline double receive_factor(double lambda) noexcept
{
    return lambda * lambda / (8.0 * std::numbers::pi * free_space_impedance());
}

inline double isotropic_power_w(FieldVector const& e, double lambda) noexcept
{
    return field_intensity(e) * receive_factor(lambda);
}

inline FieldVector& operator+=(FieldVector& a, FieldVector const& b) noexcept
{
    for (std::size_t u = 0; u < 3; ++u) {
        a[u] += b[u];
    }
    return a;
}

/// Field of the BTS alone at an arbitrary point and time instant.
inline FieldVector bts_field_at(Scenario const& scn, Vec3 point, std::size_t t)
{
    double const lambda = wavelength(scn);
    double const loss = obstruction_loss_db(scn, scn.bts.position, point);
    Vec3 const dir = point - scn.bts.position;
    FieldVector e{};
    for (auto const& sec : scn.bts.instants.at(t).sectors) {
        double const eirp = sec.tx_power_w * db_to_linear(sector_gain(sec, dir));
        e += spherical_wave(scn.bts.position, point, eirp, 0.0, lambda, loss);
    }
    return e;
}

inline double bts_power_dbm_at(Scenario const& scn, Vec3 point, std::size_t t)
{
    return watts_to_dbm(isotropic_power_w(bts_field_at(scn, point, t), wavelength(scn)));
}

// ---------------------------------------------------------------------------
// field grids

class FieldGrid {
public:
    FieldGrid() = default;
    FieldGrid(GridSpec grid, std::size_t instants)
        : grid_(grid), instants_(instants), data_(instants * grid.cell_count() * 3)
    {
    }

    [[nodiscard]] GridSpec const& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t instants() const noexcept { return instants_; }
    [[nodiscard]] std::size_t cells() const noexcept { return grid_.cell_count(); }

    [[nodiscard]] FieldVector at(std::size_t t, std::size_t cell) const noexcept
    {
        auto const* p = &data_[offset(t, cell)];
        return {p[0], p[1], p[2]};
    }
    void set(std::size_t t, std::size_t cell, FieldVector const& e) noexcept
    {
        auto* p = &data_[offset(t, cell)];
        p[0] = e[0];
        p[1] = e[1];
        p[2] = e[2];
    }
    [[nodiscard]] Complex component(std::size_t t, std::size_t cell, std::size_t u) const noexcept
    {
        return data_[offset(t, cell) + u];
    }
    void set_component(std::size_t t, std::size_t cell, std::size_t u, Complex v) noexcept
    {
        data_[offset(t, cell) + u] = v;
    }

    [[nodiscard]] bool all_finite() const noexcept
    {
        return std::all_of(data_.begin(), data_.end(),
                           [](Complex c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
    }
    [[nodiscard]] bool is_zero() const noexcept
    {
        return std::all_of(data_.begin(), data_.end(), [](Complex c) { return c == Complex{}; });
    }

    friend bool operator==(FieldGrid const&, FieldGrid const&) = default;

private:
    [[nodiscard]] std::size_t offset(std::size_t t, std::size_t cell) const noexcept
    {
        return (t * grid_.cell_count() + cell) * 3;
    }

    GridSpec grid_{};
    std::size_t instants_{0};
    std::vector<Complex> data_;
};

inline FieldGrid reference_field(Scenario const& scn)
{
    FieldGrid g(scn.grid, scn.instants());
    for (std::size_t t = 0; t < scn.instants(); ++t) {
        for (std::size_t c = 0; c < g.cells(); ++c) {
            g.set(t, c, bts_field_at(scn, scn.grid.sample(c), t));
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// smart entities

/// A device of catalog entry `gene` at site `site`, pointed at one target per
/// time instant (RoI barycenters at receiver height).
struct SeeAssignment {
    std::size_t site{0};
    int gene{0};
    std::vector<Vec3> targets;

    friend bool operator==(SeeAssignment const&, SeeAssignment const&) = default;
};

inline Vec3 mean_point(std::vector<Vec3> const& pts) noexcept
{
    Vec3 acc{};
    for (auto const& p : pts) {
        acc = acc + p;
    }
    return pts.empty() ? acc : (1.0 / static_cast<double>(pts.size())) * acc;
}

/// Panel normal: the wall normal on facades; on poles the panel is assumed
/// oriented along the bisector of the BTS and target directions.
inline Vec3 panel_normal(CandidateSite const& site, Vec3 bts, Vec3 target) noexcept
{
    if (site.normal) {
        return *site.normal;
    }
    auto const a = normalized(bts - site.position);
    auto const b = normalized(target - site.position);
    auto const bis = a + b;
    return norm(bis) > 1e-12 ? normalized(bis) : a;
}

inline Vec3 radiating_point(CandidateSite const& site) noexcept
{
    if (site.mount == Mount::Facade && site.normal) {
        return site.position + kFacadeStandoff * *site.normal;
    }
    return site.position;
}

/// Behavioural emitter for one SEE; evaluates its field anywhere.
///
/// Passive skins capture the incident power density over their aperture and
/// re-radiate it with gain 4 pi A / lambda^2 times the reflection efficiency
/// toward their pointing target (fixed time-averaged target for SP-EMS,
/// per-instant for RP-EMS), only into the half-space in front of the panel.
/// Smart repeaters forward P_s plus array gain toward the per-instant target
/// when the BTS signal at the site (with array gain) reaches the sensitivity;
/// IAB nodes act as a micro-BTS beamed at the per-instant target.
class SeeEmitter {
public:
    SeeEmitter(Scenario const& scn, SeeAssignment const& a) : scn_(&scn)
    {
        if (a.site >= scn.sites.size()) {
            throw std::out_of_range("see emitter: site index out of range");
        }
        if (a.gene < 1 || static_cast<std::size_t>(a.gene) > scn.catalog.size()) {
            throw std::out_of_range("see emitter: gene out of range");
        }
        auto const& site = scn.sites[a.site];
        type_ = scn.see_type(a.gene);
        if (!site.admits(type_.kind)) {
            throw std::invalid_argument("see emitter: kind " + std::string(to_string(type_.kind))
                                        + " is not admissible at site " + std::to_string(a.site + 1));
        }
        if (a.targets.size() != scn.instants()) {
            throw std::invalid_argument("see emitter: need one target per time instant");
        }
        double const lambda = wavelength(scn);
        src_ = radiating_point(site);
        Vec3 const avg_target = mean_point(a.targets);

        states_.resize(scn.instants());
        for (std::size_t t = 0; t < scn.instants(); ++t) {
            auto& st = states_[t];
            Vec3 const target = (type_.kind == SeeKind::SpEms) ? avg_target : a.targets[t];
            st.boresight = direction_angles(target - src_);
            FieldVector const inc = bts_field_at(scn, src_, t);
            double const inc_w = isotropic_power_w(inc, lambda);
            st.phase = dominant_phase(inc);

            if (is_passive(type_.kind)) {
                st.normal = panel_normal(site, scn.bts.position, target);
                double const area = *type_.aperture_area_m2;
                double const ap_gain = 4.0 * std::numbers::pi * area / (lambda * lambda);
                double const density = field_intensity(inc) / (2.0 * free_space_impedance());
                bool const lit = dot(scn.bts.position - src_, st.normal) > 0.0;
                st.peak_eirp_w = lit ? density * area * ap_gain * *type_.reflection_efficiency : 0.0;
                st.max_gain_dbi = 0.0; // folded into peak_eirp_w
                double const bw = beamwidth_from_gain_deg(ap_gain);
                st.bw_az = type_.beamwidth_az_deg.value_or(bw);
                st.bw_el = type_.beamwidth_el_deg.value_or(bw);
                front_only_ = true;
            }
            else {
                double const g_lin = db_to_linear(*type_.gain_dbi);
                double const bw = beamwidth_from_gain_deg(g_lin);
                st.bw_az = type_.beamwidth_az_deg.value_or(bw);
                st.bw_el = type_.beamwidth_el_deg.value_or(bw);
                st.max_gain_dbi = *type_.gain_dbi;
                bool on = true;
                if (type_.kind == SeeKind::Sr) {
                    on = watts_to_dbm(inc_w) + *type_.gain_dbi >= *type_.sensitivity_dbm;
                }
                else {
                    st.phase = 0.0; // regenerated signal
                }
                st.peak_eirp_w = on ? dbm_to_watts(*type_.tx_power_dbm) : 0.0;
            }
        }
    }

    [[nodiscard]] FieldVector field_at(Vec3 point, std::size_t t) const
    {
        auto const& st = states_.at(t);
        if (st.peak_eirp_w <= 0.0) {
            return {};
        }
        Vec3 const dir = point - src_;
        if (front_only_ && dot(dir, st.normal) <= 0.0) {
            return {};
        }
        double const g = beam_gain_dbi(st.max_gain_dbi, st.boresight, st.bw_az, st.bw_el, dir);
        double const loss = obstruction_loss_db(*scn_, src_, point);
        return spherical_wave(src_, point, st.peak_eirp_w * db_to_linear(g), st.phase, wavelength(*scn_), loss);
    }

    [[nodiscard]] Vec3 source() const noexcept { return src_; }
    [[nodiscard]] bool active_at(std::size_t t) const { return states_.at(t).peak_eirp_w > 0.0; }

private:
    struct InstantState {
        Direction boresight{};
        double peak_eirp_w{0.0};
        double max_gain_dbi{0.0};
        double bw_az{1.0};
        double bw_el{1.0};
        double phase{0.0};
        Vec3 normal{};
    };

    static double dominant_phase(FieldVector const& e) noexcept
    {
        std::size_t best = 0;
        for (std::size_t u = 1; u < 3; ++u) {
            if (std::abs(e[u]) > std::abs(e[best])) {
                best = u;
            }
        }
        return std::arg(e[best]);
    }

    Scenario const* scn_;
    SeeType type_;
    Vec3 src_{};
    bool front_only_{false};
    std::vector<InstantState> states_;
};

inline FieldGrid see_contribution(Scenario const& scn, SeeAssignment const& a)
{
    SeeEmitter const em(scn, a);
    FieldGrid g(scn.grid, scn.instants());
    for (std::size_t t = 0; t < scn.instants(); ++t) {
        if (!em.active_at(t)) {
            continue;
        }
        for (std::size_t c = 0; c < g.cells(); ++c) {
            g.set(t, c, em.field_at(scn.grid.sample(c), t));
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// map database

enum class CombiningMode : std::uint8_t { Coherent, Incoherent };

inline std::string_view to_string(CombiningMode m) noexcept
{
    return m == CombiningMode::Coherent ? "coherent" : "incoherent";
}

inline std::optional<CombiningMode> parse_mode(std::string_view s) noexcept
{
    if (s == "coherent") {
        return CombiningMode::Coherent;
    }
    if (s == "incoherent") {
        return CombiningMode::Incoherent;
    }
    return std::nullopt;
}

class MissingEntryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DatabaseFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using EntryKey = std::pair<std::size_t, int>; // (site, gene)

struct MapDatabase {
    GridSpec grid;
    std::size_t instants{0};
    std::size_t sites{0};
    double lambda{1.0};
    CombiningMode mode{CombiningMode::Coherent};
    std::uint64_t scenario_hash{0};
    std::uint64_t key{0}; // cache key of the inputs that produced this database
    FieldGrid reference;
    std::map<EntryKey, FieldGrid> entries;

    [[nodiscard]] FieldGrid const& entry(std::size_t site, int gene) const
    {
        auto it = entries.find({site, gene});
        if (it == entries.end()) {
            throw MissingEntryError("map database has no entry for site " + std::to_string(site + 1) + ", gene "
                                    + std::to_string(gene) + " (stale database?)");
        }
        return it->second;
    }

    friend bool operator==(MapDatabase const&, MapDatabase const&) = default;
};

/// Cache key over everything a database depends on.
inline std::uint64_t database_key(Scenario const& scn, std::vector<SeeAssignment> const& plan, CombiningMode mode)
{
    json j = to_json(scn);
    json jp = json::array();
    for (auto const& a : plan) {
        json targets = json::array();
        for (auto const& p : a.targets) {
            targets.push_back(json::array({p.x, p.y, p.z}));
        }
        jp.push_back({{"site", a.site}, {"gene", a.gene}, {"targets", targets}});
    }
    j["__plan"] = jp;
    j["__mode"] = std::string(to_string(mode));
    return fnv1a64(j.dump());
}

/// Reference field plus one contribution grid per assignment. Assignments are
/// computed on `workers` threads; results do not depend on the thread count.
inline MapDatabase build_database(Scenario const& scn, std::vector<SeeAssignment> const& plan,
                                  CombiningMode mode, unsigned workers = std::thread::hardware_concurrency())
{
    MapDatabase db;
    db.grid = scn.grid;
    db.instants = scn.instants();
    db.sites = scn.sites.size();
    db.lambda = wavelength(scn);
    db.mode = mode;
    db.scenario_hash = scenario_hash(scn);
    db.key = database_key(scn, plan, mode);
    db.reference = reference_field(scn);

    std::vector<FieldGrid> grids(plan.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < plan.size(); i = next++) {
            grids[i] = see_contribution(scn, plan[i]);
        }
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(plan.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < workers; ++w) {
            pool.emplace_back(work);
        }
        work();
    }
    for (std::size_t i = 0; i < plan.size(); ++i) {
        db.entries.emplace(EntryKey{plan[i].site, plan[i].gene}, std::move(grids[i]));
    }
    return db;
}

/// Total field at a cell under `chi` (coherent superposition).
inline FieldVector total_field(MapDatabase const& db, Chromosome const& chi, std::size_t cell, std::size_t t)
{
    FieldVector e = db.reference.at(t, cell);
    for (std::size_t n = 0; n < chi.size(); ++n) {
        if (chi[n] != 0) {
            e += db.entry(n, chi[n]).at(t, cell);
        }
    }
    return e;
}

inline double received_power_w(MapDatabase const& db, Chromosome const& chi, std::size_t cell, std::size_t t)
{
    if (chi.size() != db.sites) {
        throw std::invalid_argument("chromosome length " + std::to_string(chi.size()) + " does not match "
                                    + std::to_string(db.sites) + " sites");
    }
    if (db.mode == CombiningMode::Coherent) {
        return field_intensity(total_field(db, chi, cell, t)) * receive_factor(db.lambda);
    }
    double acc = field_intensity(db.reference.at(t, cell));
    for (std::size_t n = 0; n < chi.size(); ++n) {
        if (chi[n] != 0) {
            acc += field_intensity(db.entry(n, chi[n]).at(t, cell));
        }
    }
    return acc * receive_factor(db.lambda);
}

inline double received_power(MapDatabase const& db, Chromosome const& chi, std::size_t cell, std::size_t t)
{
    return watts_to_dbm(received_power_w(db, chi, cell, t));
}

/// Received power (dBm) over the whole grid at instant t.
inline std::vector<double> power_map(MapDatabase const& db, Chromosome const& chi, std::size_t t)
{
    std::vector<double> out(db.grid.cell_count());
    for (std::size_t c = 0; c < out.size(); ++c) {
        out[c] = received_power(db, chi, c, t);
    }
    return out;
}

// ---------------------------------------------------------------------------
// persistence
//
// Layout: 8-byte magic "SEMEMDB1", uint32 LE header length, JSON header, then
// for the reference grid and each entry in header order: for each instant,
// for each component x/y/z, nx*ny cells of (re, im) little-endian float32.

namespace detail {

    inline constexpr char kDbMagic[8] = {'S', 'E', 'M', 'E', 'M', 'D', 'B', '1'};

    inline void put_u32(std::ostream& out, std::uint32_t v)
    {
        char b[4];
        for (int i = 0; i < 4; ++i) {
            b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
        }
        out.write(b, 4);
    }

    inline std::uint32_t get_u32(std::istream& in)
    {
        unsigned char b[4];
        in.read(reinterpret_cast<char*>(b), 4);
        if (!in) {
            throw DatabaseFormatError("map database: truncated file");
        }
        return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16)
            | (std::uint32_t{b[3]} << 24);
    }

    inline void write_grid(std::ostream& out, FieldGrid const& g)
    {
        std::vector<char> buf(g.cells() * 8);
        for (std::size_t t = 0; t < g.instants(); ++t) {
            for (std::size_t u = 0; u < 3; ++u) {
                for (std::size_t c = 0; c < g.cells(); ++c) {
                    auto const v = g.component(t, c, u);
                    auto const re = std::bit_cast<std::uint32_t>(static_cast<float>(v.real()));
                    auto const im = std::bit_cast<std::uint32_t>(static_cast<float>(v.imag()));
                    for (int i = 0; i < 4; ++i) {
                        buf[c * 8 + i] = static_cast<char>((re >> (8 * i)) & 0xFFu);
                        buf[c * 8 + 4 + i] = static_cast<char>((im >> (8 * i)) & 0xFFu);
                    }
                }
                out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            }
        }
    }

    inline FieldGrid read_grid(std::istream& in, GridSpec const& grid, std::size_t instants)
    {
        FieldGrid g(grid, instants);
        std::vector<unsigned char> buf(g.cells() * 8);
        auto word = [&](std::size_t off) {
            std::uint32_t v = 0;
            for (int i = 0; i < 4; ++i) {
                v |= std::uint32_t{buf[off + i]} << (8 * i);
            }
            return static_cast<double>(std::bit_cast<float>(v));
        };
        for (std::size_t t = 0; t < instants; ++t) {
            for (std::size_t u = 0; u < 3; ++u) {
                in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
                if (!in) {
                    throw DatabaseFormatError("map database: truncated grid payload");
                }
                for (std::size_t c = 0; c < g.cells(); ++c) {
                    g.set_component(t, c, u, {word(c * 8), word(c * 8 + 4)});
                }
            }
        }
        return g;
    }

} // namespace detail

inline json database_header(MapDatabase const& db)
{
    json entries = json::array();
    for (auto const& [k, _] : db.entries) {
        entries.push_back({{"site", k.first}, {"gene", k.second}});
    }
    return {{"format", "seme-map-database"},
            {"version", 1},
            {"grid",
             {{"origin", json::array({db.grid.origin.x, db.grid.origin.y})},
              {"spacing_m", db.grid.spacing},
              {"nx", db.grid.nx},
              {"ny", db.grid.ny},
              {"height_m", db.grid.height}}},
            {"instants", db.instants},
            {"sites", db.sites},
            {"wavelength_m", db.lambda},
            {"mode", std::string(to_string(db.mode))},
            {"scenario_hash", hex64(db.scenario_hash)},
            {"key", hex64(db.key)},
            {"entries", entries}};
}

/// `config` (when not null) is echoed into the header for provenance only;
/// readers ignore it.
inline void write_database(MapDatabase const& db, std::ostream& out, json const& config = nullptr)
{
    json h = database_header(db);
    if (!config.is_null()) {
        h["config"] = config;
    }
    std::string const header = h.dump();
    out.write(detail::kDbMagic, sizeof detail::kDbMagic);
    detail::put_u32(out, static_cast<std::uint32_t>(header.size()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    detail::write_grid(out, db.reference);
    for (auto const& [_, g] : db.entries) {
        detail::write_grid(out, g);
    }
}

inline void save_database(MapDatabase const& db, std::filesystem::path const& path, json const& config = nullptr)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write map database '" + path.string() + "'");
    }
    write_database(db, out, config);
    if (!out) {
        throw std::runtime_error("I/O failure while writing map database '" + path.string() + "'");
    }
}

/// Header only; cheap cache validation without reading the grids.
inline json read_database_header(std::istream& in)
{
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, detail::kDbMagic, 8) != 0) {
        throw DatabaseFormatError("map database: bad magic");
    }
    auto const len = detail::get_u32(in);
    std::string header(len, '\0');
    in.read(header.data(), len);
    if (!in) {
        throw DatabaseFormatError("map database: truncated header");
    }
    try {
        return json::parse(header);
    }
    catch (json::parse_error const& e) {
        throw DatabaseFormatError(std::string("map database: malformed header: ") + e.what());
    }
}

inline MapDatabase read_database(std::istream& in)
{
    json const h = read_database_header(in);
    MapDatabase db;
    try {
        auto const& g = h.at("grid");
        db.grid.origin = {g.at("origin")[0].get<double>(), g.at("origin")[1].get<double>()};
        db.grid.spacing = g.at("spacing_m").get<double>();
        db.grid.nx = g.at("nx").get<int>();
        db.grid.ny = g.at("ny").get<int>();
        db.grid.height = g.at("height_m").get<double>();
        db.instants = h.at("instants").get<std::size_t>();
        db.sites = h.at("sites").get<std::size_t>();
        db.lambda = h.at("wavelength_m").get<double>();
        auto mode = parse_mode(h.at("mode").get<std::string>());
        if (!mode) {
            throw DatabaseFormatError("map database: unknown combining mode");
        }
        db.mode = *mode;
        db.scenario_hash = std::stoull(h.at("scenario_hash").get<std::string>(), nullptr, 16);
        db.key = std::stoull(h.at("key").get<std::string>(), nullptr, 16);
    }
    catch (json::exception const& e) {
        throw DatabaseFormatError(std::string("map database: bad header field: ") + e.what());
    }
    db.reference = detail::read_grid(in, db.grid, db.instants);
    for (auto const& e : h.at("entries")) {
        EntryKey k{e.at("site").get<std::size_t>(), e.at("gene").get<int>()};
        db.entries.emplace(k, detail::read_grid(in, db.grid, db.instants));
    }
    return db;
}

inline MapDatabase load_database(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open map database '" + path.string() + "'");
    }
    return read_database(in);
}

// ---------------------------------------------------------------------------
// CSV interchange

/// Cell x, y, received power (dBm) for one instant.
inline void export_power_csv(MapDatabase const& db, Chromosome const& chi, std::size_t t, std::ostream& out)
{
    out << "x_m,y_m,power_dbm\n";
    char line[96];
    for (std::size_t c = 0; c < db.grid.cell_count(); ++c) {
        auto const p = db.grid.sample_xy(c);
        std::snprintf(line, sizeof line, "%.3f,%.3f,%.6f\n", p.x, p.y, received_power(db, chi, c, t));
        out << line;
    }
}

/// Import an externally computed field grid (e.g. from a ray tracer). Rows:
/// `t,ix,iy,ex_re,ex_im,ey_re,ey_im,ez_re,ez_im` with 0-based indices; a
/// header line and '#' comments are skipped. Missing cells stay zero.
inline FieldGrid import_field_grid_csv(std::istream& in, GridSpec const& grid, std::size_t instants)
{
    FieldGrid g(grid, instants);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) {
            continue;
        }
        std::istringstream ls(line);
        std::array<double, 9> v{};
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::string tok;
            if (!std::getline(ls, tok, ',')) {
                throw DatabaseFormatError("field csv line " + std::to_string(lineno) + ": expected 9 columns");
            }
            try {
                v[i] = std::stod(tok);
            }
            catch (std::exception const&) {
                throw DatabaseFormatError("field csv line " + std::to_string(lineno) + ": bad number '" + tok + "'");
            }
        }
        auto const t = static_cast<long>(v[0]);
        auto const ix = static_cast<int>(v[1]);
        auto const iy = static_cast<int>(v[2]);
        if (t < 0 || static_cast<std::size_t>(t) >= instants || ix < 0 || ix >= grid.nx || iy < 0 || iy >= grid.ny) {
            throw DatabaseFormatError("field csv line " + std::to_string(lineno) + ": index out of range");
        }
        FieldVector e{Complex{v[3], v[4]}, Complex{v[5], v[6]}, Complex{v[7], v[8]}};
        g.set(static_cast<std::size_t>(t), grid.index(ix, iy), e);
    }
    if (!g.all_finite()) {
        throw DatabaseFormatError("field csv: non-finite values");
    }
    return g;
}

} // namespace seme

#endif // SEME_PROPAGATION_HPP

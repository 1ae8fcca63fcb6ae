#ifndef SEME_SCENARIO_HPP
#define SEME_SCENARIO_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "seme/geometry.hpp"
#include "seme/units.hpp"

namespace seme {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// errors

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The document is not well-formed or a field has the wrong type.
class ScenarioParseError : public ScenarioError {
public:
    using ScenarioError::ScenarioError;
};

/// The document parsed but violates a model invariant.
class ScenarioValidationError : public ScenarioError {
public:
    using ScenarioError::ScenarioError;
};

// ---------------------------------------------------------------------------
// world model

struct Building {
    std::vector<Vec2> footprint;
    double height{0.0};
    double permittivity{4.0}; // concrete
    double conductivity{0.01}; // S/m

    friend bool operator==(Building const&, Building const&) = default;
};

/// One BTS panel. Azimuth is measured clockwise from north (+y), downtilt is
/// positive below the horizon.
struct BtsSector {
    double azimuth_deg{0.0};
    double downtilt_deg{0.0};
    double tx_power_w{1.0};
    double max_gain_dbi{0.0};
    double beamwidth_az_deg{65.0};
    double beamwidth_el_deg{10.0};

    friend bool operator==(BtsSector const&, BtsSector const&) = default;
};

struct BtsInstant {
    std::vector<BtsSector> sectors;

    friend bool operator==(BtsInstant const&, BtsInstant const&) = default;
};

struct Bts {
    Vec3 position;
    std::vector<BtsInstant> instants;

    friend bool operator==(Bts const&, Bts const&) = default;
};

enum class SeeKind : std::uint8_t { SpEms, RpEms, Sr, Iab };

inline constexpr std::array<SeeKind, 4> kAllKinds{SeeKind::SpEms, SeeKind::RpEms, SeeKind::Sr, SeeKind::Iab};

inline constexpr std::string_view to_string(SeeKind k) noexcept
{
    switch (k) {
    case SeeKind::SpEms: return "SP-EMS";
    case SeeKind::RpEms: return "RP-EMS";
    case SeeKind::Sr: return "SR";
    case SeeKind::Iab: return "IAB";
    }
    return "?";
}

inline std::optional<SeeKind> parse_kind(std::string_view s) noexcept
{
    for (auto k : kAllKinds) {
        if (to_string(k) == s) {
            return k;
        }
    }
    return std::nullopt;
}

inline constexpr bool is_passive(SeeKind k) noexcept { return k == SeeKind::SpEms || k == SeeKind::RpEms; }

/// Catalog entry. Passive skins carry aperture/efficiency, active entities
/// carry transmit power, array gain and sensitivity.
struct SeeType {
    SeeKind kind{SeeKind::SpEms};
    std::optional<double> tx_power_dbm;
    double install_cost{0.0};
    double energy_w{0.0};
    std::optional<double> gain_dbi;
    std::optional<double> sensitivity_dbm;
    std::optional<double> reflection_efficiency;
    std::optional<double> aperture_area_m2;
    // Optional main-lobe shaping; derived from the directive gain when absent.
    std::optional<double> beamwidth_az_deg;
    std::optional<double> beamwidth_el_deg;

    friend bool operator==(SeeType const&, SeeType const&) = default;
};

enum class Mount : std::uint8_t { Facade, Pole };

struct CandidateSite {
    Vec3 position;
    Mount mount{Mount::Pole};
    std::optional<Vec3> normal; // outward wall normal, facade only
    std::vector<SeeKind> admissible_kinds;

    [[nodiscard]] bool admits(SeeKind k) const noexcept
    {
        return std::find(admissible_kinds.begin(), admissible_kinds.end(), k) != admissible_kinds.end();
    }

    friend bool operator==(CandidateSite const&, CandidateSite const&) = default;
};

/// Uniform sample plane at fixed height. Sample (ix, iy) sits at
/// origin + spacing * (ix, iy); cells are stored row-major (iy outer).
struct GridSpec {
    Vec2 origin;
    double spacing{1.0};
    int nx{1};
    int ny{1};
    double height{1.5};

    [[nodiscard]] std::size_t cell_count() const noexcept
    {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    }
    [[nodiscard]] std::size_t index(int ix, int iy) const noexcept
    {
        return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(ix);
    }
    [[nodiscard]] int ix_of(std::size_t cell) const noexcept { return static_cast<int>(cell % static_cast<std::size_t>(nx)); }
    [[nodiscard]] int iy_of(std::size_t cell) const noexcept { return static_cast<int>(cell / static_cast<std::size_t>(nx)); }
    [[nodiscard]] Vec2 sample_xy(std::size_t cell) const noexcept
    {
        return {origin.x + spacing * ix_of(cell), origin.y + spacing * iy_of(cell)};
    }
    [[nodiscard]] Vec3 sample(std::size_t cell) const noexcept
    {
        auto const p = sample_xy(cell);
        return {p.x, p.y, height};
    }
    [[nodiscard]] double cell_area() const noexcept { return spacing * spacing; }
    [[nodiscard]] Vec2 extent_hi() const noexcept
    {
        return {origin.x + spacing * (nx - 1), origin.y + spacing * (ny - 1)};
    }

    friend bool operator==(GridSpec const&, GridSpec const&) = default;
};

struct PropagationSettings {
    double penetration_loss_db{20.0}; // per blocking building

    friend bool operator==(PropagationSettings const&, PropagationSettings const&) = default;
};

struct Scenario {
    double frequency_hz{3.5e9};
    GridSpec grid;
    Bts bts;
    std::vector<Building> buildings;
    std::vector<SeeType> catalog;
    std::vector<CandidateSite> sites;
    PropagationSettings propagation;

    [[nodiscard]] std::size_t instants() const noexcept { return bts.instants.size(); }
    [[nodiscard]] std::size_t sector_count() const noexcept
    {
        return bts.instants.empty() ? 0 : bts.instants.front().sectors.size();
    }
    /// Gene value (1-based catalog position) of a kind, or nullopt.
    [[nodiscard]] std::optional<int> gene_of(SeeKind k) const noexcept
    {
        for (std::size_t i = 0; i < catalog.size(); ++i) {
            if (catalog[i].kind == k) {
                return static_cast<int>(i) + 1;
            }
        }
        return std::nullopt;
    }
    [[nodiscard]] SeeType const& see_type(int gene) const { return catalog.at(static_cast<std::size_t>(gene - 1)); }

    friend bool operator==(Scenario const&, Scenario const&) = default;
};

inline double wavelength(double frequency_hz) { return kSpeedOfLight / frequency_hz; }
inline double wavelength(Scenario const& s) { return wavelength(s.frequency_hz); }

/// Largest sector transmit power over all instants, watts.
inline double max_tx_power_w(Scenario const& s) noexcept
{
    double best = 0.0;
    for (auto const& inst : s.bts.instants) {
        for (auto const& sec : inst.sectors) {
            best = std::max(best, sec.tx_power_w);
        }
    }
    return best;
}

inline double max_sector_gain_dbi(Scenario const& s) noexcept
{
    double best = -std::numeric_limits<double>::infinity();
    for (auto const& inst : s.bts.instants) {
        for (auto const& sec : inst.sectors) {
            best = std::max(best, sec.max_gain_dbi);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// validation

inline void validate(Scenario const& s)
{
    auto fail = [](std::string const& msg) { throw ScenarioValidationError(msg); };

    if (!(s.frequency_hz > 0.0) || !std::isfinite(s.frequency_hz)) {
        fail("frequency_hz: must be > 0");
    }
    if (!(s.grid.spacing > 0.0)) {
        fail("grid.spacing_m: must be > 0");
    }
    if (s.grid.nx < 1 || s.grid.ny < 1) {
        fail("grid: nx and ny must be >= 1");
    }
    if (!(s.bts.position.z > 0.0)) {
        fail("bts.position: z must be > 0");
    }
    if (s.bts.instants.empty()) {
        fail("bts.time_instants: at least one time instant required");
    }
    auto const v = s.bts.instants.front().sectors.size();
    if (v == 0) {
        fail("bts.time_instants[0]: at least one sector required");
    }
    for (std::size_t t = 0; t < s.bts.instants.size(); ++t) {
        auto const& inst = s.bts.instants[t];
        std::string const where = "bts.time_instants[" + std::to_string(t) + "]";
        if (inst.sectors.size() != v) {
            fail(where + ": sector count differs from time instant 0 (" + std::to_string(inst.sectors.size())
                 + " vs " + std::to_string(v) + ")");
        }
        for (std::size_t k = 0; k < inst.sectors.size(); ++k) {
            auto const& sec = inst.sectors[k];
            std::string const sw = where + ".sectors[" + std::to_string(k) + "]";
            if (!(sec.tx_power_w > 0.0)) {
                fail(sw + ": tx_power_w must be > 0");
            }
            if (!(sec.azimuth_deg >= 0.0 && sec.azimuth_deg < 360.0)) {
                fail(sw + ": azimuth_deg must lie in [0, 360)");
            }
            for (double bw : {sec.beamwidth_az_deg, sec.beamwidth_el_deg}) {
                if (!(bw > 0.0 && bw < 180.0)) {
                    fail(sw + ": beamwidths must lie in (0, 180)");
                }
            }
        }
    }
    for (std::size_t b = 0; b < s.buildings.size(); ++b) {
        auto const& bl = s.buildings[b];
        std::string const where = "buildings[" + std::to_string(b) + "]";
        if (bl.footprint.size() < 3) {
            fail(where + ": polygon needs at least 3 vertices");
        }
        if (!polygon_is_simple(bl.footprint)) {
            fail(where + ": polygon is not simple (self-intersecting or degenerate)");
        }
        if (!(bl.height > 0.0)) {
            fail(where + ": height must be > 0");
        }
    }
    for (std::size_t i = 0; i < s.catalog.size(); ++i) {
        auto const& c = s.catalog[i];
        std::string const where = "catalog[" + std::to_string(i) + "] (" + std::string(to_string(c.kind)) + ")";
        for (std::size_t j = 0; j < i; ++j) {
            if (s.catalog[j].kind == c.kind) {
                fail(where + ": duplicate kind in catalog");
            }
        }
        if (!(c.install_cost >= 0.0)) {
            fail(where + ": install_cost must be >= 0");
        }
        if (!(c.energy_w >= 0.0)) {
            fail(where + ": energy_w must be >= 0");
        }
        if (is_passive(c.kind)) {
            if (c.tx_power_dbm) {
                fail(where + ": passive kinds carry no tx_power_dbm");
            }
            if (c.kind == SeeKind::SpEms && c.energy_w != 0.0) {
                fail(where + ": SP-EMS consumes no energy (energy_w must be 0)");
            }
            if (!c.aperture_area_m2 || !(*c.aperture_area_m2 > 0.0)) {
                fail(where + ": passive kinds need aperture_area_m2 > 0");
            }
            if (!c.reflection_efficiency || !(*c.reflection_efficiency > 0.0 && *c.reflection_efficiency <= 1.0)) {
                fail(where + ": reflection_efficiency must lie in (0, 1]");
            }
        }
        else {
            if (!c.tx_power_dbm || !c.gain_dbi || !c.sensitivity_dbm) {
                fail(where + ": active kinds need tx_power_dbm, gain_dbi and sensitivity_dbm");
            }
        }
        for (auto bw : {c.beamwidth_az_deg, c.beamwidth_el_deg}) {
            if (bw && !(*bw > 0.0 && *bw < 180.0)) {
                fail(where + ": beamwidths must lie in (0, 180)");
            }
        }
    }
    auto const hi = s.grid.extent_hi();
    for (std::size_t n = 0; n < s.sites.size(); ++n) {
        auto const& site = s.sites[n];
        std::string const where = "sites[" + std::to_string(n) + "]";
        if (site.admissible_kinds.empty()) {
            fail(where + ": admissible kinds must not be empty");
        }
        if (site.mount == Mount::Facade) {
            for (auto k : site.admissible_kinds) {
                if (!is_passive(k)) {
                    fail(where + ": facade admits only EMS kinds (got " + std::string(to_string(k)) + ")");
                }
            }
            if (!site.normal) {
                fail(where + ": facade site needs an outward wall normal");
            }
        }
        if (site.normal && std::abs(norm(*site.normal) - 1.0) > 1e-6) {
            fail(where + ": normal must be a unit vector");
        }
        auto const& p = site.position;
        if (p.x < s.grid.origin.x || p.x > hi.x || p.y < s.grid.origin.y || p.y > hi.y) {
            fail(where + ": position lies outside the scenario bounds");
        }
        for (auto k : site.admissible_kinds) {
            if (!s.gene_of(k)) {
                fail(where + ": kind " + std::string(to_string(k)) + " is not in the catalog");
            }
        }
    }
    if (!(s.propagation.penetration_loss_db >= 0.0)) {
        fail("propagation.penetration_loss_db: must be >= 0");
    }
}

// ---------------------------------------------------------------------------
// JSON schema

namespace detail {

    inline json const& require(json const& j, char const* key, std::string const& where)
    {
        if (!j.is_object() || !j.contains(key)) {
            throw ScenarioParseError(where + ": missing key '" + key + "'");
        }
        return j.at(key);
    }

    inline double number(json const& j, std::string const& where)
    {
        if (!j.is_number()) {
            throw ScenarioParseError(where + ": expected a number");
        }
        return j.get<double>();
    }

    inline double req_number(json const& j, char const* key, std::string const& where)
    {
        return number(require(j, key, where), where + "." + key);
    }

    inline std::optional<double> opt_number(json const& j, char const* key, std::string const& where)
    {
        if (!j.contains(key) || j.at(key).is_null()) {
            return std::nullopt;
        }
        return number(j.at(key), where + "." + key);
    }

    inline int req_int(json const& j, char const* key, std::string const& where)
    {
        auto const& v = require(j, key, where);
        if (!v.is_number_integer()) {
            throw ScenarioParseError(where + "." + key + ": expected an integer");
        }
        return v.get<int>();
    }

    inline json const& req_array(json const& j, char const* key, std::string const& where)
    {
        auto const& v = require(j, key, where);
        if (!v.is_array()) {
            throw ScenarioParseError(where + "." + key + ": expected an array");
        }
        return v;
    }

    inline Vec2 vec2(json const& j, std::string const& where)
    {
        if (!j.is_array() || j.size() != 2) {
            throw ScenarioParseError(where + ": expected [x, y]");
        }
        return {number(j[0], where), number(j[1], where)};
    }

    inline Vec3 vec3(json const& j, std::string const& where)
    {
        if (!j.is_array() || j.size() != 3) {
            throw ScenarioParseError(where + ": expected [x, y, z]");
        }
        return {number(j[0], where), number(j[1], where), number(j[2], where)};
    }

    inline SeeKind kind(json const& j, std::string const& where)
    {
        if (!j.is_string()) {
            throw ScenarioParseError(where + ": expected a kind string");
        }
        auto k = parse_kind(j.get<std::string>());
        if (!k) {
            throw ScenarioParseError(where + ": unknown kind '" + j.get<std::string>() + "'");
        }
        return *k;
    }

    inline json to_json(Vec2 v) { return json::array({v.x, v.y}); }
    inline json to_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }

    inline Building parse_building(json const& jb, std::string const& where)
    {
        Building b;
        for (std::size_t k = 0; auto const& p : req_array(jb, "footprint", where)) {
            b.footprint.push_back(vec2(p, where + ".footprint[" + std::to_string(k++) + "]"));
        }
        b.height = req_number(jb, "height_m", where);
        b.permittivity = opt_number(jb, "permittivity", where).value_or(4.0);
        b.conductivity = opt_number(jb, "conductivity_s_per_m", where).value_or(0.01);
        return b;
    }

} // namespace detail

/// Parse and validate a scenario document.
inline Scenario parse_scenario(json const& j)
{
    using namespace detail;
    if (!j.is_object()) {
        throw ScenarioParseError("scenario: top level must be an object");
    }
    Scenario s;
    s.frequency_hz = req_number(j, "frequency_hz", "scenario");

    auto const& g = require(j, "grid", "scenario");
    s.grid.origin = vec2(require(g, "origin", "grid"), "grid.origin");
    s.grid.spacing = req_number(g, "spacing_m", "grid");
    s.grid.nx = req_int(g, "nx", "grid");
    s.grid.ny = req_int(g, "ny", "grid");
    s.grid.height = req_number(g, "height_m", "grid");

    auto const& b = require(j, "bts", "scenario");
    s.bts.position = vec3(require(b, "position", "bts"), "bts.position");
    for (std::size_t t = 0; auto const& ji : req_array(b, "time_instants", "bts")) {
        std::string const where = "bts.time_instants[" + std::to_string(t++) + "]";
        BtsInstant inst;
        for (std::size_t k = 0; auto const& js : req_array(ji, "sectors", where)) {
            std::string const sw = where + ".sectors[" + std::to_string(k++) + "]";
            BtsSector sec;
            sec.azimuth_deg = req_number(js, "azimuth_deg", sw);
            sec.downtilt_deg = req_number(js, "downtilt_deg", sw);
            sec.tx_power_w = req_number(js, "tx_power_w", sw);
            sec.max_gain_dbi = req_number(js, "max_gain_dbi", sw);
            sec.beamwidth_az_deg = opt_number(js, "beamwidth_az_deg", sw).value_or(65.0);
            sec.beamwidth_el_deg = opt_number(js, "beamwidth_el_deg", sw).value_or(10.0);
            inst.sectors.push_back(sec);
        }
        s.bts.instants.push_back(std::move(inst));
    }

    if (j.contains("buildings")) {
        for (std::size_t k = 0; auto const& jb : req_array(j, "buildings", "scenario")) {
            s.buildings.push_back(parse_building(jb, "buildings[" + std::to_string(k++) + "]"));
        }
    }

    if (j.contains("catalog")) {
        for (std::size_t k = 0; auto const& jc : req_array(j, "catalog", "scenario")) {
            std::string const where = "catalog[" + std::to_string(k++) + "]";
            SeeType c;
            c.kind = kind(require(jc, "kind", where), where + ".kind");
            c.tx_power_dbm = opt_number(jc, "tx_power_dbm", where);
            c.install_cost = req_number(jc, "install_cost", where);
            c.energy_w = req_number(jc, "energy_w", where);
            c.gain_dbi = opt_number(jc, "gain_dbi", where);
            c.sensitivity_dbm = opt_number(jc, "sensitivity_dbm", where);
            c.reflection_efficiency = opt_number(jc, "reflection_efficiency", where);
            c.aperture_area_m2 = opt_number(jc, "aperture_area_m2", where);
            c.beamwidth_az_deg = opt_number(jc, "beamwidth_az_deg", where);
            c.beamwidth_el_deg = opt_number(jc, "beamwidth_el_deg", where);
            if (is_passive(c.kind) && !c.reflection_efficiency) {
                c.reflection_efficiency = 0.8;
            }
            s.catalog.push_back(c);
        }
    }

    if (j.contains("sites")) {
        for (std::size_t k = 0; auto const& js : req_array(j, "sites", "scenario")) {
            std::string const where = "sites[" + std::to_string(k++) + "]";
            CandidateSite site;
            site.position = vec3(require(js, "position", where), where + ".position");
            auto const& mount = require(js, "mount", where);
            if (mount == "facade") {
                site.mount = Mount::Facade;
            }
            else if (mount == "pole") {
                site.mount = Mount::Pole;
            }
            else {
                throw ScenarioParseError(where + ".mount: expected \"facade\" or \"pole\"");
            }
            if (js.contains("normal") && !js.at("normal").is_null()) {
                site.normal = vec3(js.at("normal"), where + ".normal");
            }
            for (auto const& jk : req_array(js, "kinds", where)) {
                site.admissible_kinds.push_back(kind(jk, where + ".kinds"));
            }
            s.sites.push_back(std::move(site));
        }
    }

    if (j.contains("propagation")) {
        auto const& jp = j.at("propagation");
        s.propagation.penetration_loss_db = opt_number(jp, "penetration_loss_db", "propagation").value_or(20.0);
    }

    validate(s);
    return s;
}

inline json to_json(Scenario const& s)
{
    using detail::to_json;
    json j;
    j["frequency_hz"] = s.frequency_hz;
    j["grid"] = {{"origin", to_json(s.grid.origin)},
                 {"spacing_m", s.grid.spacing},
                 {"nx", s.grid.nx},
                 {"ny", s.grid.ny},
                 {"height_m", s.grid.height}};
    json instants = json::array();
    for (auto const& inst : s.bts.instants) {
        json sectors = json::array();
        for (auto const& sec : inst.sectors) {
            sectors.push_back({{"azimuth_deg", sec.azimuth_deg},
                               {"downtilt_deg", sec.downtilt_deg},
                               {"tx_power_w", sec.tx_power_w},
                               {"max_gain_dbi", sec.max_gain_dbi},
                               {"beamwidth_az_deg", sec.beamwidth_az_deg},
                               {"beamwidth_el_deg", sec.beamwidth_el_deg}});
        }
        instants.push_back({{"sectors", sectors}});
    }
    j["bts"] = {{"position", to_json(s.bts.position)}, {"time_instants", instants}};

    json buildings = json::array();
    for (auto const& b : s.buildings) {
        json fp = json::array();
        for (auto const& p : b.footprint) {
            fp.push_back(to_json(p));
        }
        buildings.push_back({{"footprint", fp},
                             {"height_m", b.height},
                             {"permittivity", b.permittivity},
                             {"conductivity_s_per_m", b.conductivity}});
    }
    j["buildings"] = buildings;

    json catalog = json::array();
    for (auto const& c : s.catalog) {
        json jc = {{"kind", std::string(to_string(c.kind))}, {"install_cost", c.install_cost}, {"energy_w", c.energy_w}};
        auto put = [&jc](char const* key, std::optional<double> const& v) {
            if (v) {
                jc[key] = *v;
            }
        };
        put("tx_power_dbm", c.tx_power_dbm);
        put("gain_dbi", c.gain_dbi);
        put("sensitivity_dbm", c.sensitivity_dbm);
        put("reflection_efficiency", c.reflection_efficiency);
        put("aperture_area_m2", c.aperture_area_m2);
        put("beamwidth_az_deg", c.beamwidth_az_deg);
        put("beamwidth_el_deg", c.beamwidth_el_deg);
        catalog.push_back(std::move(jc));
    }
    j["catalog"] = catalog;

    json sites = json::array();
    for (auto const& site : s.sites) {
        json kinds = json::array();
        for (auto k : site.admissible_kinds) {
            kinds.push_back(std::string(to_string(k)));
        }
        json js = {{"position", to_json(site.position)},
                   {"mount", site.mount == Mount::Facade ? "facade" : "pole"},
                   {"kinds", kinds}};
        if (site.normal) {
            js["normal"] = to_json(*site.normal);
        }
        sites.push_back(std::move(js));
    }
    j["sites"] = sites;
    j["propagation"] = {{"penetration_loss_db", s.propagation.penetration_loss_db}};
    return j;
}

inline Scenario load_scenario(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ScenarioParseError("cannot open scenario file '" + path.string() + "'");
    }
    json j;
    try {
        in >> j;
    }
    catch (json::parse_error const& e) {
        throw ScenarioParseError("malformed scenario file '" + path.string() + "': " + e.what());
    }
    return parse_scenario(j);
}

inline void save_scenario(Scenario const& s, std::filesystem::path const& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write scenario file '" + path.string() + "'");
    }
    out << to_json(s).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// content hashing

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept
{
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Stable hash of the canonical serialization (object keys sorted).
inline std::uint64_t scenario_hash(Scenario const& s) { return fnv1a64(to_json(s).dump()); }

inline std::string hex64(std::uint64_t v)
{
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// GeoJSON-like footprint ingestion

/// Buildings from a FeatureCollection of Polygon features already expressed in
/// scenario-local meters. Each feature needs `properties.height_m`; the
/// closing vertex of the outer ring is dropped if repeated.
inline std::vector<Building> buildings_from_geojson(json const& fc)
{
    using namespace detail;
    if (!fc.is_object() || fc.value("type", "") != "FeatureCollection") {
        throw ScenarioParseError("geojson: expected a FeatureCollection");
    }
    std::vector<Building> out;
    for (std::size_t k = 0; auto const& f : req_array(fc, "features", "geojson")) {
        std::string const where = "features[" + std::to_string(k++) + "]";
        auto const& geom = require(f, "geometry", where);
        if (geom.value("type", "") != "Polygon") {
            throw ScenarioParseError(where + ": only Polygon geometries are supported");
        }
        auto const& rings = req_array(geom, "coordinates", where + ".geometry");
        if (rings.empty()) {
            throw ScenarioParseError(where + ": polygon has no rings");
        }
        Building b;
        for (auto const& p : rings.front()) {
            b.footprint.push_back(vec2(p, where + ".coordinates"));
        }
        if (b.footprint.size() > 1 && b.footprint.front() == b.footprint.back()) {
            b.footprint.pop_back();
        }
        auto const& props = require(f, "properties", where);
        b.height = req_number(props, "height_m", where + ".properties");
        b.permittivity = opt_number(props, "permittivity", where).value_or(4.0);
        b.conductivity = opt_number(props, "conductivity_s_per_m", where).value_or(0.01);
        if (b.footprint.size() < 3 || !polygon_is_simple(b.footprint)) {
            throw ScenarioValidationError(where + ": footprint is not a simple polygon");
        }
        out.push_back(std::move(b));
    }
    return out;
}

} // namespace seme

#endif // SEME_SCENARIO_HPP

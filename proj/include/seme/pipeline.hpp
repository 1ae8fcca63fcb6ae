#ifndef SEME_PIPELINE_HPP
#define SEME_PIPELINE_HPP

// Subcommand pipeline: sites -> dbgen -> optimize -> report. Every stage
// recomputes the cheap upstream products (reference blind spot, site
// qualification) from the scenario and validates the cached map database
// against their content hash.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "seme/analysis.hpp"
#include "seme/blindspot.hpp"
#include "seme/nsga2.hpp"
#include "seme/objectives.hpp"
#include "seme/propagation.hpp"
#include "seme/scenario.hpp"
#include "seme/siteplanner.hpp"

namespace seme {

namespace fs = std::filesystem;

/// Invalid flags or configuration values (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Cached map database missing or built from different inputs (exit code 3).
class StaleCacheError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    fs::path scenario;
    double pth_dbm{-65.0};
    CombiningMode mode{CombiningMode::Coherent};
    GaConfig ga{};
    bool population_set{false}; // otherwise max(4, 2N) over retained sites
    std::size_t restarts{1};
    std::size_t roi_min_cells{4};
    CoverageUnits coverage_units{CoverageUnits::AreaWeighted};
    fs::path out{"out"};
    fs::path archive;  // report input; default <out>/archive_seed<seed>.csv
    unsigned workers{0}; // 0 = hardware concurrency
    bool force{false};   // dbgen: rebuild even on a cache hit
    double cdf_lo_dbm{-80.0};
    double cdf_hi_dbm{-30.0};
    std::size_t cdf_points{101};

    void validate() const
    {
        if (!std::isfinite(pth_dbm)) {
            throw ConfigError("--pth-dbm must be finite");
        }
        if (restarts == 0) {
            throw ConfigError("--restarts must be at least 1");
        }
        if (roi_min_cells == 0) {
            throw ConfigError("--roi-min-cells must be at least 1");
        }
        if (!(cdf_lo_dbm < cdf_hi_dbm) || cdf_points < 2) {
            throw ConfigError("CDF grid needs lo < hi and at least 2 points");
        }
        try {
            GaConfig g = ga;
            if (!population_set) {
                g.population = 4;
            }
            g.validate();
        }
        catch (std::invalid_argument const& e) {
            throw ConfigError(e.what());
        }
    }
};

/// Parameters that determine output content. Paths are left out so that two
/// runs into different directories produce identical files.
inline nlohmann::json config_echo(RunConfig const& c)
{
    return {{"pth_dbm", c.pth_dbm},
            {"mode", std::string(to_string(c.mode))},
            {"population", c.population_set ? nlohmann::json(c.ga.population) : nlohmann::json("auto")},
            {"iterations", c.ga.iterations},
            {"crossover_rate", c.ga.crossover_rate},
            {"mutation_rate", c.ga.mutation_rate},
            {"tourney", c.ga.tourney},
            {"crossover", c.ga.crossover == CrossoverKind::Uniform ? "uniform" : "one-point"},
            {"seed", c.ga.seed},
            {"restarts", c.restarts},
            {"roi_min_cells", c.roi_min_cells},
            {"coverage_units", c.coverage_units == CoverageUnits::AreaWeighted ? "area_m2" : "normalized"},
            {"cdf_dbm", {c.cdf_lo_dbm, c.cdf_hi_dbm, c.cdf_points}}};
}

inline std::string header_comment(std::uint64_t scn_hash, RunConfig const& c)
{
    return "# scenario_hash: " + hex64(scn_hash) + "\n# config: " + config_echo(c).dump() + "\n";
}

/// Upstream products shared by every stage.
struct Prepared {
    Scenario scn;
    std::uint64_t hash{0};
    BlindSpot blindspot;
    Qualification qual;
    std::uint64_t db_key{0};
};

/// Reference coverage (no SEEs) thresholded into a tracked blind spot.
inline BlindSpot reference_blindspot(Scenario const& scn, double pth_dbm, std::size_t min_cells)
{
    MapDatabase const ref = build_database(scn, {}, CombiningMode::Coherent, 1);
    Chromosome const zero(scn.sites.size(), 0);
    std::vector<CoverageMap> maps;
    for (std::size_t t = 0; t < ref.instants; ++t) {
        maps.push_back({scn.grid, power_map(ref, zero, t)});
    }
    return extract_blindspot(maps, pth_dbm, min_cells);
}

inline Prepared prepare(RunConfig const& cfg)
{
    cfg.validate();
    Prepared p;
    p.scn = load_scenario(cfg.scenario);
    p.hash = scenario_hash(p.scn);
    p.blindspot = reference_blindspot(p.scn, cfg.pth_dbm, cfg.roi_min_cells);
    p.qual = qualify_sites(p.scn, p.blindspot, cfg.pth_dbm);
    p.db_key = database_key(p.scn, p.qual.plan, cfg.mode);
    return p;
}

// ---------------------------------------------------------------------------
// output helpers

/// Advisory exclusive lock on <out>/.lock for the lifetime of the object.
class OutputLock {
public:
    explicit OutputLock(fs::path const& dir)
    {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) {
            throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
        }
        auto const path = dir / ".lock";
        fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
        if (fd_ < 0) {
            throw ConfigError("output directory '" + dir.string() + "' is not writable");
        }
        if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd_);
            throw std::runtime_error("output directory '" + dir.string() + "' is in use by another invocation");
        }
    }
    OutputLock(OutputLock const&) = delete;
    OutputLock& operator=(OutputLock const&) = delete;
    ~OutputLock()
    {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }

private:
    int fd_{-1};
};

inline void write_text(fs::path const& path, std::string const& content)
{
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
}

inline std::string read_text(fs::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline fs::path database_path(RunConfig const& c) { return c.out / "maps.db"; }
inline fs::path archive_path(RunConfig const& c, std::uint64_t seed)
{
    return c.out / ("archive_seed" + std::to_string(seed) + ".csv");
}
inline fs::path trace_path(RunConfig const& c, std::uint64_t seed)
{
    return c.out / ("trace_seed" + std::to_string(seed) + ".csv");
}

/// Load the cached database, insisting that it was built from the same inputs.
inline MapDatabase load_current_database(RunConfig const& cfg, Prepared const& p)
{
    auto const path = database_path(cfg);
    if (!fs::exists(path)) {
        throw StaleCacheError("no map database at '" + path.string() + "'; run `dbgen` first");
    }
    std::ifstream in(path, std::ios::binary);
    nlohmann::json h;
    try {
        h = read_database_header(in);
    }
    catch (DatabaseFormatError const& e) {
        throw StaleCacheError(std::string(e.what()) + "; rerun `dbgen`");
    }
    if (h.value("key", std::string{}) != hex64(p.db_key)) {
        throw StaleCacheError("map database '" + path.string()
                              + "' was built from a different scenario or configuration; rerun `dbgen`");
    }
    return load_database(path);
}

// ---------------------------------------------------------------------------
// stages

/// Writes feasibility.csv (one row per site x RoI x class) and a region
/// raster per RoI.
inline int cmd_sites(RunConfig const& cfg, std::ostream& log)
{
    auto const p = prepare(cfg);
    OutputLock lock(cfg.out);
    std::ostringstream rep;
    rep << header_comment(p.hash, cfg);
    write_feasibility_csv(p.qual, rep);
    write_text(cfg.out / "feasibility.csv", rep.str());
    for (std::size_t w = 0; w < p.blindspot.rois.size(); ++w) {
        std::ostringstream r;
        r << header_comment(p.hash, cfg);
        write_region_raster_csv(p.scn, p.blindspot.rois[w], cfg.pth_dbm, r);
        write_text(cfg.out / ("region_roi" + std::to_string(w + 1) + ".csv"), r.str());
    }
    log << "sites: " << p.scn.sites.size() << " candidate(s), " << p.blindspot.rois.size() << " RoI(s), "
        << p.qual.retained_sites() << " retained, " << p.qual.plan.size() << " feasible (site, kind) pair(s)\n";
    return 0;
}

/// Builds <out>/maps.db unless a database with the same key is present.
inline int cmd_dbgen(RunConfig const& cfg, std::ostream& log)
{
    auto const p = prepare(cfg);
    OutputLock lock(cfg.out);
    auto const path = database_path(cfg);
    if (!cfg.force && fs::exists(path)) {
        std::ifstream in(path, std::ios::binary);
        try {
            if (read_database_header(in).value("key", std::string{}) == hex64(p.db_key)) {
                log << "dbgen: cache hit (key " << hex64(p.db_key) << "), nothing to do\n";
                return 0;
            }
        }
        catch (DatabaseFormatError const&) {
        }
        log << "dbgen: cache miss, rebuilding\n";
    }
    auto const db = build_database(p.scn, p.qual.plan, cfg.mode,
                                   cfg.workers ? cfg.workers : std::thread::hardware_concurrency());
    auto const tmp = fs::path(path).concat(".tmp");
    save_database(db, tmp, config_echo(cfg));
    fs::rename(tmp, path);
    log << "dbgen: wrote " << path.string() << " with " << db.entries.size() << " entries + reference (key "
        << hex64(p.db_key) << ")\n";
    return 0;
}

struct RunSummary {
    std::uint64_t seed{0};
    std::size_t archive_size{0};
    ObjectiveVector best; // per-objective minimum over the archive
};

/// Runs R seeded restarts (seeds S .. S+R-1), each writing an archive and a
/// trace, then a manifest and a restart summary.
inline int cmd_optimize(RunConfig const& cfg, std::ostream& log)
{
    auto const p = prepare(cfg);
    OutputLock lock(cfg.out);
    auto const db = load_current_database(cfg, p);
    Evaluator const eval(db, p.scn.catalog, p.qual.kinds, p.blindspot.cell_sets(), cfg.pth_dbm, cfg.coverage_units);

    GaConfig ga = cfg.ga;
    if (!cfg.population_set) {
        ga.population = GaConfig::for_sites(p.qual.retained_sites()).population;
    }
    std::string const head = header_comment(p.hash, cfg);
    std::vector<RunSummary> runs;
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
        ga.seed = cfg.ga.seed + r;
        std::vector<GenerationStats> trace;
        auto const archive = evolve(ga, eval, p.qual.kinds, &trace);
        std::ostringstream a;
        a << head;
        write_archive_csv(archive, a);
        write_text(archive_path(cfg, ga.seed), a.str());
        std::ostringstream tr;
        tr << head;
        write_trace_csv(trace, tr);
        write_text(trace_path(cfg, ga.seed), tr.str());

        RunSummary s{ga.seed, archive.size(), {}};
        auto const f = archive.objectives();
        for (std::size_t k = 0; k < 3; ++k) {
            double m = f.front()[k];
            for (auto const& v : f) {
                m = std::min(m, v[k]);
            }
            (k == 0 ? s.best.coverage : k == 1 ? s.best.cost : s.best.energy) = m;
        }
        runs.push_back(s);
        log << "optimize: seed " << ga.seed << " -> " << archive.size() << " Pareto solution(s)\n";
    }

    std::ostringstream sum;
    sum << head << "seed,archive_size,min_phi_cv,min_phi_cs,min_phi_ec\n";
    char buf[160];
    for (auto const& s : runs) {
        std::snprintf(buf, sizeof buf, "%llu,%zu,%.17g,%.17g,%.17g\n", static_cast<unsigned long long>(s.seed),
                      s.archive_size, s.best.coverage, s.best.cost, s.best.energy);
        sum << buf;
    }
    // min / median / max of each column across restarts
    auto column = [&](auto get) {
        std::vector<double> v;
        for (auto const& s : runs) {
            v.push_back(get(s));
        }
        std::sort(v.begin(), v.end());
        double const med = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
        return std::array<double, 3>{v.front(), med, v.back()};
    };
    auto const sz = column([](auto const& s) { return static_cast<double>(s.archive_size); });
    auto const cv = column([](auto const& s) { return s.best.coverage; });
    auto const cs = column([](auto const& s) { return s.best.cost; });
    auto const ec = column([](auto const& s) { return s.best.energy; });
    char const* names[3] = {"min", "median", "max"};
    for (std::size_t i = 0; i < 3; ++i) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g\n", names[i], sz[i], cv[i], cs[i], ec[i]);
        sum << buf;
    }
    write_text(cfg.out / "restarts_summary.csv", sum.str());

    nlohmann::json m = {{"scenario_hash", hex64(p.hash)},
                        {"database_key", hex64(p.db_key)},
                        {"config", config_echo(cfg)},
                        {"population", ga.population},
                        {"sites", p.scn.sites.size()},
                        {"retained_sites", p.qual.retained_sites()},
                        {"rng", "mt19937_64"}};
    nlohmann::json jr = nlohmann::json::array();
    for (auto const& s : runs) {
        jr.push_back({{"seed", s.seed},
                      {"archive", archive_path(cfg, s.seed).filename().string()},
                      {"trace", trace_path(cfg, s.seed).filename().string()},
                      {"archive_size", s.archive_size}});
    }
    m["runs"] = jr;
    write_text(cfg.out / "manifest.json", m.dump(2) + "\n");
    return 0;
}

/// Representative solutions, reduction statistics, CDFs and thresholded
/// maps for an archive.
inline int cmd_report(RunConfig const& cfg, std::ostream& log)
{
    auto const p = prepare(cfg);
    OutputLock lock(cfg.out);
    auto const db = load_current_database(cfg, p);
    auto const apath = cfg.archive.empty() ? archive_path(cfg, cfg.ga.seed) : cfg.archive;
    std::istringstream ain(read_text(apath));
    auto const archive = read_archive_csv(ain);
    if (archive.empty()) {
        throw std::runtime_error("archive '" + apath.string() + "' is empty");
    }
    for (auto const& m : archive.members) {
        if (m.chromosome.size() != p.scn.sites.size()) {
            throw ConfigError("archive '" + apath.string() + "' does not match the scenario's site count");
        }
    }
    std::string const head = header_comment(p.hash, cfg);
    auto const& catalog = p.scn.catalog;
    auto const rows = representative_rows(archive, catalog);

    // every archive member with its representative flags and device counts
    std::ostringstream pf;
    pf << head << "index,flags,phi_cv,phi_cs,phi_ec,n_sees,n_sp_ems,n_rp_ems,n_sr,n_iab,cost,energy_w,genes\n";
    char buf[320];
    for (std::size_t i = 0; i < archive.size(); ++i) {
        std::string flags;
        for (auto const& r : rows) {
            if (r.index == i) {
                flags += (flags.empty() ? "" : "+") + r.label;
            }
        }
        auto const& e = archive.members[i];
        auto const s = summarize(e.chromosome, catalog);
        std::snprintf(buf, sizeof buf, "%zu,%s,%.17g,%.17g,%.17g,%zu,%zu,%zu,%zu,%zu,%.17g,%.17g,", i,
                      flags.c_str(), e.objectives.coverage, e.objectives.cost, e.objectives.energy, s.devices,
                      s.per_kind[0], s.per_kind[1], s.per_kind[2], s.per_kind[3], s.cost, s.energy_w);
        pf << buf << to_string(e.chromosome) << '\n';
    }
    write_text(cfg.out / "pareto_report.csv", pf.str());

    std::ostringstream rep;
    rep << head;
    write_representatives_csv(rows, rep);
    write_text(cfg.out / "representatives.csv", rep.str());

    // reference (no SEEs) first, then the four representatives
    std::vector<std::pair<std::string, Chromosome>> solutions{{"REF", Chromosome(p.scn.sites.size(), 0)}};
    for (auto const& r : rows) {
        solutions.emplace_back(r.label, r.entry.chromosome);
    }
    auto const p_hat = linspace(cfg.cdf_lo_dbm, cfg.cdf_hi_dbm, cfg.cdf_points);
    std::ostringstream red;
    red << head;
    bool first = true;
    for (auto const& [label, chi] : solutions) {
        write_reduction_csv(label, reduction_stats(db, chi, p.blindspot), red, first);
        first = false;
        for (std::size_t t = 0; t < db.instants; ++t) {
            std::string const suffix = label + "_t" + std::to_string(t + 1) + ".csv";
            auto const cells = p.blindspot.instants[t].cells();
            if (!cells.empty()) {
                auto const prob = cdf(db, chi, cells, t, p_hat);
                std::ostringstream c;
                c << head;
                write_cdf_csv(p_hat, prob, c);
                write_text(cfg.out / ("cdf_" + suffix), c.str());
            }
            std::ostringstream mp;
            mp << head;
            write_thresholded_map_csv(db, chi, t, cfg.pth_dbm, mp);
            write_text(cfg.out / ("map_" + suffix), mp.str());
        }
    }
    write_text(cfg.out / "reduction.csv", red.str());
    log << "report: " << archive.size() << " archive member(s); BC=" << rows[0].index << " BCS=" << rows[1].index
        << " CC=" << rows[2].index << " CE=" << rows[3].index << "\n";
    return 0;
}

/// Replaces the scenario's buildings with the polygons of a GeoJSON file and
/// writes the result to `output`.
inline int cmd_import_buildings(fs::path const& scenario, fs::path const& geojson, fs::path const& output,
                                std::ostream& log)
{
    auto scn = load_scenario(scenario);
    nlohmann::json g;
    try {
        g = nlohmann::json::parse(read_text(geojson));
    }
    catch (nlohmann::json::parse_error const& e) {
        throw ScenarioParseError(geojson.string() + ": " + e.what());
    }
    scn.buildings = buildings_from_geojson(g);
    validate(scn);
    save_scenario(scn, output);
    log << "import-buildings: " << scn.buildings.size() << " building(s) -> " << output.string() << "\n";
    return 0;
}

} // namespace seme

#endif // SEME_PIPELINE_HPP

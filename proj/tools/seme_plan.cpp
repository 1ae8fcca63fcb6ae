// seme_plan: command-line front end of the SEE planning pipeline.
//
//   seme_plan sites    --scenario s.json [--pth-dbm -65] [--roi-min-cells 4] [--out dir]
//   seme_plan dbgen    ... [--mode coherent|incoherent] [--workers N] [--force]
//   seme_plan optimize ... [--pop P] [--iters I] [--seed S] [--restarts R] [--coverage-units area|normalized]
//   seme_plan report   ... [--archive file]
//
// Exit codes: 0 success, 2 config error, 3 stale cache, 4 runtime failure.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "seme/seme.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStale = 3;
constexpr int kExitRuntime = 4;

} // namespace

int main(int argc, char** argv)
{
    seme::RunConfig cfg;
    std::string mode = "coherent";
    std::string crossover = "uniform";
    std::string units = "area";

    CLI::App app{"Planning toolkit for smart electromagnetic entities (SP-EMS, RP-EMS, SR, IAB)"};
    app.require_subcommand(1);

    auto common = [&](CLI::App* sub) {
        sub->add_option("--scenario", cfg.scenario, "Scenario JSON file")->required();
        sub->add_option("--pth-dbm", cfg.pth_dbm, "Coverage threshold P_th in dBm")->capture_default_str();
        sub->add_option("--mode", mode, "Field combining mode")
            ->check(CLI::IsMember({"coherent", "incoherent"}))
            ->capture_default_str();
        sub->add_option("--roi-min-cells", cfg.roi_min_cells, "Minimum cells per blind-spot RoI")
            ->capture_default_str();
        sub->add_option("--out", cfg.out, "Output directory")->capture_default_str();
    };
    auto ga_flags = [&](CLI::App* sub) {
        sub->add_option_function<std::size_t>(
            "--pop",
            [&](std::size_t p) {
                cfg.ga.population = p;
                cfg.population_set = true;
            },
            "Population size (default max(4, 2N))");
        sub->add_option("--iters", cfg.ga.iterations, "Generations")->capture_default_str();
        sub->add_option("--seed", cfg.ga.seed, "RNG seed (restart r uses seed + r)")->capture_default_str();
        sub->add_option("--crossover-rate", cfg.ga.crossover_rate, "Crossover probability")->capture_default_str();
        sub->add_option("--mutation-rate", cfg.ga.mutation_rate, "Per-gene mutation probability")
            ->capture_default_str();
        sub->add_option("--tourney", cfg.ga.tourney, "Tournament size")->capture_default_str();
        sub->add_option("--crossover", crossover, "Crossover operator")
            ->check(CLI::IsMember({"uniform", "one-point"}))
            ->capture_default_str();
        sub->add_option("--coverage-units", units,
                        "Coverage term: area-weighted deficit in m^2, or normalized by the blind-spot area")
            ->check(CLI::IsMember({"area", "normalized"}))
            ->capture_default_str();
    };

    auto* sites = app.add_subcommand("sites", "Qualify candidate sites; write feasibility.csv and region rasters");
    common(sites);

    auto* dbgen = app.add_subcommand("dbgen", "Compute the map database maps.db (cached by content hash)");
    common(dbgen);
    dbgen->add_option("--workers", cfg.workers, "Worker threads (0 = all cores)")->capture_default_str();
    dbgen->add_flag("--force", cfg.force, "Rebuild even if the cached database is current");

    auto* optimize = app.add_subcommand("optimize", "Run NSGA-II; write archives, traces and a manifest");
    common(optimize);
    ga_flags(optimize);
    optimize->add_option("--restarts", cfg.restarts, "Independent runs with consecutive seeds")
        ->capture_default_str();

    auto* report = app.add_subcommand("report", "Representatives, reduction statistics, CDFs and maps");
    common(report);
    ga_flags(report);
    report->add_option("--archive", cfg.archive, "Archive CSV (default <out>/archive_seed<seed>.csv)");
    report->add_option("--cdf-lo", cfg.cdf_lo_dbm, "Lowest CDF threshold, dBm")->capture_default_str();
    report->add_option("--cdf-hi", cfg.cdf_hi_dbm, "Highest CDF threshold, dBm")->capture_default_str();
    report->add_option("--cdf-points", cfg.cdf_points, "CDF thresholds")->capture_default_str();

    std::string geo_scenario, geo_file, geo_out;
    auto* import = app.add_subcommand("import-buildings", "Replace scenario buildings with GeoJSON footprints");
    import->add_option("--scenario", geo_scenario, "Scenario JSON file")->required();
    import->add_option("--geojson", geo_file, "GeoJSON FeatureCollection of polygons")->required();
    import->add_option("--output", geo_out, "Output scenario file")->required();

    try {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e) {
        int const rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    cfg.mode = *seme::parse_mode(mode);
    cfg.coverage_units = units == "area" ? seme::CoverageUnits::AreaWeighted : seme::CoverageUnits::Normalized;
    cfg.ga.crossover = crossover == "uniform" ? seme::CrossoverKind::Uniform : seme::CrossoverKind::OnePoint;

    try {
        if (*sites) {
            return seme::cmd_sites(cfg, std::cout);
        }
        if (*dbgen) {
            return seme::cmd_dbgen(cfg, std::cout);
        }
        if (*optimize) {
            return seme::cmd_optimize(cfg, std::cout);
        }
        if (*report) {
            return seme::cmd_report(cfg, std::cout);
        }
        if (*import) {
            return seme::cmd_import_buildings(geo_scenario, geo_file, geo_out, std::cout);
        }
    }
    catch (seme::ConfigError const& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (seme::ScenarioError const& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (seme::StaleCacheError const& e) {
        std::cerr << "stale cache: " << e.what() << '\n';
        return kExitStale;
    }
    catch (seme::MissingEntryError const& e) {
        std::cerr << "stale cache: " << e.what() << '\n';
        return kExitStale;
    }
    catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"

using namespace seme;
using namespace seme::test;

namespace {

nlohmann::json minimal_json()
{
    return nlohmann::json::parse(R"({
      "frequency_hz": 3.5e9,
      "grid": {"origin": [0, 0], "spacing_m": 5, "nx": 10, "ny": 8, "height_m": 1.5},
      "bts": {"position": [-50, 20, 25], "time_instants": [
        {"sectors": [{"azimuth_deg": 90, "downtilt_deg": 3, "tx_power_w": 20, "max_gain_dbi": 16.3}]}]},
      "buildings": [{"footprint": [[10, 10], [20, 10], [20, 20], [10, 20]], "height_m": 15}],
      "catalog": [
        {"kind": "SP-EMS", "install_cost": 500, "energy_w": 0, "aperture_area_m2": 4.58},
        {"kind": "IAB", "install_cost": 7500, "energy_w": 350, "tx_power_dbm": 33, "gain_dbi": 20,
         "sensitivity_dbm": -90}],
      "sites": []
    })");
}

template <typename F>
std::string validation_message(F mutate)
{
    auto j = minimal_json();
    mutate(j);
    try {
        parse_scenario(j);
    }
    catch (ScenarioValidationError const& e) {
        return e.what();
    }
    catch (ScenarioParseError const& e) {
        return std::string("parse: ") + e.what();
    }
    return "";
}

} // namespace

TEST(Units, WavelengthExamples)
{
    EXPECT_NEAR(wavelength(3.5e9), 0.085655, 5e-7);
    EXPECT_DOUBLE_EQ(wavelength(299'792'458.0), 1.0);
    EXPECT_NEAR(wavelength(1.75e9), 0.171310, 5e-7);
}

TEST(Units, PowerConversionsRoundTrip)
{
    EXPECT_NEAR(dbm_to_watts(30.0), 1.0, 1e-15);
    EXPECT_NEAR(watts_to_dbm(20.0), 43.0103, 1e-4);
    EXPECT_TRUE(std::isinf(watts_to_dbm(0.0)));
    for (double d : {-120.0, -65.0, 0.0, 33.0}) {
        EXPECT_NEAR(watts_to_dbm(dbm_to_watts(d)), d, 1e-12);
    }
    EXPECT_NEAR(free_space_impedance(), 376.730313, 1e-5);
}

TEST(Geometry, PointInPolygonAndCrossings)
{
    auto const sq = rect(0, 0, 10, 10);
    EXPECT_TRUE(point_in_polygon({5, 5}, sq));
    EXPECT_FALSE(point_in_polygon({15, 5}, sq));
    EXPECT_TRUE(segments_intersect({-5, 5}, {15, 5}, {0, 0}, {0, 10}));
    EXPECT_FALSE(segments_intersect({-5, 15}, {15, 15}, {0, 0}, {0, 10}));
    EXPECT_TRUE(polygon_is_simple(sq));
    std::vector<Vec2> const bow{{0, 0}, {10, 10}, {10, 0}, {0, 10}};
    EXPECT_FALSE(polygon_is_simple(bow));
    EXPECT_DOUBLE_EQ(polygon_area(sq), 100.0);
}

TEST(Scenario, MinimalScenarioParses)
{
    auto const s = parse_scenario(minimal_json());
    EXPECT_EQ(s.buildings.size(), 1u);
    EXPECT_EQ(s.sites.size(), 0u);
    EXPECT_EQ(s.instants(), 1u);
    EXPECT_EQ(s.sector_count(), 1u);
    EXPECT_EQ(s.catalog[0].install_cost, 500.0);
    EXPECT_EQ(s.catalog[1].energy_w, 350.0);
    EXPECT_DOUBLE_EQ(*s.catalog[0].reflection_efficiency, 0.8);
    EXPECT_EQ(s.gene_of(SeeKind::Iab), 2);
    EXPECT_FALSE(s.gene_of(SeeKind::Sr).has_value());
}

TEST(Scenario, RoundTripPreservesContentAndHash)
{
    auto const s = parse_scenario(minimal_json());
    auto const again = parse_scenario(nlohmann::json::parse(to_json(s).dump()));
    EXPECT_EQ(to_json(again), to_json(s));
    EXPECT_EQ(scenario_hash(again), scenario_hash(s));

    auto j = minimal_json();
    j["bts"]["position"][2] = 26;
    EXPECT_NE(scenario_hash(parse_scenario(j)), scenario_hash(s));
}

TEST(Scenario, ValidationRules)
{
    EXPECT_NE(validation_message([](auto& j) {
                  j["catalog"].push_back({{"kind", "SR"},
                                          {"install_cost", 3000},
                                          {"energy_w", 20},
                                          {"tx_power_dbm", 24},
                                          {"gain_dbi", 20},
                                          {"sensitivity_dbm", -90}});
                  j["sites"].push_back(
                      {{"position", {20, 15, 5}}, {"mount", "facade"}, {"normal", {1, 0, 0}}, {"kinds", {"SR"}}});
              }).find("facade admits only EMS kinds"),
              std::string::npos);
    EXPECT_NE(validation_message([](auto& j) { j["catalog"][0]["energy_w"] = 1; }).find("SP-EMS consumes no energy"),
              std::string::npos);
    EXPECT_NE(validation_message([](auto& j) {
                  j["bts"]["time_instants"].push_back(
                      {{"sectors",
                        {{{"azimuth_deg", 0}, {"downtilt_deg", 0}, {"tx_power_w", 1}, {"max_gain_dbi", 10}},
                         {{"azimuth_deg", 90}, {"downtilt_deg", 0}, {"tx_power_w", 1}, {"max_gain_dbi", 10}}}}});
              }),
              "");
    EXPECT_NE(validation_message([](auto& j) {
                  j["sites"].push_back({{"position", {500, 15, 5}}, {"mount", "pole"}, {"kinds", {"IAB"}}});
              }),
              "");
    EXPECT_NE(validation_message([](auto& j) { j["catalog"].push_back(j["catalog"][0]); }), "");
    EXPECT_NE(validation_message([](auto& j) { j["frequency_hz"] = -1; }), "");
    EXPECT_NE(validation_message([](auto& j) { j["grid"]["nx"] = 0; }), "");
    EXPECT_NE(validation_message([](auto& j) { j["buildings"][0]["height_m"] = 0; }), "");
    EXPECT_NE(validation_message([](auto& j) { j["sites"].push_back({{"position", {20, 15, 5}},
                                                                       {"mount", "facade"},
                                                                       {"kinds", {"SP-EMS"}}}); }),
              "");
    EXPECT_NE(validation_message([](auto& j) { j.erase("bts"); }).rfind("parse: ", 0), std::string::npos);
}

TEST(Scenario, Table1CatalogAccepted)
{
    auto j = minimal_json();
    j["catalog"] = nlohmann::json::array();
    for (auto const& c : table1_catalog()) {
        nlohmann::json e = {{"kind", std::string(to_string(c.kind))},
                            {"install_cost", c.install_cost},
                            {"energy_w", c.energy_w}};
        if (c.aperture_area_m2) {
            e["aperture_area_m2"] = *c.aperture_area_m2;
        }
        if (c.tx_power_dbm) {
            e["tx_power_dbm"] = *c.tx_power_dbm;
            e["gain_dbi"] = *c.gain_dbi;
            e["sensitivity_dbm"] = *c.sensitivity_dbm;
        }
        j["catalog"].push_back(e);
    }
    EXPECT_NO_THROW(parse_scenario(j));
}

TEST(Scenario, MalformedFileIsParseError)
{
    EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ScenarioParseError);
}

TEST(Scenario, GeoJsonBuildings)
{
    auto const fc = nlohmann::json::parse(R"({"type": "FeatureCollection", "features": [
      {"type": "Feature", "properties": {"height_m": 12},
       "geometry": {"type": "Polygon", "coordinates": [[[0,0],[4,0],[4,3],[0,3],[0,0]]]}}]})");
    auto const b = buildings_from_geojson(fc);
    ASSERT_EQ(b.size(), 1u);
    EXPECT_EQ(b[0].footprint.size(), 4u); // closing vertex dropped
    EXPECT_DOUBLE_EQ(b[0].height, 12.0);
}

TEST(Chromosome, RepairResetsInfeasibleGenes)
{
    SiteKinds const kinds{{1, 2}, {}, {4}};
    Chromosome chi{2, 3, 1};
    EXPECT_EQ(repair(chi, kinds), 2u);
    EXPECT_EQ(chi, (Chromosome{2, 0, 0}));
    EXPECT_EQ(to_string(chi), "2 0 0");
}

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"

using namespace seme;
using namespace seme::test;

namespace {

/// One-instant database without sites holding the given reference powers.
MapDatabase map_of(std::vector<double> const& dbm)
{
    MapDatabase db;
    db.grid.nx = static_cast<int>(dbm.size());
    db.grid.ny = 1;
    db.grid.spacing = 5.0;
    db.instants = 1;
    db.lambda = kC / 3.5e9;
    db.reference = FieldGrid(db.grid, 1);
    for (std::size_t c = 0; c < dbm.size(); ++c) {
        db.reference.set(0, c, field_for_dbm(dbm[c], db.lambda));
    }
    return db;
}

double brute_cdf(std::vector<double> const& powers, std::vector<std::size_t> const& cells, double p_hat)
{
    std::size_t k = 0;
    for (auto c : cells) {
        k += powers[c] <= p_hat ? 1 : 0;
    }
    return static_cast<double>(k) / static_cast<double>(cells.size());
}

/// Argmin of `score` with ties to lower coverage, then lower cost, then first.
template <typename F>
std::size_t brute_argmin(std::vector<ObjectiveVector> const& f, F score)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < f.size(); ++i) {
        auto const key_i = std::make_tuple(score(f[i]), f[i].coverage, f[i].cost);
        auto const key_b = std::make_tuple(score(f[best]), f[best].coverage, f[best].cost);
        if (key_i < key_b) {
            best = i;
        }
    }
    return best;
}

Representatives brute_representatives(std::vector<ObjectiveVector> const& f)
{
    return {brute_argmin(f, [](auto const& v) { return std::abs(v.coverage); }),
            brute_argmin(f, [](auto const& v) { return std::abs(v.coverage) + std::abs(v.cost) + std::abs(v.energy); }),
            brute_argmin(f, [](auto const& v) { return std::abs(v.coverage) + std::abs(v.cost); }),
            brute_argmin(f, [](auto const& v) { return std::abs(v.coverage) + std::abs(v.energy); })};
}

std::vector<ObjectiveVector> random_archive(std::mt19937_64& rng)
{
    std::uniform_int_distribution<std::size_t> size(1, 40);
    std::uniform_int_distribution<int> level(0, 8); // ties are frequent on a lattice
    std::vector<ObjectiveVector> f(size(rng));
    for (auto& v : f) {
        v = {level(rng) * 12.5, level(rng) / 8.0, level(rng) / 8.0};
    }
    return f;
}

} // namespace

TEST(Cdf, EndpointsAndMonotone)
{
    auto const db = map_of({-90.0, -70.0, -70.0, -40.0});
    std::vector<std::size_t> const cells{0, 1, 2, 3};
    auto const grid = linspace(-100.0, -30.0, 71);
    auto const p = cdf(db, {}, cells, 0, grid);
    EXPECT_EQ(p.front(), 0.0);
    EXPECT_EQ(p.back(), 1.0);
    EXPECT_TRUE(std::is_sorted(p.begin(), p.end()));
    std::vector<double> const at{-75.0, -60.0};
    EXPECT_EQ(cdf(db, {}, cells, 0, at), (std::vector<double>{0.25, 0.75}));
    EXPECT_THROW(cdf(db, {}, {}, 0, at), std::invalid_argument);
}

TEST(Cdf, MatchesCountingOracleOnRandomMaps)
{
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> power(-110.0, -30.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> dbm(64);
        for (auto& v : dbm) {
            v = power(rng);
        }
        auto const db = map_of(dbm);
        std::vector<std::size_t> cells;
        for (std::size_t c = 0; c < dbm.size(); ++c) {
            if (rng() % 3 != 0) {
                cells.push_back(c);
            }
        }
        if (cells.empty()) {
            cells.push_back(0);
        }
        auto const grid = linspace(-120.0, -20.0, 101);
        auto const p = cdf(db, {}, cells, 0, grid);
        ASSERT_TRUE(std::is_sorted(p.begin(), p.end()));
        ASSERT_EQ(p.front(), 0.0);
        ASSERT_EQ(p.back(), 1.0);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            ASSERT_EQ(p[k], brute_cdf(dbm, cells, grid[k])) << "trial " << trial << " p_hat " << grid[k];
        }
        double max_power = -std::numeric_limits<double>::infinity();
        for (auto c : cells) {
            max_power = std::max(max_power, received_power(db, {}, c, 0));
        }
        ASSERT_EQ(cdf(db, {}, cells, 0, std::vector<double>{max_power}).front(), 1.0);
    }
}

TEST(Cdf, ReferenceBlindSpotAtThresholdIsOne)
{
    auto const toy = make_toy();
    Chromosome const zero(6, 0);
    std::vector<double> const at{toy.pth_dbm - 1e-9};
    for (std::size_t t = 0; t < 2; ++t) {
        EXPECT_EQ(cdf(toy.db, zero, toy.blindspot.instants[t].cells(), t, at).front(), 1.0);
        EXPECT_EQ(cdf(toy.db, toy.covering, toy.blindspot.instants[t].cells(), t, at).front(), 0.0);
    }
}

TEST(Linspace, Endpoints)
{
    auto const v = linspace(-80.0, -30.0, 101);
    ASSERT_EQ(v.size(), 101u);
    EXPECT_EQ(v.front(), -80.0);
    EXPECT_EQ(v.back(), -30.0);
    EXPECT_NEAR(v[50], -55.0, 1e-12);
}

TEST(Representatives, HandExample)
{
    std::vector<ObjectiveVector> const f{{0, .9, .9}, {.1, .1, .5}, {.2, .5, .05}};
    auto const r = select_representatives(f);
    EXPECT_EQ(r.best_coverage, 0u);
    EXPECT_EQ(r.best_compromise, 1u);
    EXPECT_EQ(r.coverage_cost, 1u);
    EXPECT_EQ(r.coverage_energy, 2u);
}

TEST(Representatives, SingletonAndEmpty)
{
    std::vector<ObjectiveVector> const one{{3, .4, .2}};
    EXPECT_EQ(select_representatives(one), (Representatives{0, 0, 0, 0}));
    EXPECT_THROW(select_representatives(std::vector<ObjectiveVector>{}), std::invalid_argument);
}

TEST(Representatives, MatchesBruteForceAndPermutationInvariant)
{
    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 100; ++trial) {
        auto f = random_archive(rng);
        auto r = select_representatives(f);
        ASSERT_EQ(r, brute_representatives(f)) << "trial " << trial;
        for (std::size_t i = 0; i < f.size(); ++i) {
            ASSERT_LE(f[r.best_coverage].coverage, f[i].coverage);
        }
        // permutation invariance holds for archives, i.e. mutually
        // non-dominated sets, where the tie-break rule is total
        std::vector<ObjectiveVector> front;
        for (auto i : pareto_indices(f)) {
            front.push_back(f[i]);
        }
        f = front;
        r = select_representatives(f);
        auto g = f;
        std::shuffle(g.begin(), g.end(), rng);
        auto const s = select_representatives(g);
        ASSERT_EQ(g[s.best_coverage], f[r.best_coverage]);
        ASSERT_EQ(g[s.best_compromise], f[r.best_compromise]);
        ASSERT_EQ(g[s.coverage_cost], f[r.coverage_cost]);
        ASSERT_EQ(g[s.coverage_energy], f[r.coverage_energy]);
    }
}

TEST(Reduction, ZeroAndCoveringDeployments)
{
    for (auto mode : {CombiningMode::Incoherent, CombiningMode::Coherent}) {
        auto const toy = make_toy(mode);
        auto const none = reduction_stats(toy.db, Chromosome(6, 0), toy.blindspot);
        ASSERT_EQ(none.size(), 4u); // 2 RoIs, both present at both instants
        for (auto const& r : none) {
            EXPECT_EQ(r.delta_omega_pct, 0.0);
            EXPECT_EQ(r.improvement_max_db, 0.0);
            EXPECT_EQ(r.delta_p_min_db, 0.0);
            EXPECT_EQ(r.area_m2, r.area_ref_m2);
        }
        for (auto const& r : reduction_stats(toy.db, toy.covering, toy.blindspot)) {
            EXPECT_EQ(r.delta_omega_pct, 100.0);
            EXPECT_EQ(r.area_m2, 0.0);
            EXPECT_GT(r.improvement_min_db, 0.0);
            EXPECT_EQ(r.delta_p_avg_db, -r.improvement_avg_db);
        }
        // a partial deployment: SR at site 0 covers RoI A only
        for (auto const& r : reduction_stats(toy.db, {3, 0, 0, 0, 0, 0}, toy.blindspot)) {
            EXPECT_LE(r.delta_omega_pct, 100.0);
            EXPECT_EQ(r.delta_omega_pct, r.roi == 0 ? 100.0 : 0.0);
        }
    }
}

TEST(Reports, DeploymentSummaryAndCsv)
{
    auto const catalog = table1_catalog();
    auto const s = summarize({1, 0, 4, 4, 3}, catalog);
    EXPECT_EQ(s.devices, 4u);
    EXPECT_EQ(s.per_kind[static_cast<std::size_t>(SeeKind::Iab)], 2u);
    EXPECT_EQ(s.cost, 500.0 + 2 * 7500.0 + 3000.0);
    EXPECT_EQ(s.energy_w, 720.0);

    ParetoArchive a;
    a.members.push_back({{0, 0}, {10, 0, 0}});
    a.members.push_back({{4, 1}, {0, 0.9, 0.8}});
    auto const rows = representative_rows(a, catalog);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].label, "BC");
    EXPECT_EQ(rows[0].index, 1u);
    std::ostringstream out;
    write_representatives_csv(rows, out);
    auto const text = out.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

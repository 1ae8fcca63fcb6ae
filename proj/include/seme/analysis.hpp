#ifndef SEME_ANALYSIS_HPP
#define SEME_ANALYSIS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "seme/blindspot.hpp"
#include "seme/chromosome.hpp"
#include "seme/nsga2.hpp"
#include "seme/objectives.hpp"
#include "seme/propagation.hpp"
#include "seme/scenario.hpp"

namespace seme {

/// Coverage maps of every instant under `chi`.
inline std::vector<CoverageMap> coverage_maps(MapDatabase const& db, Chromosome const& chi)
{
    std::vector<CoverageMap> out;
    for (std::size_t t = 0; t < db.instants; ++t) {
        out.push_back({db.grid, power_map(db, chi, t)});
    }
    return out;
}

/// Empirical CDF of received power over a fixed cell set (the reference blind
/// spot of instant t), evaluated at each threshold in `p_hat_dbm`.
inline std::vector<double> cdf(MapDatabase const& db, Chromosome const& chi, std::vector<std::size_t> const& cells,
                               std::size_t t, std::span<double const> p_hat_dbm)
{
    if (cells.empty()) {
        throw std::invalid_argument("cdf: empty blind-spot region at instant " + std::to_string(t));
    }
    std::vector<double> powers;
    powers.reserve(cells.size());
    for (auto c : cells) {
        powers.push_back(received_power(db, chi, c, t));
    }
    std::sort(powers.begin(), powers.end());
    std::vector<double> out;
    out.reserve(p_hat_dbm.size());
    for (double p : p_hat_dbm) {
        auto const k = std::upper_bound(powers.begin(), powers.end(), p) - powers.begin();
        out.push_back(static_cast<double>(k) / static_cast<double>(powers.size()));
    }
    return out;
}

/// Evenly spaced thresholds from lo to hi inclusive.
inline std::vector<double> linspace(double lo, double hi, std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return v;
}

// ---------------------------------------------------------------------------
// representative solutions

struct Representatives {
    std::size_t best_coverage{0};   // min coverage term
    std::size_t best_compromise{0}; // min |cv| + |cs| + |ec|
    std::size_t coverage_cost{0};   // min |cv| + |cs|
    std::size_t coverage_energy{0}; // min |cv| + |ec|

    friend bool operator==(Representatives const&, Representatives const&) = default;
};

namespace detail {
    template <typename Score>
    std::size_t argmin_with_ties(std::span<ObjectiveVector const> f, Score score)
    {
        std::size_t best = 0;
        for (std::size_t i = 1; i < f.size(); ++i) {
            double const si = score(f[i]);
            double const sb = score(f[best]);
            if (si < sb || (si == sb && std::tie(f[i].coverage, f[i].cost) < std::tie(f[best].coverage, f[best].cost))) {
                best = i;
            }
        }
        return best;
    }
} // namespace detail

/// Ties go to the lower coverage term, then the lower cost, then the first
/// index.
inline Representatives select_representatives(std::span<ObjectiveVector const> f)
{
    if (f.empty()) {
        throw std::invalid_argument("select_representatives: empty archive");
    }
    using detail::argmin_with_ties;
    Representatives r;
    r.best_coverage = argmin_with_ties(f, [](auto const& v) { return v.coverage; });
    r.best_compromise = argmin_with_ties(f, [](auto const& v) { return std::abs(v.coverage) + std::abs(v.cost) + std::abs(v.energy); });
    r.coverage_cost = argmin_with_ties(f, [](auto const& v) { return std::abs(v.coverage) + std::abs(v.cost); });
    r.coverage_energy = argmin_with_ties(f, [](auto const& v) { return std::abs(v.coverage) + std::abs(v.energy); });
    return r;
}

inline Representatives select_representatives(ParetoArchive const& a)
{
    auto const f = a.objectives();
    return select_representatives(std::span<ObjectiveVector const>(f));
}

// ---------------------------------------------------------------------------
// reduction statistics

struct RoiReduction {
    std::size_t roi{0};
    std::size_t instant{0};
    double area_ref_m2{0.0};
    double area_m2{0.0};        // reference-RoI area still below threshold
    double delta_omega_pct{0.0};
    // improvement = P(chi) - P(0), dB; positive means better coverage
    double improvement_min_db{0.0};
    double improvement_max_db{0.0};
    double improvement_avg_db{0.0};
    // the opposite orientation, P(0) - P(chi)
    double delta_p_min_db{0.0};
    double delta_p_max_db{0.0};
    double delta_p_avg_db{0.0};
};

/// Per reference RoI and instant: relative shrinkage of the below-threshold
/// area and statistics of the power change over the RoI cells.
inline std::vector<RoiReduction> reduction_stats(MapDatabase const& db, Chromosome const& chi, BlindSpot const& ref)
{
    Chromosome const zero(chi.size(), 0);
    std::vector<RoiReduction> out;
    for (std::size_t w = 0; w < ref.rois.size(); ++w) {
        for (std::size_t t = 0; t < ref.instants.size(); ++t) {
            auto const& cells = ref.roi_cells(w, t);
            if (cells.empty()) {
                continue;
            }
            RoiReduction r;
            r.roi = w;
            r.instant = t;
            r.area_ref_m2 = static_cast<double>(cells.size()) * db.grid.cell_area();
            std::size_t still = 0;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            double acc = 0.0;
            for (auto c : cells) {
                double const p = std::max(received_power(db, chi, c, t), kPowerFloorDbm);
                double const p0 = std::max(received_power(db, zero, c, t), kPowerFloorDbm);
                still += p < ref.pth_dbm ? 1 : 0;
                double const gain = p - p0;
                lo = std::min(lo, gain);
                hi = std::max(hi, gain);
                acc += gain;
            }
            r.area_m2 = static_cast<double>(still) * db.grid.cell_area();
            r.delta_omega_pct = 100.0 * (r.area_ref_m2 - r.area_m2) / r.area_ref_m2;
            r.improvement_min_db = lo;
            r.improvement_max_db = hi;
            r.improvement_avg_db = acc / static_cast<double>(cells.size());
            // + 0.0 turns -0 into 0 for unchanged cells
            r.delta_p_min_db = -hi + 0.0;
            r.delta_p_max_db = -lo + 0.0;
            r.delta_p_avg_db = -r.improvement_avg_db + 0.0;
            out.push_back(r);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pareto-front report

struct DeploymentSummary {
    std::array<std::size_t, 4> per_kind{}; // indexed by SeeKind
    std::size_t devices{0};
    double cost{0.0};
    double energy_w{0.0};
};

inline DeploymentSummary summarize(Chromosome const& chi, std::vector<SeeType> const& catalog)
{
    DeploymentSummary s;
    for (int g : chi) {
        if (g > 0) {
            auto const& c = catalog.at(static_cast<std::size_t>(g - 1));
            ++s.per_kind[static_cast<std::size_t>(c.kind)];
            ++s.devices;
        }
    }
    s.cost = installed_cost(chi, catalog);
    s.energy_w = installed_energy(chi, catalog);
    return s;
}

struct RepresentativeRow {
    std::string label; // BC, BCS, CC, CE
    std::size_t index{0};
    ArchiveEntry entry;
    DeploymentSummary summary;
};

inline std::vector<RepresentativeRow> representative_rows(ParetoArchive const& a, std::vector<SeeType> const& catalog)
{
    auto const r = select_representatives(a);
    std::vector<RepresentativeRow> rows;
    for (auto const& [label, idx] : {std::pair<char const*, std::size_t>{"BC", r.best_coverage},
                                     {"BCS", r.best_compromise},
                                     {"CC", r.coverage_cost},
                                     {"CE", r.coverage_energy}}) {
        auto const& e = a.members.at(idx);
        rows.push_back({label, idx, e, summarize(e.chromosome, catalog)});
    }
    return rows;
}

inline void write_representatives_csv(std::vector<RepresentativeRow> const& rows, std::ostream& out)
{
    out << "solution,archive_index,phi_cv,phi_cs,phi_ec,n_sees,n_sp_ems,n_rp_ems,n_sr,n_iab,cost,energy_w,genes\n";
    char buf[256];
    for (auto const& r : rows) {
        auto const& s = r.summary;
        std::snprintf(buf, sizeof buf, "%s,%zu,%.17g,%.17g,%.17g,%zu,%zu,%zu,%zu,%zu,%.17g,%.17g,", r.label.c_str(),
                      r.index, r.entry.objectives.coverage, r.entry.objectives.cost, r.entry.objectives.energy,
                      s.devices, s.per_kind[0], s.per_kind[1], s.per_kind[2], s.per_kind[3], s.cost, s.energy_w);
        out << buf << to_string(r.entry.chromosome) << '\n';
    }
}

inline void write_reduction_csv(std::string const& label, std::vector<RoiReduction> const& rows, std::ostream& out,
                                bool header = true)
{
    if (header) {
        out << "solution,roi,instant,area_ref_m2,area_m2,delta_omega_pct,"
               "improvement_min_db,improvement_max_db,improvement_avg_db,"
               "delta_p_min_db,delta_p_max_db,delta_p_avg_db\n";
    }
    char buf[320];
    for (auto const& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      label.c_str(), r.roi + 1, r.instant + 1, r.area_ref_m2, r.area_m2, r.delta_omega_pct,
                      r.improvement_min_db, r.improvement_max_db, r.improvement_avg_db, r.delta_p_min_db,
                      r.delta_p_max_db, r.delta_p_avg_db);
        out << buf;
    }
}

inline void write_cdf_csv(std::span<double const> p_hat, std::span<double const> prob, std::ostream& out)
{
    out << "p_hat_dbm,probability\n";
    char buf[64];
    for (std::size_t i = 0; i < p_hat.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6f,%.17g\n", p_hat[i], prob[i]);
        out << buf;
    }
}

/// Grid export of one instant: power and the thresholded coverage flag.
inline void write_thresholded_map_csv(MapDatabase const& db, Chromosome const& chi, std::size_t t, double pth_dbm,
                                      std::ostream& out)
{
    out << "x_m,y_m,power_dbm,covered\n";
    char buf[128];
    for (std::size_t c = 0; c < db.grid.cell_count(); ++c) {
        auto const p = db.grid.sample_xy(c);
        double const pw = received_power(db, chi, c, t);
        std::snprintf(buf, sizeof buf, "%.3f,%.3f,%.6f,%d\n", p.x, p.y, pw, pw >= pth_dbm ? 1 : 0);
        out << buf;
    }
}

} // namespace seme

#endif // SEME_ANALYSIS_HPP

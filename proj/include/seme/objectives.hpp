#ifndef SEME_OBJECTIVES_HPP
#define SEME_OBJECTIVES_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <vector>

#include "seme/blindspot.hpp"
#include "seme/chromosome.hpp"
#include "seme/propagation.hpp"
#include "seme/scenario.hpp"

namespace seme {

/// (coverage deficit, installation cost, energy consumption)
struct ObjectiveVector {
    double coverage{0.0};
    double cost{0.0};
    double energy{0.0};

    static constexpr std::size_t size() noexcept { return 3; }
    [[nodiscard]] double operator[](std::size_t i) const noexcept
    {
        return i == 0 ? coverage : (i == 1 ? cost : energy);
    }
    friend bool operator==(ObjectiveVector const&, ObjectiveVector const&) = default;
};

/// Zero received power (exact coherent cancellation) is clamped here so the
/// dB-domain deficit stays finite.
inline constexpr double kPowerFloorDbm = -200.0;

enum class CoverageUnits : std::uint8_t {
    AreaWeighted, // m^2, sum of normalized deficits times cell area
    Normalized,   // divided by the blind-spot area of each instant
};

struct CoverageTerm {
    double value{0.0};
    bool empty_region{false}; // no blind-spot cell at any instant
};

/// Normalized dB-domain deficit of one cell; 0 once the cell is covered.
inline double cell_deficit(double power_dbm, double pth_dbm) noexcept
{
    double const p = std::max(power_dbm, kPowerFloorDbm);
    double const gap = pth_dbm - p;
    return gap > 0.0 ? gap / std::abs(pth_dbm) : 0.0;
}

/// Coverage term: time average over instants of the area-weighted deficit
/// over the blind-spot cells of each instant.
inline CoverageTerm phi_coverage(MapDatabase const& db, Chromosome const& chi, CellSets const& blindspot,
                                 double pth_dbm, CoverageUnits units = CoverageUnits::AreaWeighted)
{
    if (blindspot.size() != db.instants) {
        throw std::invalid_argument("phi_coverage: need one cell set per time instant");
    }
    CoverageTerm out;
    out.empty_region = std::all_of(blindspot.begin(), blindspot.end(), [](auto const& s) { return s.empty(); });
    if (out.empty_region) {
        return out;
    }
    double const area = db.grid.cell_area();
    double acc = 0.0;
    for (std::size_t t = 0; t < db.instants; ++t) {
        double sum = 0.0;
        for (auto c : blindspot[t]) {
            sum += cell_deficit(received_power(db, chi, c, t), pth_dbm) * area;
        }
        if (units == CoverageUnits::Normalized && !blindspot[t].empty()) {
            sum /= area * static_cast<double>(blindspot[t].size());
        }
        acc += sum;
    }
    out.value = acc / static_cast<double>(db.instants);
    return out;
}

/// Sum of install costs of the devices in `chi`.
inline double installed_cost(Chromosome const& chi, std::vector<SeeType> const& catalog)
{
    double acc = 0.0;
    for (int g : chi) {
        if (g > 0) {
            acc += catalog.at(static_cast<std::size_t>(g - 1)).install_cost;
        }
    }
    return acc;
}

inline double installed_energy(Chromosome const& chi, std::vector<SeeType> const& catalog)
{
    double acc = 0.0;
    for (int g : chi) {
        if (g > 0) {
            acc += catalog.at(static_cast<std::size_t>(g - 1)).energy_w;
        }
    }
    return acc;
}

/// Sum over sites of the most expensive kind installable there.
inline double max_cost(SiteKinds const& kinds, std::vector<SeeType> const& catalog)
{
    double acc = 0.0;
    for (auto const& site : kinds) {
        double best = 0.0;
        for (int g : site) {
            best = std::max(best, catalog.at(static_cast<std::size_t>(g - 1)).install_cost);
        }
        acc += best;
    }
    return acc;
}

inline double max_energy(SiteKinds const& kinds, std::vector<SeeType> const& catalog)
{
    double acc = 0.0;
    for (auto const& site : kinds) {
        double best = 0.0;
        for (int g : site) {
            best = std::max(best, catalog.at(static_cast<std::size_t>(g - 1)).energy_w);
        }
        acc += best;
    }
    return acc;
}

inline double phi_cost(Chromosome const& chi, std::vector<SeeType> const& catalog, SiteKinds const& kinds)
{
    double const denom = max_cost(kinds, catalog);
    return denom > 0.0 ? installed_cost(chi, catalog) / denom : 0.0;
}

inline double phi_energy(Chromosome const& chi, std::vector<SeeType> const& catalog, SiteKinds const& kinds)
{
    double const denom = max_energy(kinds, catalog);
    return denom > 0.0 ? installed_energy(chi, catalog) / denom : 0.0;
}

/// Reference implementation of the three terms (repairs a copy first).
inline ObjectiveVector evaluate(MapDatabase const& db, Chromosome chi, std::vector<SeeType> const& catalog,
                                SiteKinds const& kinds, CellSets const& blindspot, double pth_dbm,
                                CoverageUnits units = CoverageUnits::AreaWeighted)
{
    repair(chi, kinds);
    return {phi_coverage(db, chi, blindspot, pth_dbm, units).value, phi_cost(chi, catalog, kinds),
            phi_energy(chi, catalog, kinds)};
}

/// Fast evaluator for the optimizer. Fields of every database entry are
/// gathered at the blind-spot cells once; each call then only sums them.
class Evaluator {
public:
    Evaluator(MapDatabase const& db, std::vector<SeeType> catalog, SiteKinds kinds, CellSets blindspot,
              double pth_dbm, CoverageUnits units = CoverageUnits::AreaWeighted)
        : catalog_(std::move(catalog)), kinds_(std::move(kinds)), blindspot_(std::move(blindspot)),
          pth_dbm_(pth_dbm), units_(units), mode_(db.mode), factor_(receive_factor(db.lambda)),
          cell_area_(db.grid.cell_area()), instants_(db.instants)
    {
        if (kinds_.size() != db.sites) {
            throw std::invalid_argument("evaluator: site kinds do not match the database");
        }
        if (blindspot_.size() != db.instants) {
            throw std::invalid_argument("evaluator: need one cell set per time instant");
        }
        reference_ = gather(db.reference);
        slot_.resize(kinds_.size());
        for (std::size_t n = 0; n < kinds_.size(); ++n) {
            for (int g : kinds_[n]) {
                slot_[n][g] = entries_.size();
                entries_.push_back(gather(db.entry(n, g)));
            }
        }
        max_cost_ = max_cost(kinds_, catalog_);
        max_energy_ = max_energy(kinds_, catalog_);
    }

    [[nodiscard]] ObjectiveVector operator()(Chromosome chi) const
    {
        repair(chi, kinds_);
        return {coverage(chi), max_cost_ > 0.0 ? installed_cost(chi, catalog_) / max_cost_ : 0.0,
                max_energy_ > 0.0 ? installed_energy(chi, catalog_) / max_energy_ : 0.0};
    }

    [[nodiscard]] SiteKinds const& site_kinds() const noexcept { return kinds_; }
    [[nodiscard]] std::vector<SeeType> const& catalog() const noexcept { return catalog_; }
    [[nodiscard]] CellSets const& blindspot() const noexcept { return blindspot_; }

private:
    using Gathered = std::vector<std::vector<FieldVector>>; // [t][blind cell]

    [[nodiscard]] Gathered gather(FieldGrid const& g) const
    {
        Gathered out(instants_);
        for (std::size_t t = 0; t < instants_; ++t) {
            for (auto c : blindspot_[t]) {
                out[t].push_back(g.at(t, c));
            }
        }
        return out;
    }

    [[nodiscard]] double coverage(Chromosome const& chi) const
    {
        std::vector<Gathered const*> active;
        for (std::size_t n = 0; n < chi.size(); ++n) {
            if (chi[n] != 0) {
                active.push_back(&entries_[slot_[n].at(chi[n])]);
            }
        }
        bool empty = true;
        double acc = 0.0;
        for (std::size_t t = 0; t < instants_; ++t) {
            std::size_t const m = blindspot_[t].size();
            empty = empty && m == 0;
            double sum = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                double intensity = 0.0;
                if (mode_ == CombiningMode::Coherent) {
                    FieldVector e = reference_[t][i];
                    for (auto const* a : active) {
                        e += (*a)[t][i];
                    }
                    intensity = field_intensity(e);
                }
                else {
                    intensity = field_intensity(reference_[t][i]);
                    for (auto const* a : active) {
                        intensity += field_intensity((*a)[t][i]);
                    }
                }
                sum += cell_deficit(watts_to_dbm(intensity * factor_), pth_dbm_) * cell_area_;
            }
            if (units_ == CoverageUnits::Normalized && m > 0) {
                sum /= cell_area_ * static_cast<double>(m);
            }
            acc += sum;
        }
        return empty ? 0.0 : acc / static_cast<double>(instants_);
    }

    std::vector<SeeType> catalog_;
    SiteKinds kinds_;
    CellSets blindspot_;
    double pth_dbm_;
    CoverageUnits units_;
    CombiningMode mode_;
    double factor_;
    double cell_area_;
    std::size_t instants_;
    Gathered reference_;
    std::vector<Gathered> entries_;
    std::vector<std::map<int, std::size_t>> slot_;
    double max_cost_{0.0};
    double max_energy_{0.0};
};

} // namespace seme

#endif // SEME_OBJECTIVES_HPP

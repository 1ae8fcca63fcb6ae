#ifndef SEME_BLINDSPOT_HPP
#define SEME_BLINDSPOT_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <tuple>
#include <vector>

#include "seme/geometry.hpp"
#include "seme/scenario.hpp"

namespace seme {

/// Received power (dBm) per grid cell for one time instant.
struct CoverageMap {
    GridSpec grid;
    std::vector<double> power_dbm;
};

/// One connected below-threshold region at one instant.
struct Component {
    std::vector<std::size_t> cells; // ascending flat indices
    Vec2 barycenter;
    double area_m2{0.0};
};

/// Below-threshold cells of one instant and their partition into RoIs.
struct BlindSpotInstant {
    std::vector<std::uint8_t> raw_mask; // 1 where P < P_th, before filtering
    std::vector<int> labels;            // component id or -1 (covered or filtered out)
    std::vector<Component> components;  // only those passing the area filter

    /// Cells of all retained components, ascending.
    [[nodiscard]] std::vector<std::size_t> cells() const
    {
        std::vector<std::size_t> out;
        for (auto const& c : components) {
            out.insert(out.end(), c.cells.begin(), c.cells.end());
        }
        std::sort(out.begin(), out.end());
        return out;
    }
    [[nodiscard]] double area_m2() const noexcept
    {
        double a = 0.0;
        for (auto const& c : components) {
            a += c.area_m2;
        }
        return a;
    }
    [[nodiscard]] std::size_t raw_count() const noexcept
    {
        return static_cast<std::size_t>(std::count(raw_mask.begin(), raw_mask.end(), std::uint8_t{1}));
    }
};

/// Cells still failing the coverage condition, per instant.
using CellSets = std::vector<std::vector<std::size_t>>;

/// A region of interest tracked across instants. `components[t]` indexes the
/// instant's component list, or is empty when the RoI is absent at t.
struct Roi {
    std::vector<std::optional<std::size_t>> components;
    std::vector<std::optional<Vec2>> barycenters;
    std::vector<double> areas_m2;
    Vec2 avg_barycenter;
};

struct BlindSpot {
    GridSpec grid;
    double pth_dbm{0.0};
    std::vector<BlindSpotInstant> instants;
    std::vector<Roi> rois;

    [[nodiscard]] CellSets cell_sets() const
    {
        CellSets out;
        for (auto const& inst : instants) {
            out.push_back(inst.cells());
        }
        return out;
    }
    [[nodiscard]] std::vector<std::size_t> const& roi_cells(std::size_t w, std::size_t t) const
    {
        static std::vector<std::size_t> const empty;
        auto const& c = rois.at(w).components.at(t);
        return c ? instants.at(t).components.at(*c).cells : empty;
    }
};

/// 8-connected component labelling of `mask`, seeded in row-major order so
/// that component ids are deterministic. Returns labels (-1 for background)
/// and the cells of each component in ascending order.
inline std::pair<std::vector<int>, std::vector<std::vector<std::size_t>>>
label_components(std::vector<std::uint8_t> const& mask, int nx, int ny)
{
    std::vector<int> labels(mask.size(), -1);
    std::vector<std::vector<std::size_t>> comps;
    std::vector<std::size_t> stack;
    for (std::size_t seed = 0; seed < mask.size(); ++seed) {
        if (!mask[seed] || labels[seed] >= 0) {
            continue;
        }
        int const id = static_cast<int>(comps.size());
        comps.emplace_back();
        labels[seed] = id;
        stack.push_back(seed);
        while (!stack.empty()) {
            auto const c = stack.back();
            stack.pop_back();
            comps.back().push_back(c);
            int const cx = static_cast<int>(c % static_cast<std::size_t>(nx));
            int const cy = static_cast<int>(c / static_cast<std::size_t>(nx));
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    int const x = cx + dx;
                    int const y = cy + dy;
                    if ((dx == 0 && dy == 0) || x < 0 || y < 0 || x >= nx || y >= ny) {
                        continue;
                    }
                    auto const k = static_cast<std::size_t>(y) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(x);
                    if (mask[k] && labels[k] < 0) {
                        labels[k] = id;
                        stack.push_back(k);
                    }
                }
            }
        }
        std::sort(comps.back().begin(), comps.back().end());
    }
    return {std::move(labels), std::move(comps)};
}

/// Threshold one instant and split it into components of at least
/// `min_cells` cells.
inline BlindSpotInstant extract_blindspot(CoverageMap const& map, double pth_dbm, std::size_t min_cells)
{
    BlindSpotInstant out;
    out.raw_mask.resize(map.power_dbm.size());
    for (std::size_t c = 0; c < map.power_dbm.size(); ++c) {
        out.raw_mask[c] = map.power_dbm[c] < pth_dbm ? 1 : 0;
    }
    auto [labels, comps] = label_components(out.raw_mask, map.grid.nx, map.grid.ny);
    out.labels.assign(labels.size(), -1);
    for (auto& cells : comps) {
        if (cells.size() < min_cells) {
            continue;
        }
        Component comp;
        Vec2 acc{};
        for (auto c : cells) {
            acc = acc + map.grid.sample_xy(c);
            out.labels[c] = static_cast<int>(out.components.size());
        }
        comp.barycenter = (1.0 / static_cast<double>(cells.size())) * acc;
        comp.area_m2 = static_cast<double>(cells.size()) * map.grid.cell_area();
        comp.cells = std::move(cells);
        out.components.push_back(std::move(comp));
    }
    return out;
}

namespace detail {
    inline std::size_t overlap(std::vector<std::size_t> const& a, std::vector<std::size_t> const& b)
    {
        std::size_t n = 0;
        auto i = a.begin();
        auto j = b.begin();
        while (i != a.end() && j != b.end()) {
            if (*i < *j) {
                ++i;
            }
            else if (*j < *i) {
                ++j;
            }
            else {
                ++n;
                ++i;
                ++j;
            }
        }
        return n;
    }
} // namespace detail

/// Link components of consecutive instants into RoIs by greedy maximum cell
/// overlap. Unmatched components open a new RoI; absent instants do not enter
/// the averaged barycenter.
inline std::vector<Roi> track_rois(std::vector<BlindSpotInstant> const& instants)
{
    std::size_t const T = instants.size();
    std::vector<Roi> rois;
    auto open_roi = [&](std::size_t t, std::size_t comp) {
        Roi r;
        r.components.assign(T, std::nullopt);
        r.barycenters.assign(T, std::nullopt);
        r.areas_m2.assign(T, 0.0);
        r.components[t] = comp;
        rois.push_back(std::move(r));
    };
    for (std::size_t t = 0; t < T; ++t) {
        auto const& comps = instants[t].components;
        std::vector<bool> taken(comps.size(), false);
        if (t > 0) {
            // (overlap, roi, comp), best overlap first, then lowest indices
            std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> pairs;
            for (std::size_t w = 0; w < rois.size(); ++w) {
                auto const& prev = rois[w].components[t - 1];
                if (!prev) {
                    continue;
                }
                auto const& prev_cells = instants[t - 1].components[*prev].cells;
                for (std::size_t k = 0; k < comps.size(); ++k) {
                    if (auto ov = detail::overlap(prev_cells, comps[k].cells); ov > 0) {
                        pairs.emplace_back(ov, w, k);
                    }
                }
            }
            std::sort(pairs.begin(), pairs.end(), [](auto const& a, auto const& b) {
                if (std::get<0>(a) != std::get<0>(b)) {
                    return std::get<0>(a) > std::get<0>(b);
                }
                return std::make_pair(std::get<1>(a), std::get<2>(a)) < std::make_pair(std::get<1>(b), std::get<2>(b));
            });
            std::vector<bool> roi_used(rois.size(), false);
            for (auto const& [ov, w, k] : pairs) {
                if (roi_used[w] || taken[k]) {
                    continue;
                }
                roi_used[w] = true;
                taken[k] = true;
                rois[w].components[t] = k;
            }
        }
        for (std::size_t k = 0; k < comps.size(); ++k) {
            if (!taken[k]) {
                open_roi(t, k);
            }
        }
    }
    for (auto& r : rois) {
        Vec2 acc{};
        std::size_t present = 0;
        for (std::size_t t = 0; t < T; ++t) {
            if (auto const& c = r.components[t]) {
                auto const& comp = instants[t].components[*c];
                r.barycenters[t] = comp.barycenter;
                r.areas_m2[t] = comp.area_m2;
                acc = acc + comp.barycenter;
                ++present;
            }
        }
        r.avg_barycenter = (1.0 / static_cast<double>(present)) * acc;
    }
    return rois;
}

/// Threshold every instant of a coverage series and track its RoIs.
inline BlindSpot extract_blindspot(std::vector<CoverageMap> const& maps, double pth_dbm, std::size_t min_cells)
{
    BlindSpot bs;
    bs.pth_dbm = pth_dbm;
    if (!maps.empty()) {
        bs.grid = maps.front().grid;
    }
    for (auto const& m : maps) {
        bs.instants.push_back(extract_blindspot(m, pth_dbm, min_cells));
    }
    bs.rois = track_rois(bs.instants);
    return bs;
}

} // namespace seme

#endif // SEME_BLINDSPOT_HPP

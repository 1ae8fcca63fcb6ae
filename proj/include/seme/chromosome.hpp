#ifndef SEME_CHROMOSOME_HPP
#define SEME_CHROMOSOME_HPP

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

namespace seme {

/// One gene per candidate site: 0 = nothing installed, s > 0 = catalog entry s.
using Chromosome = std::vector<int>;

/// Per site, the non-zero genes that may be installed there (ascending).
using SiteKinds = std::vector<std::vector<int>>;

inline bool gene_allowed(SiteKinds const& kinds, std::size_t site, int gene)
{
    if (gene == 0) {
        return true;
    }
    auto const& allowed = kinds.at(site);
    return std::find(allowed.begin(), allowed.end(), gene) != allowed.end();
}

/// Infeasible genes are reset to 0. Returns the number of genes changed.
inline std::size_t repair(Chromosome& chi, SiteKinds const& kinds)
{
    std::size_t changed = 0;
    for (std::size_t n = 0; n < chi.size(); ++n) {
        if (!gene_allowed(kinds, n, chi[n])) {
            chi[n] = 0;
            ++changed;
        }
    }
    return changed;
}

inline std::string to_string(Chromosome const& chi)
{
    std::string s;
    for (std::size_t n = 0; n < chi.size(); ++n) {
        if (n) {
            s += ' ';
        }
        s += std::to_string(chi[n]);
    }
    return s;
}

} // namespace seme

#endif // SEME_CHROMOSOME_HPP

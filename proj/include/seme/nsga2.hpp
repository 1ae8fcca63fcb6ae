#ifndef SEME_NSGA2_HPP
#define SEME_NSGA2_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <set>
#include <tuple>
#include <vector>

#include "seme/chromosome.hpp"
#include "seme/objectives.hpp"

namespace seme {

// ---------------------------------------------------------------------------
// configuration

enum class CrossoverKind : std::uint8_t { Uniform, OnePoint };

struct GaConfig {
    std::size_t population{40};
    std::size_t iterations{10'000};
    double crossover_rate{0.9};
    double mutation_rate{0.005};
    std::size_t tourney{2};
    std::uint64_t seed{1};
    CrossoverKind crossover{CrossoverKind::Uniform};

    /// Population of twice the number of sites, at least 4.
    static GaConfig for_sites(std::size_t sites)
    {
        GaConfig c;
        c.population = std::max<std::size_t>(4, 2 * sites);
        return c;
    }

    void validate() const
    {
        if (population < 4 || population % 2 != 0) {
            throw std::invalid_argument("ga config: population must be an even integer >= 4");
        }
        if (iterations < 1) {
            throw std::invalid_argument("ga config: iterations must be >= 1");
        }
        if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0) || !(mutation_rate >= 0.0 && mutation_rate <= 1.0)) {
            throw std::invalid_argument("ga config: rates must lie in [0, 1]");
        }
        if (tourney < 2) {
            throw std::invalid_argument("ga config: tourney size must be >= 2");
        }
    }
};

// ---------------------------------------------------------------------------
// random numbers (64-bit Mersenne Twister with portable draws)

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [0, n), rejection-sampled.
    std::size_t below(std::size_t n)
    {
        auto const bound = static_cast<std::uint64_t>(n);
        std::uint64_t const limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x = engine_();
        while (x >= limit) {
            x = engine_();
        }
        return static_cast<std::size_t>(x % bound);
    }

    /// Uniform double in [0, 1).
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return unit() < p; }

private:
    std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Pareto machinery

/// a is no worse in every objective and strictly better in at least one.
inline bool dominates(ObjectiveVector const& a, ObjectiveVector const& b) noexcept
{
    bool strict = false;
    for (std::size_t i = 0; i < ObjectiveVector::size(); ++i) {
        if (a[i] > b[i]) {
            return false;
        }
        strict = strict || a[i] < b[i];
    }
    return strict;
}

/// Deb's fast non-dominated sort. Returns the rank (0 = first front) of
/// every vector.
inline std::vector<std::size_t> fast_nondominated_sort(std::span<ObjectiveVector const> pop)
{
    std::size_t const n = pop.size();
    std::vector<std::vector<std::size_t>> dominated_by_me(n);
    std::vector<std::size_t> dom_count(n, 0);
    std::vector<std::size_t> rank(n, 0);
    std::vector<std::size_t> front;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            if (dominates(pop[p], pop[q])) {
                dominated_by_me[p].push_back(q);
                ++dom_count[q];
            }
            else if (dominates(pop[q], pop[p])) {
                dominated_by_me[q].push_back(p);
                ++dom_count[p];
            }
        }
    }
    for (std::size_t p = 0; p < n; ++p) {
        if (dom_count[p] == 0) {
            front.push_back(p);
        }
    }
    for (std::size_t r = 0; !front.empty(); ++r) {
        std::vector<std::size_t> next;
        for (auto p : front) {
            rank[p] = r;
            for (auto q : dominated_by_me[p]) {
                if (--dom_count[q] == 0) {
                    next.push_back(q);
                }
            }
        }
        front = std::move(next);
    }
    return rank;
}

/// Crowding distance within one front. Per objective, the boundary members
/// get +inf and interior ones accumulate the normalized gap between their
/// neighbours; objectives with zero range contribute nothing.
inline std::vector<double> crowding_distance(std::span<ObjectiveVector const> front)
{
    std::size_t const n = front.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> d(n, 0.0);
    if (n <= 2) {
        std::fill(d.begin(), d.end(), inf);
        return d;
    }
    std::vector<std::size_t> idx(n);
    for (std::size_t m = 0; m < ObjectiveVector::size(); ++m) {
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return front[a][m] < front[b][m]; });
        double const range = front[idx.back()][m] - front[idx.front()][m];
        if (range <= 0.0) {
            continue;
        }
        d[idx.front()] = inf;
        d[idx.back()] = inf;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            d[idx[i]] += (front[idx[i + 1]][m] - front[idx[i - 1]][m]) / range;
        }
    }
    return d;
}

// ---------------------------------------------------------------------------
// archive

struct ArchiveEntry {
    Chromosome chromosome;
    ObjectiveVector objectives;

    friend bool operator==(ArchiveEntry const&, ArchiveEntry const&) = default;
};

struct ParetoArchive {
    std::vector<ArchiveEntry> members;

    [[nodiscard]] bool empty() const noexcept { return members.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return members.size(); }
    [[nodiscard]] std::vector<ObjectiveVector> objectives() const
    {
        std::vector<ObjectiveVector> out;
        for (auto const& m : members) {
            out.push_back(m.objectives);
        }
        return out;
    }

    friend bool operator==(ParetoArchive const&, ParetoArchive const&) = default;
};

/// One line per member: `index,phi_cv,phi_cs,phi_ec,genes` with genes
/// space-separated. Values are printed with 17 significant digits.
inline void write_archive_csv(ParetoArchive const& a, std::ostream& out)
{
    out << "index,phi_cv,phi_cs,phi_ec,genes\n";
    char buf[128];
    for (std::size_t i = 0; i < a.members.size(); ++i) {
        auto const& m = a.members[i];
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,", i, m.objectives.coverage, m.objectives.cost,
                      m.objectives.energy);
        out << buf << to_string(m.chromosome) << '\n';
    }
}

inline ParetoArchive read_archive_csv(std::istream& in)
{
    ParetoArchive a;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("index,", 0) == 0) {
                continue;
            }
        }
        std::istringstream ls(line);
        std::string idx, cv, cs, ec, genes;
        if (!std::getline(ls, idx, ',') || !std::getline(ls, cv, ',') || !std::getline(ls, cs, ',')
            || !std::getline(ls, ec, ',')) {
            throw std::runtime_error("archive csv: malformed line '" + line + "'");
        }
        std::getline(ls, genes);
        ArchiveEntry e;
        e.objectives = {std::stod(cv), std::stod(cs), std::stod(ec)};
        std::istringstream gs(genes);
        for (int g; gs >> g;) {
            e.chromosome.push_back(g);
        }
        a.members.push_back(std::move(e));
    }
    return a;
}

// ---------------------------------------------------------------------------
// engine

struct GenerationStats {
    std::size_t generation{0};
    std::size_t front_size{0}; // distinct chromosomes in the first front
    ObjectiveVector best;      // per-objective minimum over the population
};

inline void write_trace_csv(std::vector<GenerationStats> const& trace, std::ostream& out)
{
    out << "generation,front_size,min_phi_cv,min_phi_cs,min_phi_ec\n";
    char buf[160];
    for (auto const& g : trace) {
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g\n", g.generation, g.front_size, g.best.coverage,
                      g.best.cost, g.best.energy);
        out << buf;
    }
}

class EvolveError : public std::runtime_error {
public:
    EvolveError(std::size_t generation, std::string const& what)
        : std::runtime_error("evaluation failed at generation " + std::to_string(generation) + ": " + what),
          generation_(generation)
    {
    }
    [[nodiscard]] std::size_t generation() const noexcept { return generation_; }

private:
    std::size_t generation_;
};

struct Individual {
    Chromosome chromosome;
    ObjectiveVector objectives;
    std::size_t rank{0};
    double crowding{0.0};
};

namespace detail {

    /// Rank and crowd a population in place.
    inline void rank_and_crowd(std::vector<Individual>& pop)
    {
        std::vector<ObjectiveVector> f;
        for (auto const& ind : pop) {
            f.push_back(ind.objectives);
        }
        auto const ranks = fast_nondominated_sort(f);
        std::size_t const max_rank = pop.empty() ? 0 : *std::max_element(ranks.begin(), ranks.end());
        for (std::size_t r = 0; r <= max_rank; ++r) {
            std::vector<std::size_t> members;
            std::vector<ObjectiveVector> front;
            for (std::size_t i = 0; i < pop.size(); ++i) {
                if (ranks[i] == r) {
                    members.push_back(i);
                    front.push_back(f[i]);
                }
            }
            auto const d = crowding_distance(front);
            for (std::size_t k = 0; k < members.size(); ++k) {
                pop[members[k]].rank = r;
                pop[members[k]].crowding = d[k];
            }
        }
    }

    inline bool better(Individual const& a, Individual const& b) noexcept
    {
        return a.rank != b.rank ? a.rank < b.rank : a.crowding > b.crowding;
    }

} // namespace detail

/// Integer NSGA-II over the per-site alphabets {0} + kinds[n].
///
/// Generation 0 holds the all-zero chromosome plus random ones. Each
/// generation builds P offspring via tournament selection, crossover and
/// per-gene resampling mutation, then keeps the best P of parents + offspring
/// by (rank, crowding), ranking repeated chromosomes after all distinct ones.
/// The returned archive is the first front of the last combined population,
/// deduplicated by chromosome.
template <typename Eval>
ParetoArchive evolve(GaConfig const& cfg, Eval&& evaluate, SiteKinds const& kinds,
                     std::vector<GenerationStats>* trace = nullptr)
{
    cfg.validate();
    std::size_t const N = kinds.size();
    Rng rng(cfg.seed);
    std::map<Chromosome, ObjectiveVector> memo;
    std::size_t generation = 0;

    auto alphabet_draw = [&](std::size_t n) {
        std::size_t const k = rng.below(kinds[n].size() + 1);
        return k == 0 ? 0 : kinds[n][k - 1];
    };
    auto eval = [&](Chromosome& chi) {
        repair(chi, kinds);
        if (auto it = memo.find(chi); it != memo.end()) {
            return it->second;
        }
        try {
            auto f = evaluate(static_cast<Chromosome const&>(chi));
            memo.emplace(chi, f);
            return f;
        }
        catch (std::exception const& e) {
            throw EvolveError(generation, e.what());
        }
    };
    auto record = [&](std::vector<Individual> const& pop) {
        if (!trace) {
            return;
        }
        GenerationStats s;
        s.generation = generation;
        constexpr double inf = std::numeric_limits<double>::infinity();
        s.best = {inf, inf, inf};
        std::vector<Chromosome> front;
        for (auto const& ind : pop) {
            s.best.coverage = std::min(s.best.coverage, ind.objectives.coverage);
            s.best.cost = std::min(s.best.cost, ind.objectives.cost);
            s.best.energy = std::min(s.best.energy, ind.objectives.energy);
            if (ind.rank == 0) {
                front.push_back(ind.chromosome);
            }
        }
        std::sort(front.begin(), front.end());
        s.front_size = static_cast<std::size_t>(std::unique(front.begin(), front.end()) - front.begin());
        trace->push_back(s);
    };

    std::vector<Individual> pop(cfg.population);
    for (std::size_t p = 0; p < pop.size(); ++p) {
        pop[p].chromosome.assign(N, 0);
        if (p > 0) {
            for (std::size_t n = 0; n < N; ++n) {
                pop[p].chromosome[n] = alphabet_draw(n);
            }
        }
        pop[p].objectives = eval(pop[p].chromosome);
    }
    detail::rank_and_crowd(pop);
    record(pop);

    auto tournament = [&]() -> Individual const& {
        Individual const* best = &pop[rng.below(pop.size())];
        for (std::size_t k = 1; k < cfg.tourney; ++k) {
            auto const& c = pop[rng.below(pop.size())];
            if (detail::better(c, *best)) {
                best = &c;
            }
        }
        return *best;
    };

    std::vector<Individual> combined;
    for (generation = 1; generation <= cfg.iterations; ++generation) {
        std::vector<Individual> offspring;
        offspring.reserve(cfg.population);
        while (offspring.size() < cfg.population) {
            Chromosome a = tournament().chromosome;
            Chromosome b = tournament().chromosome;
            if (rng.chance(cfg.crossover_rate) && N > 1) {
                if (cfg.crossover == CrossoverKind::Uniform) {
                    for (std::size_t n = 0; n < N; ++n) {
                        if (rng.chance(0.5)) {
                            std::swap(a[n], b[n]);
                        }
                    }
                }
                else {
                    std::size_t const cut = 1 + rng.below(N - 1);
                    std::swap_ranges(a.begin() + static_cast<std::ptrdiff_t>(cut), a.end(),
                                     b.begin() + static_cast<std::ptrdiff_t>(cut));
                }
            }
            for (auto* child : {&a, &b}) {
                for (std::size_t n = 0; n < N; ++n) {
                    if (rng.chance(cfg.mutation_rate)) {
                        (*child)[n] = alphabet_draw(n);
                    }
                }
                if (offspring.size() < cfg.population) {
                    Individual ind;
                    ind.chromosome = std::move(*child);
                    ind.objectives = eval(ind.chromosome);
                    offspring.push_back(std::move(ind));
                }
            }
        }

        // Parents + offspring, duplicate chromosomes set aside: copies would
        // otherwise crowd a small population and collapse its diversity. They
        // only survive when there are fewer than P distinct members.
        combined.clear();
        std::vector<Individual> copies;
        std::set<Chromosome> seen;
        for (auto* src : {&pop, &offspring}) {
            for (auto& ind : *src) {
                (seen.insert(ind.chromosome).second ? combined : copies).push_back(std::move(ind));
            }
        }
        detail::rank_and_crowd(combined);

        // Survivors by (rank, crowding); among equally crowded members the
        // per-objective minima go first so the best value of each objective
        // can never be lost.
        std::vector<std::uint8_t> holds_min(combined.size(), 0);
        for (std::size_t m = 0; m < ObjectiveVector::size(); ++m) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < combined.size(); ++i) {
                auto const& ci = combined[i];
                auto const& cb = combined[best];
                if (ci.objectives[m] < cb.objectives[m]
                    || (ci.objectives[m] == cb.objectives[m] && ci.rank < cb.rank)) {
                    best = i;
                }
            }
            holds_min[best] = 1;
        }
        std::vector<std::size_t> order(combined.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) {
            auto const& a = combined[i];
            auto const& b = combined[j];
            if (a.rank != b.rank) {
                return a.rank < b.rank;
            }
            if (a.crowding != b.crowding) {
                return a.crowding > b.crowding;
            }
            return holds_min[i] > holds_min[j];
        });
        std::vector<Individual> next;
        next.reserve(cfg.population);
        for (std::size_t k = 0; k < std::min(cfg.population, order.size()); ++k) {
            next.push_back(combined[order[k]]);
        }
        for (std::size_t k = 0; next.size() < cfg.population; ++k) {
            next.push_back(copies[k]);
        }
        pop = std::move(next);
        detail::rank_and_crowd(pop);
        record(pop);
    }

    // `combined` holds each chromosome once
    ParetoArchive archive;
    for (auto const& ind : combined) {
        if (ind.rank == 0) {
            archive.members.push_back({ind.chromosome, ind.objectives});
        }
    }
    std::sort(archive.members.begin(), archive.members.end(), [](auto const& a, auto const& b) {
        auto ka = std::make_tuple(a.objectives.coverage, a.objectives.cost, a.objectives.energy);
        auto kb = std::make_tuple(b.objectives.coverage, b.objectives.cost, b.objectives.energy);
        return ka != kb ? ka < kb : a.chromosome < b.chromosome;
    });
    return archive;
}

} // namespace seme

#endif // SEME_NSGA2_HPP

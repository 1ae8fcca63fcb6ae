#ifndef SEME_SEME_HPP
#define SEME_SEME_HPP

// Umbrella header for the SEE planning toolkit.

#include "seme/units.hpp"
#include "seme/geometry.hpp"
#include "seme/scenario.hpp"
#include "seme/chromosome.hpp"
#include "seme/propagation.hpp"
#include "seme/blindspot.hpp"
#include "seme/siteplanner.hpp"
#include "seme/objectives.hpp"
#include "seme/nsga2.hpp"
#include "seme/analysis.hpp"
#include "seme/pipeline.hpp"

#endif // SEME_SEME_HPP

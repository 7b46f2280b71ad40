#ifndef AGEAMP_AGEAMP_HPP
#define AGEAMP_AGEAMP_HPP

#include "age_metrics.hpp"
#include "capacity.hpp"
#include "core.hpp"
#include "csv.hpp"
#include "max_entropy.hpp"
#include "parallel.hpp"
#include "policies.hpp"
#include "regions.hpp"
#include "scalar_search.hpp"
#include "simulator.hpp"
#include "version.hpp"

#endif  // AGEAMP_AGEAMP_HPP

#pragma once

#include <string>

#include "dhc/generators.hpp"
#include "dhc/grid_set.hpp"

namespace dhc {

// Set-exchange format:
//   { "dim": n, "depth": K, "generator": {"name", "params", "seed"?},
//     "cells": [[m_1,...,m_n], ...] }
// with cells at depth K in lexicographic order. For n=1 a run-length variant
// "runs": [[start, len], ...] replaces "cells" when it is more compact.
// +infinity serializes as the string "inf" wherever reals appear.

std::string set_to_json(const NamedSet& s);
NamedSet set_from_json(const std::string& text);

void save_set(const NamedSet& s, const std::string& path);
NamedSet load_set(const std::string& path);

// Plain regions: same cell payload, no generator block.
std::string region_to_json(const GridRegion& r);

}  // namespace dhc

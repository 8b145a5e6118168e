#pragma once

#include "demand/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace demand {

struct SplitIndices {
    std::vector<Index> train, validation, test;
};

// Random three-way partition. Set sizes are the rounded fraction targets
// (train, validation first; test takes the remainder). Deterministic in seed.
SplitIndices make_split(Index n, const std::array<double, 3>& fractions, uint64_t seed);

}  // namespace demand

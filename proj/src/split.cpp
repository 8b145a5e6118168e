#include "demand/split.hpp"

#include "demand/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace demand {

SplitIndices make_split(Index n, const std::array<double, 3>& fractions, uint64_t seed) {
    if (n < 10) throw std::invalid_argument("make_split: need at least 10 rows");
    const double total = fractions[0] + fractions[1] + fractions[2];
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("make_split: fractions must sum to 1");
    for (double f : fractions)
        if (f <= 0) throw std::invalid_argument("make_split: fractions must be positive");

    const Index n_train = static_cast<Index>(std::llround(fractions[0] * static_cast<double>(n)));
    const Index n_val = static_cast<Index>(std::llround(fractions[1] * static_cast<double>(n)));
    const Index n_test = n - n_train - n_val;
    if (n_test < 0) throw std::invalid_argument("make_split: degenerate fractions");

    std::vector<Index> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    Rng rng(seed);
    rng.shuffle(perm);

    SplitIndices s;
    s.train.assign(perm.begin(), perm.begin() + n_train);
    s.validation.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
    s.test.assign(perm.begin() + n_train + n_val, perm.end());
    return s;
}

}  // namespace demand

#pragma once

#include "demand/dataset.hpp"
#include "demand/split.hpp"
#include "demand/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace demand {

struct RowKey {
    std::string sku_id, store_id, date;
};

struct ColumnStats {
    double mean = 0.0;
    double sd = 1.0;
};

struct DroppedColumn {
    std::string name;
    std::string reason;  // "constant" or "collinear"
};

// Everything needed to reproduce the column construction on new rows:
// dummy layout (one reference level dropped per categorical), the derived
// time vocabularies, per-column standardization parameters estimated on
// the training split, and the columns dropped on the way.
struct EncodingPlan {
    std::vector<std::string> column_names;       // kept columns, in order
    std::vector<ColumnStats> column_stats;       // aligned with column_names
    std::vector<std::string> year_levels;        // observed in the dataset
    std::vector<DroppedColumn> dropped_columns;
};

struct DesignMatrix {
    Matrix X;                              // n x k, standardized
    Vector y;                              // sales
    IntVector d;                           // censorship indicator, d[i] = 1{y[i] = 0}
    std::vector<RowKey> row_keys;
    std::vector<std::string> column_names;
};

// Fits the plan on the training rows of the split, then encodes all rows.
std::pair<DesignMatrix, EncodingPlan> build_design(const Dataset& ds, const SplitIndices& split);

// Encodes all rows with an already-fitted plan.
DesignMatrix build_design(const Dataset& ds, const EncodingPlan& plan);

Index column_index(const std::vector<std::string>& names, const std::string& name);

}  // namespace demand

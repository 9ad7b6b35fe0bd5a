#pragma once

#include <string>

#include "repdyn/epoch_grid.hpp"
#include "repdyn/tensor.hpp"

namespace repdyn {

enum class Metric { cka, drs };

inline const char* to_string(Metric m) { return m == Metric::cka ? "cka" : "drs"; }

/// values(i, j) compares the row run at row_epochs[i] with the column run at col_epochs[j].
struct SimilarityDiagram {
    EpochGrid row_epochs;
    EpochGrid col_epochs;
    Matrix values;
    Metric metric = Metric::cka;
    std::string layer_name;
    std::string run_id_row;
    std::string run_id_col;
};

}  // namespace repdyn

#pragma once

#include "fingering/grid.hpp"

#include <random>

namespace testing_helpers {

inline fingering::CellField random_cells(const fingering::StructuredGrid& g, unsigned seed, double lo = -1.0,
                                         double hi = 1.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    fingering::CellField f(g);
    for (double& v : f.values) v = dist(rng);
    return f;
}

inline fingering::FaceField random_faces(const fingering::StructuredGrid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    fingering::FaceField f(g);
    for (double& v : f.xvals) v = dist(rng);
    for (double& v : f.yvals) v = dist(rng);
    return f;
}

}  // namespace testing_helpers

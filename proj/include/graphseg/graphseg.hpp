#ifndef GRAPHSEG_GRAPHSEG_HPP
#define GRAPHSEG_GRAPHSEG_HPP

#include "graphseg/baselines.hpp"
#include "graphseg/datagen.hpp"
#include "graphseg/error.hpp"
#include "graphseg/format.hpp"
#include "graphseg/graph.hpp"
#include "graphseg/io.hpp"
#include "graphseg/losses.hpp"
#include "graphseg/piecewise.hpp"
#include "graphseg/plot.hpp"
#include "graphseg/simulate.hpp"
#include "graphseg/solver.hpp"

namespace graphseg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace graphseg

#endif  // GRAPHSEG_GRAPHSEG_HPP

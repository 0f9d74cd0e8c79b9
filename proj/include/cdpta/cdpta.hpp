#pragma once

#include "cdpta/generators.hpp"
#include "cdpta/io.hpp"
#include "cdpta/model.hpp"
#include "cdpta/rational.hpp"
#include "cdpta/region.hpp"
#include "cdpta/region_graph.hpp"
#include "cdpta/schedule.hpp"
#include "cdpta/solver.hpp"
#include "cdpta/validate.hpp"

#pragma once

#include "bench.hpp"
#include "browse.hpp"
#include "datagen.hpp"
#include "dataset.hpp"
#include "diversity.hpp"
#include "geometry.hpp"
#include "hash.hpp"
#include "oracle.hpp"
#include "rtree.hpp"
#include "scoring.hpp"
#include "solver.hpp"
#include "types.hpp"

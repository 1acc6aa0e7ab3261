#pragma once

#include "twl/discrete_core.hpp"
#include "twl/error.hpp"
#include "twl/estimation.hpp"
#include "twl/io.hpp"
#include "twl/model_gen.hpp"
#include "twl/partitions.hpp"
#include "twl/projection.hpp"
#include "twl/subset.hpp"
#include "twl/submodular.hpp"
#include "twl/treedecomp.hpp"

#pragma once

#include "sgap/dictionary.hpp"
#include "sgap/gap_bounds.hpp"
#include "sgap/generic_experiments.hpp"
#include "sgap/io.hpp"
#include "sgap/linalg.hpp"
#include "sgap/random_sets.hpp"
#include "sgap/schatten_rank.hpp"
#include "sgap/types.hpp"

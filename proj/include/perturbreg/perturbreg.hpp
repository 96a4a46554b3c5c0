#pragma once

#include "perturbreg/errors.hpp"
#include "perturbreg/grid_function.hpp"
#include "perturbreg/operators.hpp"
#include "perturbreg/regularization.hpp"
#include "perturbreg/stable_diff.hpp"
#include "perturbreg/fredholm.hpp"
#include "perturbreg/experiment.hpp"

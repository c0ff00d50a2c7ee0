#pragma once

#include "bomber/engine.hpp"
#include "bomber/errors.hpp"
#include "bomber/grid.hpp"
#include "bomber/grid_spec.hpp"
#include "bomber/mc.hpp"
#include "bomber/model.hpp"
#include "bomber/policy.hpp"
#include "bomber/props.hpp"

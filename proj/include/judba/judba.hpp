#pragma once

#include "judba/model.hpp"
#include "judba/physics.hpp"
#include "judba/solver.hpp"
#include "judba/oracle.hpp"
#include "judba/harness.hpp"
#include "judba/config_io.hpp"

#pragma once

#include "vpd/analysis.hpp"
#include "vpd/geometry.hpp"
#include "vpd/io.hpp"
#include "vpd/kernel.hpp"
#include "vpd/profiles.hpp"
#include "vpd/solver.hpp"

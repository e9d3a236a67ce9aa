#pragma once

#include "g4v/data.hpp"
#include "g4v/digest.hpp"
#include "g4v/error.hpp"
#include "g4v/fitting.hpp"
#include "g4v/io.hpp"
#include "g4v/levenberg_marquardt.hpp"
#include "g4v/physics.hpp"
#include "g4v/registry.hpp"
#include "g4v/simulate.hpp"
#include "g4v/version.hpp"

#pragma once

// Umbrella header for the infogeo toolkit.

#include "infogeo/commands.hpp"
#include "infogeo/common.hpp"
#include "infogeo/config.hpp"
#include "infogeo/geometry.hpp"
#include "infogeo/gridscan.hpp"
#include "infogeo/io.hpp"
#include "infogeo/likelihood.hpp"
#include "infogeo/linalg.hpp"
#include "infogeo/models.hpp"
#include "infogeo/odeint.hpp"
#include "infogeo/rng.hpp"
#include "infogeo/svg.hpp"
#include "infogeo/synth.hpp"

#pragma once

#include "vortexpin/quantum/contours.hpp"
#include "vortexpin/quantum/gaussian.hpp"
#include "vortexpin/quantum/grid.hpp"
#include "vortexpin/quantum/packet.hpp"
#include "vortexpin/quantum/spectrum.hpp"

#pragma once

// Everything: algebra, tracking, solving, varieties, membership, boundary, realness,
// decompositions, file formats and the example registry.
#include "boundary.hpp"
#include "generic.hpp"
#include "io.hpp"
#include "membership.hpp"
#include "realness.hpp"
#include "reproduce.hpp"

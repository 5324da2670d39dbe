#pragma once

// Umbrella header for the whole simulator library.

#include "types.hpp"      // IWYU pragma: export
#include "rng.hpp"        // IWYU pragma: export
#include "events.hpp"     // IWYU pragma: export
#include "config.hpp"     // IWYU pragma: export
#include "config_parser.hpp"  // IWYU pragma: export
#include "phy.hpp"        // IWYU pragma: export
#include "queue_state.hpp"  // IWYU pragma: export
#include "rpl.hpp"        // IWYU pragma: export
#include "qroute.hpp"     // IWYU pragma: export
#include "mac.hpp"        // IWYU pragma: export
#include "metrics.hpp"    // IWYU pragma: export
#include "engine.hpp"     // IWYU pragma: export
#include "presets.hpp"    // IWYU pragma: export

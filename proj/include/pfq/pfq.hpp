#pragma once

#include "pfq/core.hpp"
#include "pfq/clock_algebra.hpp"
#include "pfq/chain.hpp"
#include "pfq/effective.hpp"
#include "pfq/gates.hpp"
#include "pfq/magic.hpp"
#include "pfq/rydberg.hpp"

namespace pfq {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pfq

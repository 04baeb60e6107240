#pragma once

#include "gfstack/common.hpp"
#include "gfstack/convex_core.hpp"
#include "gfstack/energies.hpp"
#include "gfstack/functionals.hpp"
#include "gfstack/gradient_flow.hpp"
#include "gfstack/semigroup.hpp"
#include "gfstack/stacking.hpp"
#include "gfstack/transport.hpp"

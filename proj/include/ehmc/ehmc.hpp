#pragma once

#include "ehmc/linalg.hpp"
#include "ehmc/rng.hpp"
#include "ehmc/model.hpp"
#include "ehmc/subspace.hpp"
#include "ehmc/dynamics.hpp"
#include "ehmc/validate.hpp"
#include "ehmc/sampler.hpp"
#include "ehmc/diagnostics.hpp"
#include "ehmc/io.hpp"

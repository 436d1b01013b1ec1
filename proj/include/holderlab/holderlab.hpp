#pragma once

// Umbrella header: pulls in the whole toolkit.

#include "holderlab/cli.hpp"
#include "holderlab/embed.hpp"
#include "holderlab/errors.hpp"
#include "holderlab/exponents.hpp"
#include "holderlab/expr.hpp"
#include "holderlab/grid.hpp"
#include "holderlab/hoelder.hpp"
#include "holderlab/json_writer.hpp"
#include "holderlab/norms.hpp"
#include "holderlab/parallel.hpp"
#include "holderlab/version.hpp"

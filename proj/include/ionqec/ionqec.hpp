#pragma once

#include "ionqec/bench.hpp"
#include "ionqec/common.hpp"
#include "ionqec/coupling.hpp"
#include "ionqec/crystal.hpp"
#include "ionqec/engine.hpp"
#include "ionqec/io.hpp"
#include "ionqec/nelder_mead.hpp"
#include "ionqec/protocol.hpp"
#include "ionqec/rng.hpp"
#include "ionqec/search.hpp"
#include "ionqec/targets.hpp"

#pragma once

#include "hill/error.hpp"
#include "hill/floquet.hpp"
#include "hill/lemma_constants.hpp"
#include "hill/limitperiodic.hpp"
#include "hill/parallel.hpp"
#include "hill/potential.hpp"
#include "hill/propagator.hpp"
#include "hill/serialization.hpp"
#include "hill/sl2.hpp"
#include "hill/thinspec.hpp"

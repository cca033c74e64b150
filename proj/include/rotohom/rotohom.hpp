#pragma once

#include "rotohom/analysis.hpp"
#include "rotohom/config.hpp"
#include "rotohom/csv.hpp"
#include "rotohom/models.hpp"
#include "rotohom/oracle.hpp"
#include "rotohom/physics.hpp"
#include "rotohom/rng.hpp"
#include "rotohom/simulate.hpp"
#include "rotohom/svg.hpp"
#include "rotohom/util.hpp"
#include "rotohom/validate.hpp"

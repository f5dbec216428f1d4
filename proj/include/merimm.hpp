#pragma once

#include "merimm/contour.hpp"
#include "merimm/error.hpp"
#include "merimm/extend.hpp"
#include "merimm/immersion.hpp"
#include "merimm/param_grid.hpp"
#include "merimm/polynomial.hpp"
#include "merimm/rational.hpp"
#include "merimm/roots.hpp"
#include "merimm/runge.hpp"
#include "merimm/sphere.hpp"
#include "merimm/tolerances.hpp"

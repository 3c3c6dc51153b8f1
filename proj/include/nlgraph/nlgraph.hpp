#pragma once

#include "allen_cahn.hpp"
#include "csv.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "operators.hpp"
#include "point_cloud.hpp"
#include "poly_basis.hpp"
#include "polynomial.hpp"
#include "random.hpp"
#include "regress.hpp"
#include "state_series.hpp"
#include "state_taylor.hpp"
#include "stencil.hpp"
#include "taylor.hpp"

#pragma once

#include "core.hpp"
#include "parallel.hpp"
#include "modmath.hpp"
#include "diagonal_form.hpp"
#include "charsums.hpp"
#include "densities.hpp"
#include "weights.hpp"
#include "counting.hpp"
#include "sqrt_expsums.hpp"
#include "representations.hpp"

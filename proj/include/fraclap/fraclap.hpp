#pragma once

#include "fraclap/banded.hpp"
#include "fraclap/dense.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/integrator.hpp"
#include "fraclap/io.hpp"
#include "fraclap/laplacian.hpp"
#include "fraclap/problems.hpp"
#include "fraclap/quadrature.hpp"
#include "fraclap/rational.hpp"
#include "fraclap/spectral.hpp"

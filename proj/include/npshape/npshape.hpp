#pragma once

#include "npshape/checks.hpp"
#include "npshape/config.hpp"
#include "npshape/extrapolation.hpp"
#include "npshape/fourier.hpp"
#include "npshape/geometry.hpp"
#include "npshape/io.hpp"
#include "npshape/layer.hpp"
#include "npshape/shape_derivative.hpp"
#include "npshape/spectral.hpp"
#include "npshape/sphere.hpp"
#include "npshape/version.hpp"

// graylith.hpp - umbrella header: mesh in, calibrated grayscale mask out,
// plus the forward development simulation and residual analysis around it.
#pragma once

#include "graylith/analysis.hpp"
#include "graylith/calibration.hpp"
#include "graylith/config.hpp"
#include "graylith/devsim.hpp"
#include "graylith/errors.hpp"
#include "graylith/field.hpp"
#include "graylith/field_io.hpp"
#include "graylith/mask.hpp"
#include "graylith/mesh.hpp"
#include "graylith/mesh_io.hpp"
#include "graylith/raster.hpp"
#include "graylith/shapes.hpp"
#include "graylith/tiff.hpp"

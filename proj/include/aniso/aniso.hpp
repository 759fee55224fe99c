#pragma once

// Everything in one include.

#include "aniso/poly2d.hpp"
#include "aniso/spd2.hpp"
#include "aniso/optimal_metric.hpp"
#include "aniso/quadrature.hpp"
#include "aniso/fem_error.hpp"
#include "aniso/mesh.hpp"
#include "aniso/verify.hpp"
#include "aniso/remesh.hpp"
#include "aniso/medit.hpp"
#include "aniso/demo.hpp"

#pragma once

#include "ddmcert/core.hpp"
#include "ddmcert/linalg.hpp"
#include "ddmcert/quadrature.hpp"
#include "ddmcert/mesh.hpp"
#include "ddmcert/vtk.hpp"
#include "ddmcert/problem.hpp"
#include "ddmcert/schwarz.hpp"
#include "ddmcert/flux.hpp"
#include "ddmcert/majorant.hpp"
#include "ddmcert/pipeline.hpp"
#include "ddmcert/tables.hpp"
#include "ddmcert/config.hpp"
#include "ddmcert/output.hpp"

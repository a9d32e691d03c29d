#pragma once

#include "fpcross/error.hpp"
#include "fpcross/tt.hpp"
#include "fpcross/maxvol.hpp"
#include "fpcross/grid.hpp"
#include "fpcross/cross.hpp"
#include "fpcross/cheb.hpp"
#include "fpcross/expm.hpp"
#include "fpcross/ode.hpp"
#include "fpcross/solver.hpp"
#include "fpcross/models.hpp"

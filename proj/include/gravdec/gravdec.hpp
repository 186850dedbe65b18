#pragma once

#include "gravdec/error.hpp"
#include "gravdec/units.hpp"
#include "gravdec/mass_model.hpp"
#include "gravdec/cube_integral.hpp"
#include "gravdec/dp_rate.hpp"
#include "gravdec/decoherence.hpp"
#include "gravdec/poisson.hpp"
#include "gravdec/sn_solver.hpp"
#include "gravdec/com_decoupling.hpp"

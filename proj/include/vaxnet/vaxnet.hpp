#pragma once

#include "vaxnet/model.hpp"
#include "vaxnet/milp/problem.hpp"
#include "vaxnet/milp/simplex.hpp"
#include "vaxnet/milp/branch_and_bound.hpp"
#include "vaxnet/milp/lp_format.hpp"
#include "vaxnet/formulation.hpp"
#include "vaxnet/preprocess.hpp"
#include "vaxnet/metrics.hpp"
#include "vaxnet/report.hpp"
#include "vaxnet/instance_io.hpp"
#include "vaxnet/generator.hpp"
#include "vaxnet/experiments.hpp"

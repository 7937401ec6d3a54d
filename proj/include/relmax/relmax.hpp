#pragma once

#include "relmax/baselines.hpp"
#include "relmax/candidates.hpp"
#include "relmax/common.hpp"
#include "relmax/estimators.hpp"
#include "relmax/experiment.hpp"
#include "relmax/generators.hpp"
#include "relmax/graph.hpp"
#include "relmax/mrp_layered.hpp"
#include "relmax/multi_st.hpp"
#include "relmax/paths.hpp"
#include "relmax/selection.hpp"

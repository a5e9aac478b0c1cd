#pragma once

#include "qdgates/applications.hpp"
#include "qdgates/calibration.hpp"
#include "qdgates/core_model.hpp"
#include "qdgates/errors.hpp"
#include "qdgates/gate_algebra.hpp"
#include "qdgates/nnls.hpp"
#include "qdgates/phase.hpp"
#include "qdgates/pulse.hpp"
#include "qdgates/simulator.hpp"
#include "qdgates/verification.hpp"

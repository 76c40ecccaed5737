#pragma once

#include "model.hpp"
#include "tridiag_eigen.hpp"
#include "dynamics.hpp"
#include "stats.hpp"
#include "betafit.hpp"
#include "semiclassic.hpp"
#include "scan.hpp"

#pragma once

#include "kmsnorm/checks.hpp"
#include "kmsnorm/kappa.hpp"
#include "kmsnorm/limitlaw.hpp"
#include "kmsnorm/model.hpp"
#include "kmsnorm/oracle.hpp"
#include "kmsnorm/quadrature.hpp"
#include "kmsnorm/random.hpp"
#include "kmsnorm/sim.hpp"
#include "kmsnorm/specfun.hpp"
#include "kmsnorm/summation.hpp"
#include "kmsnorm/vg.hpp"

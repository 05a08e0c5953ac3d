// Umbrella header.

#ifndef LOWDISC_LOWDISC_HPP
#define LOWDISC_LOWDISC_HPP

#include "lowdisc/bigreal.hpp"
#include "lowdisc/heatflow.hpp"
#include "lowdisc/kronecker.hpp"
#include "lowdisc/newman.hpp"
#include "lowdisc/quadrature.hpp"
#include "lowdisc/specfun.hpp"
#include "lowdisc/theta.hpp"
#include "lowdisc/xi.hpp"
#include "lowdisc/zeros.hpp"

#endif  // LOWDISC_LOWDISC_HPP

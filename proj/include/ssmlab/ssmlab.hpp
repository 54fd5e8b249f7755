#pragma once

// Umbrella header.

#include "ssmlab/analytic.hpp"
#include "ssmlab/complex_seq.hpp"
#include "ssmlab/errors.hpp"
#include "ssmlab/graddyn.hpp"
#include "ssmlab/spectrum.hpp"
#include "ssmlab/ssm.hpp"
#include "ssmlab/suffstats.hpp"
#include "ssmlab/version.hpp"

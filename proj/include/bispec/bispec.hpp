#pragma once

#include "bispec/arithmetic.hpp"
#include "bispec/bilinear_estimates.hpp"
#include "bispec/bourgain.hpp"
#include "bispec/error.hpp"
#include "bispec/evolution.hpp"
#include "bispec/experiment.hpp"
#include "bispec/harmonic_basis.hpp"
#include "bispec/report.hpp"
#include "bispec/spectral_ops.hpp"
#include "bispec/strichartz.hpp"

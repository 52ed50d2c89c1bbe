#pragma once
// Umbrella header.

#include "isac_thz/channel.hpp"
#include "isac_thz/config.hpp"
#include "isac_thz/constants.hpp"
#include "isac_thz/coverage.hpp"
#include "isac_thz/errors.hpp"
#include "isac_thz/mcsim.hpp"
#include "isac_thz/misalignment.hpp"
#include "isac_thz/parallel.hpp"
#include "isac_thz/pattern.hpp"
#include "isac_thz/quadrature.hpp"
#include "isac_thz/report.hpp"
#include "isac_thz/sensing.hpp"
#include "isac_thz/specfun.hpp"

#pragma once

#include "poolrisk/cli.hpp"
#include "poolrisk/config.hpp"
#include "poolrisk/distortion.hpp"
#include "poolrisk/distributions.hpp"
#include "poolrisk/empirical.hpp"
#include "poolrisk/errors.hpp"
#include "poolrisk/experiments.hpp"
#include "poolrisk/orlicz.hpp"
#include "poolrisk/portfolio.hpp"
#include "poolrisk/random.hpp"
#include "poolrisk/risk.hpp"
#include "poolrisk/selftest.hpp"

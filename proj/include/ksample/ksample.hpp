#pragma once

#include "ksample/distributions.hpp"
#include "ksample/errors.hpp"
#include "ksample/inference.hpp"
#include "ksample/kernel.hpp"
#include "ksample/oracle.hpp"
#include "ksample/rng.hpp"
#include "ksample/sample.hpp"
#include "ksample/serialize.hpp"
#include "ksample/simulation.hpp"
#include "ksample/statistic.hpp"

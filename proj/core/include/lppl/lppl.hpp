#pragma once

#include "lppl/driver.hpp"
#include "lppl/error.hpp"
#include "lppl/ingest.hpp"
#include "lppl/init.hpp"
#include "lppl/linear.hpp"
#include "lppl/model.hpp"
#include "lppl/solver.hpp"
#include "lppl/synth.hpp"
#include "lppl/weights.hpp"

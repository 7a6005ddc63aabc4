#pragma once

#include "ineq/error.hpp"
#include "ineq/ingest.hpp"
#include "ineq/model.hpp"
#include "ineq/parallel.hpp"
#include "ineq/stats.hpp"
#include "ineq/synth.hpp"
#include "ineq/theil.hpp"

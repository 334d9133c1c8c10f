#pragma once

#include "raregap/core.hpp"
#include "raregap/estimators.hpp"
#include "raregap/experiment.hpp"
#include "raregap/hypothesis_test.hpp"
#include "raregap/ingest.hpp"
#include "raregap/simulate.hpp"

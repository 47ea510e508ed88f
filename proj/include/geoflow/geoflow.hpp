#pragma once

#include "geoflow/errors.hpp"
#include "geoflow/geometry.hpp"
#include "geoflow/models.hpp"
#include "geoflow/flow.hpp"
#include "geoflow/scenarios.hpp"
#include "geoflow/section.hpp"
#include "geoflow/analysis.hpp"
#include "geoflow/report.hpp"
#include "geoflow/config.hpp"
#include "geoflow/acceptance.hpp"

#pragma once

// Umbrella header.

#include "geoinf/asymptotics.hpp"
#include "geoinf/builtins.hpp"
#include "geoinf/classify.hpp"
#include "geoinf/cones.hpp"
#include "geoinf/error.hpp"
#include "geoinf/expr.hpp"
#include "geoinf/measure.hpp"
#include "geoinf/metric.hpp"
#include "geoinf/multiplicity.hpp"
#include "geoinf/oracles.hpp"
#include "geoinf/report.hpp"
#include "geoinf/sampling.hpp"
#include "geoinf/scene.hpp"
#include "geoinf/scene_parser.hpp"

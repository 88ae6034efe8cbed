#pragma once

#include "dotnav/dataset_io.hpp"
#include "dotnav/dynamic_detect.hpp"
#include "dotnav/error.hpp"
#include "dotnav/fixtures.hpp"
#include "dotnav/flow.hpp"
#include "dotnav/geometry.hpp"
#include "dotnav/metrics.hpp"
#include "dotnav/planning.hpp"
#include "dotnav/random.hpp"
#include "dotnav/simulation.hpp"

#pragma once

#include "votefuse/detectors/detector.hpp"
#include "votefuse/detectors/persist.hpp"
#include "votefuse/fusion/dual_fusion.hpp"
#include "votefuse/fusion/fixture.hpp"
#include "votefuse/normalize.hpp"
#include "votefuse/pipeline/config.hpp"
#include "votefuse/pipeline/report.hpp"
#include "votefuse/pipeline/run.hpp"
#include "votefuse/split.hpp"
#include "votefuse/timeseries.hpp"

#pragma once

#include "thermofield/baselines.hpp"
#include "thermofield/bench.hpp"
#include "thermofield/fieldcore.hpp"
#include "thermofield/image.hpp"
#include "thermofield/imgio.hpp"
#include "thermofield/iqa.hpp"
#include "thermofield/iqa_batch.hpp"
#include "thermofield/params.hpp"
#include "thermofield/rescaler.hpp"

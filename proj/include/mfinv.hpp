#pragma once

#include "mfinv/cascade.hpp"
#include "mfinv/commands.hpp"
#include "mfinv/error.hpp"
#include "mfinv/grids.hpp"
#include "mfinv/inversion.hpp"
#include "mfinv/io.hpp"
#include "mfinv/isotonic.hpp"
#include "mfinv/measure.hpp"
#include "mfinv/partition.hpp"
#include "mfinv/pdf.hpp"
#include "mfinv/pipeline.hpp"
#include "mfinv/scaling.hpp"

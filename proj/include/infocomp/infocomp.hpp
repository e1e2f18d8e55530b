#pragma once

#include "infocomp/error.hpp"
#include "infocomp/parallel.hpp"
#include "infocomp/core.hpp"
#include "infocomp/estimators.hpp"
#include "infocomp/similarity.hpp"
#include "infocomp/kernel.hpp"
#include "infocomp/optics.hpp"
#include "infocomp/channels.hpp"
#include "infocomp/fusion.hpp"
#include "infocomp/bench.hpp"
#include "infocomp/io.hpp"

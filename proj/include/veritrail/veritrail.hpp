#pragma once

#include "veritrail/common.hpp"
#include "veritrail/graph.hpp"
#include "veritrail/segmentation.hpp"
#include "veritrail/claims.hpp"
#include "veritrail/lm.hpp"
#include "veritrail/prompts.hpp"
#include "veritrail/scripted.hpp"
#include "veritrail/trail.hpp"
#include "veritrail/verifier.hpp"
#include "veritrail/metrics.hpp"
#include "veritrail/synth.hpp"
#include "veritrail/http_backend.hpp"

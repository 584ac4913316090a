#pragma once

// Everything, for tools and tests that want the whole pipeline.

#include "wigest/actions.hpp"
#include "wigest/denoiser.hpp"
#include "wigest/error.hpp"
#include "wigest/evaluation.hpp"
#include "wigest/extractor.hpp"
#include "wigest/fusion.hpp"
#include "wigest/gesture.hpp"
#include "wigest/pipeline.hpp"
#include "wigest/segmenter.hpp"
#include "wigest/simulator.hpp"
#include "wigest/templates.hpp"
#include "wigest/trace.hpp"
#include "wigest/types.hpp"
#include "wigest/wavelet.hpp"

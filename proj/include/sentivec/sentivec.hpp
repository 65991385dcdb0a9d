#pragma once

#include "sentivec/corpus.hpp"
#include "sentivec/eval.hpp"
#include "sentivec/io_util.hpp"
#include "sentivec/model.hpp"
#include "sentivec/model_io.hpp"
#include "sentivec/optimizer.hpp"
#include "sentivec/rng.hpp"
#include "sentivec/spectrum.hpp"
#include "sentivec/synth.hpp"

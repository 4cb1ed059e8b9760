#pragma once

#include "srl/analysis.hpp"
#include "srl/checkpoint.hpp"
#include "srl/conll.hpp"
#include "srl/ensemble.hpp"
#include "srl/error.hpp"
#include "srl/evaluator.hpp"
#include "srl/model.hpp"
#include "srl/nnet.hpp"
#include "srl/rng.hpp"
#include "srl/subword.hpp"
#include "srl/synth.hpp"
#include "srl/tensor.hpp"
#include "srl/trainer.hpp"
#include "srl/utf8.hpp"

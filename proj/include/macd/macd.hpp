#ifndef MACD_MACD_HPP
#define MACD_MACD_HPP

// Masked adversarial cell-type deconvolution for spatial transcriptomics.
// Umbrella header.

#include "macd/checkpoint.hpp"
#include "macd/commands.hpp"
#include "macd/config.hpp"
#include "macd/error.hpp"
#include "macd/io.hpp"
#include "macd/matrix.hpp"
#include "macd/metrics.hpp"
#include "macd/model.hpp"
#include "macd/nn/adam.hpp"
#include "macd/nn/layers.hpp"
#include "macd/nn/losses.hpp"
#include "macd/preprocess.hpp"
#include "macd/random.hpp"
#include "macd/simulate.hpp"
#include "macd/train.hpp"
#include "macd/types.hpp"

#endif

#pragma once

#include "semcom/affinity.hpp"
#include "semcom/classifier.hpp"
#include "semcom/core.hpp"
#include "semcom/experiment.hpp"
#include "semcom/huffman.hpp"
#include "semcom/io.hpp"
#include "semcom/metrics.hpp"
#include "semcom/neural.hpp"
#include "semcom/phy.hpp"
#include "semcom/quantizer.hpp"
#include "semcom/rs.hpp"
#include "semcom/vqae.hpp"

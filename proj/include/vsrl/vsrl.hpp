// Umbrella header.

#pragma once

#include "vsrl/classifiers.hpp"
#include "vsrl/clustering.hpp"
#include "vsrl/corpus.hpp"
#include "vsrl/error.hpp"
#include "vsrl/evaluation.hpp"
#include "vsrl/extraction.hpp"
#include "vsrl/features.hpp"
#include "vsrl/labelling.hpp"
#include "vsrl/metrics.hpp"
#include "vsrl/treebank.hpp"

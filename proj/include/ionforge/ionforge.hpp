#pragma once

#include "chain.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "fingerprint.hpp"
#include "forward_model.hpp"
#include "io.hpp"
#include "lattice.hpp"
#include "network.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "random.hpp"
#include "scaling.hpp"
#include "train.hpp"

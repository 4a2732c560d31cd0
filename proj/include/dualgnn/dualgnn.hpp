#pragma once

#include "dualgnn/errors.hpp"
#include "dualgnn/diff/sparse.hpp"
#include "dualgnn/diff/tape.hpp"
#include "dualgnn/diff/ops.hpp"
#include "dualgnn/diff/grad_check.hpp"
#include "dualgnn/graph/graph.hpp"
#include "dualgnn/graph/seed.hpp"
#include "dualgnn/graph/normalize.hpp"
#include "dualgnn/graph/io.hpp"
#include "dualgnn/graph/corrupt.hpp"
#include "dualgnn/graph/sbm.hpp"
#include "dualgnn/model/params.hpp"
#include "dualgnn/model/adjacency.hpp"
#include "dualgnn/model/dual.hpp"
#include "dualgnn/model/losses.hpp"
#include "dualgnn/train/adam.hpp"
#include "dualgnn/train/trainer.hpp"
#include "dualgnn/exp/experiment.hpp"
#include "dualgnn/exp/results.hpp"

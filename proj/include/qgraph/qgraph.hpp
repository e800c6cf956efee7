#pragma once

#include "qgraph/discretization.hpp"
#include "qgraph/functionals.hpp"
#include "qgraph/gn_estimator.hpp"
#include "qgraph/graph.hpp"
#include "qgraph/p1.hpp"
#include "qgraph/parallel.hpp"
#include "qgraph/random_fields.hpp"
#include "qgraph/reference.hpp"
#include "qgraph/report.hpp"
#include "qgraph/solver.hpp"
#include "qgraph/summation.hpp"
#include "qgraph/topology.hpp"
#include "qgraph/transforms.hpp"

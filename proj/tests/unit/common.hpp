#pragma once

#include <string>

#include "qgraph/qgraph.hpp"

inline qgraph::MetricGraph fixture(const std::string& name) {
  return qgraph::load_graph(std::string(QGRAPH_FIXTURE_DIR) + "/" + name + ".graph");
}

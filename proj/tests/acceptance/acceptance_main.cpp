// One line per acceptance criterion. Exit status is 0 once every criterion
// has run and reported; --strict makes any FAIL line a nonzero exit.
#include <cstring>
#include <thread>

#include "qgraph/acceptance.hpp"

int main(int argc, char** argv) {
  qgraph::acceptance::Options o;
  o.fixture_dir = QGRAPH_FIXTURE_DIR;
  o.workers = std::max(1u, std::thread::hardware_concurrency());
  bool strict = false;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--strict"))
      strict = true;
    else if (!std::strcmp(argv[i], "--quiet"))
      o.verbose = false;
    else
      o.only.insert(argv[i]);
  }
  const auto res = qgraph::acceptance::run(o);
  bool all = true;
  for (const auto& r : res) all &= r.passed;
  return strict && !all ? 1 : 0;
}

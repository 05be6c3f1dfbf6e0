#ifndef GBART_SERIALIZE_HPP
#define GBART_SERIALIZE_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "gbart/tree.hpp"

namespace gbart {

// One posterior draw of the whole ensemble, as stored on disk.
struct ForestSnapshot {
  int draw = 0;
  int chain = 0;
  std::string model;
  Forest forest;
  std::vector<double> nuisance;
};

// Text format, one record per line:
//   forest draw=<k> chain=<c> trees=<T> sigma_mu=<v> model=<name>
//          split_probs=<a,b,...> nuisance=<a,b,...>
//   node tree=<t> path=<.|L/R steps> kind=branch feature=<j> cutpoint=<c>
//   node tree=<t> path=<.|L/R steps> kind=leaf value=<v>
// The root path is "." and every branch must be followed (anywhere in the
// block) by records covering both subtrees.
void write_forest_snapshot(std::ostream& out, const ForestSnapshot& snapshot);

void save_forests(const std::vector<ForestSnapshot>& snapshots,
                  const std::string& path);

std::vector<ForestSnapshot> load_forests(const std::string& path);

}  // namespace gbart

#endif

#ifndef GBART_DATA_HPP
#define GBART_DATA_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace gbart {

// Per-column affine map used to bring covariates into [0, 1]; kept so query
// data can be mapped with the training ranges.
struct ColumnScale {
  double min = 0.0;
  double max = 1.0;
};

struct Dataset {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> x;      // row-major n x p, values in [0, 1]
  std::vector<double> y;
  std::vector<double> delta;  // empty, or n event indicators in {0, 1}
  std::vector<ColumnScale> scaling;

  const double* row(std::size_t i) const { return x.data() + i * p; }
  bool has_delta() const { return !delta.empty(); }
};

// CSV with header x1..xP, y, optional delta (any column order). Covariates
// are min-max rescaled to [0, 1]; a constant column maps to 0.5. Errors name
// the offending row and column.
Dataset load_dataset(const std::string& path);

// Same schema, but covariates are mapped with the supplied training scales
// and clamped into [0, 1].
Dataset load_dataset(const std::string& path,
                     const std::vector<ColumnScale>& scaling);

void save_dataset(const Dataset& data, const std::string& path);

void save_scaling(const std::vector<ColumnScale>& scaling,
                  const std::string& path);
std::vector<ColumnScale> load_scaling(const std::string& path);

// 17 significant digits; round-trips any double exactly.
std::string format_double(double value);

}  // namespace gbart

#endif

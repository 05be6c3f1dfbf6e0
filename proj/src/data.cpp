#include "gbart/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "gbart/error.hpp"

namespace gbart {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_number(const std::string& text, std::size_t row,
                    const std::string& column) {
  try {
    std::size_t used = 0;
    double value = std::stod(text, &used);
    while (used < text.size() &&
           std::isspace(static_cast<unsigned char>(text[used])))
      ++used;
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ParseError("row " + std::to_string(row) + ", column " + column +
                     ": cannot parse \"" + text + "\" as a number");
  }
}

struct RawTable {
  std::vector<int> feature_of_column;  // -1 unless column is x<j>
  int y_column = -1;
  int delta_column = -1;
  std::size_t p = 0;
  std::vector<std::vector<double>> rows;
};

RawTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw ParseError(path + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  RawTable table;
  std::vector<std::string> header = split_csv_line(line);
  table.feature_of_column.assign(header.size(), -1);
  std::vector<bool> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name == "y") {
      if (table.y_column >= 0) throw ParseError(path + ": duplicate y column");
      table.y_column = static_cast<int>(c);
    } else if (name == "delta") {
      if (table.delta_column >= 0)
        throw ParseError(path + ": duplicate delta column");
      table.delta_column = static_cast<int>(c);
    } else if (name.size() > 1 && name[0] == 'x') {
      int j = 0;
      try {
        j = std::stoi(name.substr(1));
      } catch (const std::exception&) {
        throw ParseError(path + ": unrecognized column \"" + name + "\"");
      }
      if (j < 1) throw ParseError(path + ": covariate index in \"" + name +
                                  "\" must be >= 1");
      table.feature_of_column[c] = j - 1;
      if (static_cast<std::size_t>(j) > table.p)
        table.p = static_cast<std::size_t>(j);
    } else {
      throw ParseError(path + ": unrecognized column \"" + name + "\"");
    }
  }
  if (table.y_column < 0) throw ParseError(path + ": no y column");
  seen.assign(table.p, false);
  for (int f : table.feature_of_column)
    if (f >= 0) {
      if (seen[f])
        throw ParseError(path + ": duplicate covariate column x" +
                         std::to_string(f + 1));
      seen[f] = true;
    }
  for (std::size_t j = 0; j < table.p; ++j)
    if (!seen[j])
      throw ParseError(path + ": missing covariate column x" +
                       std::to_string(j + 1));

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ParseError("row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    std::vector<double> values(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c)
      values[c] = parse_number(fields[c], row, header[c]);
    table.rows.push_back(std::move(values));
  }
  if (table.rows.empty()) throw ParseError(path + ": no data rows");
  return table;
}

Dataset assemble(const RawTable& table, const std::vector<ColumnScale>* given) {
  Dataset data;
  data.n = table.rows.size();
  data.p = table.p;
  data.x.assign(data.n * data.p, 0.0);
  data.y.resize(data.n);
  if (table.delta_column >= 0) data.delta.resize(data.n);

  for (std::size_t i = 0; i < data.n; ++i) {
    const std::vector<double>& row = table.rows[i];
    data.y[i] = row[table.y_column];
    if (table.delta_column >= 0) {
      double d = row[table.delta_column];
      if (d != 0.0 && d != 1.0)
        throw InputError("row " + std::to_string(i + 2) +
                         ", column delta: value must be 0 or 1");
      data.delta[i] = d;
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      int f = table.feature_of_column[c];
      if (f >= 0) data.x[i * data.p + f] = row[c];
    }
  }

  if (given) {
    if (given->size() != data.p)
      throw InputError("scaling record has " + std::to_string(given->size()) +
                       " columns, data has " + std::to_string(data.p));
    data.scaling = *given;
    for (std::size_t i = 0; i < data.n; ++i)
      for (std::size_t j = 0; j < data.p; ++j) {
        const ColumnScale& s = data.scaling[j];
        double& v = data.x[i * data.p + j];
        v = s.max > s.min ? (v - s.min) / (s.max - s.min) : 0.5;
        v = std::clamp(v, 0.0, 1.0);
      }
    return data;
  }

  data.scaling.resize(data.p);
  for (std::size_t j = 0; j < data.p; ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < data.n; ++i) {
      lo = std::min(lo, data.x[i * data.p + j]);
      hi = std::max(hi, data.x[i * data.p + j]);
    }
    data.scaling[j] = {lo, hi};
    for (std::size_t i = 0; i < data.n; ++i) {
      double& v = data.x[i * data.p + j];
      v = hi > lo ? (v - lo) / (hi - lo) : 0.5;
    }
  }
  return data;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  return assemble(read_table(path), nullptr);
}

Dataset load_dataset(const std::string& path,
                     const std::vector<ColumnScale>& scaling) {
  return assemble(read_table(path), &scaling);
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open file for writing: " + path);
  for (std::size_t j = 0; j < data.p; ++j) out << "x" << (j + 1) << ",";
  out << "y";
  if (data.has_delta()) out << ",delta";
  out << "\n";
  for (std::size_t i = 0; i < data.n; ++i) {
    for (std::size_t j = 0; j < data.p; ++j)
      out << format_double(data.x[i * data.p + j]) << ",";
    out << format_double(data.y[i]);
    if (data.has_delta()) out << "," << format_double(data.delta[i]);
    out << "\n";
  }
}

void save_scaling(const std::vector<ColumnScale>& scaling,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open file for writing: " + path);
  out << "column,min,max\n";
  for (std::size_t j = 0; j < scaling.size(); ++j)
    out << "x" << (j + 1) << "," << format_double(scaling[j].min) << ","
        << format_double(scaling[j].max) << "\n";
}

std::vector<ColumnScale> load_scaling(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scaling file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty scaling file");
  std::vector<ColumnScale> scaling;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 3)
      throw ParseError(path + ": row " + std::to_string(row) +
                       ": expected column,min,max");
    ColumnScale s;
    s.min = parse_number(fields[1], row, "min");
    s.max = parse_number(fields[2], row, "max");
    scaling.push_back(s);
  }
  return scaling;
}

}  // namespace gbart

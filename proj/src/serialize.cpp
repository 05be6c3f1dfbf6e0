#include "gbart/serialize.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gbart/data.hpp"
#include "gbart/error.hpp"

namespace gbart {

namespace {

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ",";
    out += format_double(values[i]);
  }
  return out;
}

void write_tree(std::ostream& out, const DecisionTree& tree, int index) {
  std::vector<int> stack{tree.root()};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    out << "node tree=" << index << " path=" << tree.path_of(id);
    if (tree.is_leaf(id)) {
      out << " kind=leaf value=" << format_double(tree.leaf_value(id))
          << "\n";
    } else {
      const SplitRule& rule = tree.node(id).rule;
      out << " kind=branch feature=" << rule.feature
          << " cutpoint=" << format_double(rule.cutpoint) << "\n";
      stack.push_back(tree.node(id).right);
      stack.push_back(tree.node(id).left);
    }
  }
}

struct NodeRecord {
  int tree = -1;
  std::string path;
  bool branch = false;
  int feature = -1;
  double cutpoint = 0.0;
  double value = 0.0;
  std::size_t line = 0;
};

struct HeaderRecord {
  int draw = 0;
  int chain = 0;
  int trees = 0;
  double sigma_mu = 1.0;
  std::string model;
  std::vector<double> split_probs;
  std::vector<double> nuisance;
  std::size_t line = 0;
};

[[noreturn]] void fail(const std::string& file, std::size_t line,
                       const std::string& what) {
  throw ParseError(file + ": line " + std::to_string(line) + ": " + what);
}

std::map<std::string, std::string> parse_fields(const std::string& file,
                                                std::size_t line,
                                                std::istringstream& tokens) {
  std::map<std::string, std::string> fields;
  std::string token;
  while (tokens >> token) {
    std::size_t eq = token.find('=');
    if (eq == std::string::npos)
      fail(file, line, "expected key=value, got \"" + token + "\"");
    std::string key = token.substr(0, eq);
    if (!fields.emplace(key, token.substr(eq + 1)).second)
      fail(file, line, "duplicate field \"" + key + "\"");
  }
  return fields;
}

std::string take(const std::string& file, std::size_t line,
                 std::map<std::string, std::string>& fields,
                 const std::string& key) {
  auto it = fields.find(key);
  if (it == fields.end()) fail(file, line, "missing field \"" + key + "\"");
  std::string value = it->second;
  fields.erase(it);
  return value;
}

int parse_int(const std::string& file, std::size_t line,
              const std::string& value) {
  try {
    std::size_t used = 0;
    int out = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    fail(file, line, "bad integer \"" + value + "\"");
  }
}

double parse_num(const std::string& file, std::size_t line,
                 const std::string& value) {
  try {
    std::size_t used = 0;
    double out = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    fail(file, line, "bad number \"" + value + "\"");
  }
}

std::vector<double> parse_num_list(const std::string& file, std::size_t line,
                                   const std::string& value) {
  std::vector<double> out;
  if (value.empty()) return out;
  std::stringstream ss(value);
  std::string field;
  while (std::getline(ss, field, ','))
    out.push_back(parse_num(file, line, field));
  return out;
}

std::size_t path_depth(const std::string& path) {
  return path == "." ? 0 : path.size();
}

DecisionTree build_tree(const std::string& file, const HeaderRecord& header,
                        int index, std::vector<const NodeRecord*> records) {
  std::set<std::string> seen;
  for (const NodeRecord* record : records)
    if (!seen.insert(record->path).second)
      fail(file, record->line,
           "duplicate record for tree " + std::to_string(index) + " node " +
               record->path);
  std::stable_sort(records.begin(), records.end(),
                   [](const NodeRecord* a, const NodeRecord* b) {
                     return path_depth(a->path) < path_depth(b->path);
                   });
  DecisionTree tree;
  std::size_t leaf_records = 0;
  for (const NodeRecord* record : records) {
    if (!record->branch) continue;
    int id = tree.node_at(record->path);
    if (id < 0)
      fail(file, record->line,
           "tree " + std::to_string(index) + " node " + record->path +
               " has no branch leading to it");
    tree = tree.with_birth(id, SplitRule{record->feature, record->cutpoint},
                           0.0, 0.0);
  }
  for (const NodeRecord* record : records) {
    if (record->branch) continue;
    int id = tree.node_at(record->path);
    if (id < 0 || !tree.is_leaf(id))
      fail(file, record->line,
           "tree " + std::to_string(index) + " node " + record->path +
               " is not a leaf of the assembled tree");
    tree.set_leaf_value(id, record->value);
    ++leaf_records;
  }
  if (leaf_records != tree.leaves().size()) {
    for (int id : tree.leaves()) {
      std::string path = tree.path_of(id);
      if (!seen.count(path))
        fail(file, header.line,
             "draw " + std::to_string(header.draw) + " tree " +
                 std::to_string(index) + " is missing a record for node " +
                 path);
    }
  }
  return tree;
}

ForestSnapshot finalize(const std::string& file, const HeaderRecord& header,
                        const std::vector<NodeRecord>& records) {
  ForestSnapshot snapshot;
  snapshot.draw = header.draw;
  snapshot.chain = header.chain;
  snapshot.model = header.model;
  snapshot.nuisance = header.nuisance;
  snapshot.forest.sigma_mu = header.sigma_mu;
  snapshot.forest.split_probs = header.split_probs;
  std::vector<std::vector<const NodeRecord*>> per_tree(header.trees);
  for (const NodeRecord& record : records) {
    if (record.tree < 0 || record.tree >= header.trees)
      fail(file, record.line,
           "tree index " + std::to_string(record.tree) +
               " outside the declared count " + std::to_string(header.trees));
    per_tree[record.tree].push_back(&record);
  }
  snapshot.forest.trees.reserve(header.trees);
  for (int t = 0; t < header.trees; ++t)
    snapshot.forest.trees.push_back(
        build_tree(file, header, t, per_tree[t]));
  return snapshot;
}

}  // namespace

void write_forest_snapshot(std::ostream& out, const ForestSnapshot& snapshot) {
  out << "forest draw=" << snapshot.draw << " chain=" << snapshot.chain
      << " trees=" << snapshot.forest.trees.size()
      << " sigma_mu=" << format_double(snapshot.forest.sigma_mu)
      << " model=" << snapshot.model
      << " split_probs=" << join_doubles(snapshot.forest.split_probs)
      << " nuisance=" << join_doubles(snapshot.nuisance) << "\n";
  for (std::size_t t = 0; t < snapshot.forest.trees.size(); ++t)
    write_tree(out, snapshot.forest.trees[t], static_cast<int>(t));
}

void save_forests(const std::vector<ForestSnapshot>& snapshots,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open file for writing: " + path);
  for (const ForestSnapshot& snapshot : snapshots)
    write_forest_snapshot(out, snapshot);
}

std::vector<ForestSnapshot> load_forests(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open forest file: " + path);
  std::vector<ForestSnapshot> snapshots;
  bool have_header = false;
  HeaderRecord header;
  std::vector<NodeRecord> records;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream tokens(line);
    std::string type;
    tokens >> type;
    if (type == "forest") {
      if (have_header) snapshots.push_back(finalize(path, header, records));
      auto fields = parse_fields(path, lineno, tokens);
      header = HeaderRecord{};
      header.line = lineno;
      header.draw = parse_int(path, lineno, take(path, lineno, fields, "draw"));
      header.trees =
          parse_int(path, lineno, take(path, lineno, fields, "trees"));
      header.sigma_mu =
          parse_num(path, lineno, take(path, lineno, fields, "sigma_mu"));
      header.model = take(path, lineno, fields, "model");
      if (fields.count("chain"))
        header.chain =
            parse_int(path, lineno, take(path, lineno, fields, "chain"));
      if (fields.count("split_probs"))
        header.split_probs = parse_num_list(
            path, lineno, take(path, lineno, fields, "split_probs"));
      if (fields.count("nuisance"))
        header.nuisance = parse_num_list(
            path, lineno, take(path, lineno, fields, "nuisance"));
      if (!fields.empty())
        fail(path, lineno, "unknown field \"" + fields.begin()->first + "\"");
      if (header.trees < 1) fail(path, lineno, "trees must be >= 1");
      records.clear();
      have_header = true;
    } else if (type == "node") {
      if (!have_header)
        fail(path, lineno, "node record before any forest header");
      auto fields = parse_fields(path, lineno, tokens);
      NodeRecord record;
      record.line = lineno;
      record.tree = parse_int(path, lineno, take(path, lineno, fields, "tree"));
      record.path = take(path, lineno, fields, "path");
      if (record.path.empty() ||
          (record.path != "." &&
           record.path.find_first_not_of("LR") != std::string::npos))
        fail(path, lineno, "bad node path \"" + record.path + "\"");
      std::string kind = take(path, lineno, fields, "kind");
      if (kind == "branch") {
        record.branch = true;
        record.feature =
            parse_int(path, lineno, take(path, lineno, fields, "feature"));
        record.cutpoint =
            parse_num(path, lineno, take(path, lineno, fields, "cutpoint"));
        if (record.feature < 0) fail(path, lineno, "feature must be >= 0");
      } else if (kind == "leaf") {
        record.value =
            parse_num(path, lineno, take(path, lineno, fields, "value"));
      } else {
        fail(path, lineno, "unknown node kind \"" + kind + "\"");
      }
      if (!fields.empty())
        fail(path, lineno, "unknown field \"" + fields.begin()->first + "\"");
      records.push_back(std::move(record));
    } else {
      fail(path, lineno, "unknown record type \"" + type + "\"");
    }
  }
  if (have_header) snapshots.push_back(finalize(path, header, records));
  return snapshots;
}

}  // namespace gbart

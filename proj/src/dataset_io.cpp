#include "featprop/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace featprop {

namespace fs = std::filesystem;

std::optional<DatasetFormat> parse_dataset_format(std::string_view name) {
  if (name == "content-cites") return DatasetFormat::content_cites;
  if (name == "json") return DatasetFormat::json;
  return std::nullopt;
}

std::string_view format_name(DatasetFormat format) {
  return format == DatasetFormat::json ? "json" : "content-cites";
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == '\t' || line[i] == ' ' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != '\t' && line[i] != ' ' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

// Maps labels to dense ids by first appearance.
template <typename Key>
class Interner {
 public:
  int id(const Key& key) {
    auto [it, inserted] = ids_.try_emplace(key, static_cast<int>(keys_.size()));
    if (inserted) keys_.push_back(key);
    return it->second;
  }
  int size() const { return static_cast<int>(keys_.size()); }
  const std::vector<Key>& keys() const { return keys_; }

 private:
  std::unordered_map<Key, int> ids_;
  std::vector<Key> keys_;
};

struct ContentCitesPaths {
  fs::path content;
  fs::path cites;
  std::string name;
};

ContentCitesPaths resolve_content_cites(const fs::path& path) {
  fs::path prefix = path;
  if (fs::is_directory(path)) {
    std::optional<fs::path> found;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.path().extension() == ".content") {
        if (found) throw Error("multiple .content files in " + path.string());
        found = entry.path();
      }
    }
    if (!found) throw Error("no .content file in " + path.string());
    prefix = *found;
    prefix.replace_extension();
  } else if (path.extension() == ".content" || path.extension() == ".cites") {
    prefix.replace_extension();
  }
  ContentCitesPaths out;
  out.content = prefix;
  out.content += ".content";
  out.cites = prefix;
  out.cites += ".cites";
  out.name = prefix.filename().string();
  return out;
}

Dataset load_content_cites(const fs::path& path, const LoadOptions& options) {
  const auto paths = resolve_content_cites(path);

  std::unordered_map<std::string, NodeId> node_ids;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  Interner<std::string> classes;
  std::size_t width = 0;

  {
    auto in = open_input(paths.content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto fields = split_fields(line);
      if (fields.empty()) continue;
      if (fields.size() < 3) {
        throw ParseError(paths.content.string(), line_no,
                         "expected node id, at least one feature and a label");
      }
      const std::size_t d = fields.size() - 2;
      if (rows.empty()) {
        width = d;
      } else if (d != width) {
        throw ParseError(paths.content.string(), line_no,
                         "expected " + std::to_string(width) + " features, found " +
                             std::to_string(d));
      }
      std::string id(fields.front());
      if (!node_ids.try_emplace(id, static_cast<NodeId>(rows.size())).second) {
        throw IntegrityError(paths.content.string() + ":" + std::to_string(line_no) +
                             ": duplicate node id '" + id + "'");
      }
      std::vector<double> row(d);
      for (std::size_t k = 0; k < d; ++k) {
        const auto f = fields[k + 1];
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[k]);
        if (ec != std::errc() || ptr != f.data() + f.size()) {
          throw ParseError(paths.content.string(), line_no,
                           "bad feature value '" + std::string(f) + "'");
        }
      }
      rows.push_back(std::move(row));
      labels.push_back(classes.id(std::string(fields.back())));
    }
  }

  std::vector<Edge> edges;
  {
    auto in = open_input(paths.cites);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto fields = split_fields(line);
      if (fields.empty()) continue;
      if (fields.size() != 2) {
        throw ParseError(paths.cites.string(), line_no, "expected two node ids");
      }
      auto a = node_ids.find(std::string(fields[0]));
      auto b = node_ids.find(std::string(fields[1]));
      if (a == node_ids.end() || b == node_ids.end()) {
        if (options.drop_unknown_edges) continue;
        const auto missing = a == node_ids.end() ? fields[0] : fields[1];
        throw IntegrityError(paths.cites.string() + ":" + std::to_string(line_no) +
                             ": edge references undeclared node '" + std::string(missing) + "'");
      }
      edges.emplace_back(a->second, b->second);
    }
  }

  const auto n = static_cast<NodeId>(rows.size());
  Matrix x(n, static_cast<Eigen::Index>(width));
  for (NodeId i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < width; ++k) x(i, static_cast<Eigen::Index>(k)) = rows[i][k];
  }

  Dataset ds;
  ds.name = paths.name;
  ds.graph = Graph::from_edges(n, edges);
  ds.features = FeatureMatrix(std::move(x));
  ds.labels = LabelVector(std::move(labels), classes.size());
  ds.class_names = classes.keys();
  return ds;
}

Dataset load_json(const fs::path& path) {
  nlohmann::json doc;
  {
    auto in = open_input(path);
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      // nlohmann reports a byte offset; convert to a line number.
      std::ifstream again(path);
      std::size_t line = 1;
      char c;
      for (std::size_t pos = 0; pos + 1 < e.byte && again.get(c); ++pos) {
        if (c == '\n') ++line;
      }
      throw ParseError(path.string(), line, e.what());
    }
  }
  const auto fail = [&](const std::string& what) { throw ParseError(path.string(), 1, what); };
  if (!doc.is_object()) fail("top level must be an object");
  for (const char* key : {"edges", "features", "labels"}) {
    if (!doc.contains(key) || !doc[key].is_array()) fail(std::string("missing array '") + key + "'");
  }

  const auto& feats = doc["features"];
  const auto n = static_cast<NodeId>(feats.size());
  const std::size_t d = n > 0 && feats[0].is_array() ? feats[0].size() : 0;
  Matrix x(n, static_cast<Eigen::Index>(d));
  for (NodeId i = 0; i < n; ++i) {
    const auto& row = feats[i];
    if (!row.is_array() || row.size() != d) fail("feature row " + std::to_string(i) + " has wrong width");
    for (std::size_t k = 0; k < d; ++k) {
      if (!row[k].is_number()) fail("non-numeric feature at row " + std::to_string(i));
      x(i, static_cast<Eigen::Index>(k)) = row[k].get<double>();
    }
  }

  const auto& raw_labels = doc["labels"];
  if (static_cast<NodeId>(raw_labels.size()) != n) {
    throw IntegrityError(path.string() + ": " + std::to_string(raw_labels.size()) +
                         " labels for " + std::to_string(n) + " nodes");
  }
  Interner<long long> classes;
  std::vector<int> labels;
  for (const auto& l : raw_labels) {
    if (!l.is_number_integer()) fail("labels must be integers");
    labels.push_back(classes.id(l.get<long long>()));
  }

  std::vector<Edge> edges;
  for (const auto& e : doc["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
      fail("edges must be [i, j] integer pairs");
    }
    const auto i = e[0].get<NodeId>();
    const auto j = e[1].get<NodeId>();
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw IntegrityError(path.string() + ": edge [" + std::to_string(i) + ", " +
                           std::to_string(j) + "] references undeclared node");
    }
    edges.emplace_back(i, j);
  }

  Dataset ds;
  ds.name = doc.value("name", path.stem().string());
  ds.graph = Graph::from_edges(n, edges);
  ds.features = FeatureMatrix(std::move(x));
  ds.labels = LabelVector(std::move(labels), classes.size());
  if (doc.contains("class_names") && doc["class_names"].is_array()) {
    std::vector<std::string> names;
    for (const auto& s : doc["class_names"]) names.push_back(s.get<std::string>());
    // Names are indexed by the original label values; keep them only when the
    // remapping was the identity.
    bool identity = true;
    for (int c = 0; c < classes.size(); ++c) identity = identity && classes.keys()[c] == c;
    if (identity && names.size() == static_cast<std::size_t>(classes.size())) ds.class_names = names;
  }
  return ds;
}

}  // namespace

Dataset load_dataset(const fs::path& path, DatasetFormat format, const LoadOptions& options) {
  Dataset ds = format == DatasetFormat::json ? load_json(path) : load_content_cites(path, options);
  if (options.row_normalize) ds.features = ds.features.row_normalized();
  ds.validate();
  return ds;
}

void save_json(const Dataset& dataset, const fs::path& path) {
  nlohmann::json doc;
  doc["name"] = dataset.name;
  auto edges = nlohmann::json::array();
  for (const auto& [i, j] : dataset.graph.edge_list()) edges.push_back({i, j});
  doc["edges"] = std::move(edges);
  auto feats = nlohmann::json::array();
  const Matrix& x = dataset.features.values();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < x.cols(); ++k) row.push_back(x(i, k));
    feats.push_back(std::move(row));
  }
  doc["features"] = std::move(feats);
  doc["labels"] = dataset.labels.values();
  if (!dataset.class_names.empty()) doc["class_names"] = dataset.class_names;

  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace featprop

#include "model_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>

#include "errors.hpp"

namespace colorforest {

namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "CFM";
constexpr int kFormatVersion = 1;

json config_to_json(const PipelineConfig& cfg) {
  json j;
  j["target_superpixel_size"] = cfg.target_superpixel_size;
  j["clusters"] = cfg.clusters;
  j["trees"] = cfg.trees;
  j["dims_per_node"] = cfg.dims_per_node;
  j["thresholds_per_dim"] = cfg.thresholds_per_dim;
  j["min_gain"] = cfg.min_gain;
  j["max_depth"] = cfg.max_depth;
  j["min_node"] = cfg.min_node;
  j["bootstrap"] = cfg.bootstrap;
  j["spatial_bandwidth"] = cfg.spatial_bandwidth;
  j["range_bandwidth"] = cfg.range_bandwidth;
  j["min_region"] = cfg.min_region;
  j["cg_tolerance"] = cfg.cg_tolerance;
  j["seed"] = cfg.seed;
  return j;
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig cfg;
  cfg.target_superpixel_size = j.at("target_superpixel_size").get<int>();
  cfg.clusters = j.at("clusters").get<int>();
  cfg.trees = j.at("trees").get<int>();
  cfg.dims_per_node = j.at("dims_per_node").get<int>();
  cfg.thresholds_per_dim = j.at("thresholds_per_dim").get<int>();
  cfg.min_gain = j.at("min_gain").get<double>();
  cfg.max_depth = j.at("max_depth").get<int>();
  cfg.min_node = j.at("min_node").get<int>();
  cfg.bootstrap = j.at("bootstrap").get<bool>();
  cfg.spatial_bandwidth = j.at("spatial_bandwidth").get<double>();
  cfg.range_bandwidth = j.at("range_bandwidth").get<double>();
  cfg.min_region = j.at("min_region").get<int>();
  cfg.cg_tolerance = j.at("cg_tolerance").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

json tree_to_json(const Tree& tree) {
  json records = json::array();
  for (const TreeNode& node : tree.nodes) {
    if (node.is_leaf) {
      records.push_back({{"type", "leaf"}, {"dist", node.dist}});
    } else {
      records.push_back({{"type", "split"}, {"n", node.dim}, {"tau", node.tau}});
    }
  }
  return records;
}

// Rebuilds one subtree from the pre-order record list starting at `pos`.
int node_from_records(const json& records, std::size_t& pos, int classes,
                      Tree& tree) {
  if (pos >= records.size()) {
    throw IoError("model file: tree record list is truncated");
  }
  const json& rec = records[pos++];
  const int me = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  const std::string type = rec.at("type").get<std::string>();
  if (type == "leaf") {
    TreeNode& node = tree.nodes[me];
    node.is_leaf = true;
    node.dist = rec.at("dist").get<std::vector<double>>();
    if (static_cast<int>(node.dist.size()) != classes) {
      throw IoError("model file: leaf distribution length " +
                    std::to_string(node.dist.size()) + " does not match palette size " +
                    std::to_string(classes));
    }
    for (double p : node.dist) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw IoError("model file: leaf distribution entry out of range");
      }
    }
    return me;
  }
  if (type != "split") {
    throw IoError("model file: unknown tree record type '" + type + "'");
  }
  const int dim = rec.at("n").get<int>();
  const double tau = rec.at("tau").get<double>();
  if (dim < 0 || dim >= kFeatureDim || !std::isfinite(tau)) {
    throw IoError("model file: split record (n=" + std::to_string(dim) +
                  ") is invalid");
  }
  tree.nodes[me].dim = dim;
  tree.nodes[me].tau = tau;
  const int left = node_from_records(records, pos, classes, tree);
  const int right = node_from_records(records, pos, classes, tree);
  tree.nodes[me].left = left;
  tree.nodes[me].right = right;
  return me;
}

Tree tree_from_json(const json& records, int classes) {
  if (!records.is_array() || records.empty()) {
    throw IoError("model file: each tree must be a non-empty record list");
  }
  Tree tree;
  std::size_t pos = 0;
  node_from_records(records, pos, classes, tree);
  if (pos != records.size()) {
    throw IoError("model file: " + std::to_string(records.size() - pos) +
                  " dangling tree records after the root subtree");
  }
  return tree;
}

}  // namespace

std::string serialize_model(const Model& model) {
  validate_model(model);
  json j;
  j["format"] = kFormatTag;
  j["version"] = kFormatVersion;
  j["config"] = config_to_json(model.config);
  json palette = json::array();
  for (const auto& [a, b] : model.palette.centers) {
    palette.push_back({a, b});
  }
  j["palette"] = std::move(palette);
  j["feature_scales"] = {{"gabor", model.feature_scales.gabor},
                         {"sift", model.feature_scales.sift}};
  json trees = json::array();
  for (const Tree& tree : model.forest.trees) {
    trees.push_back(tree_to_json(tree));
  }
  j["trees"] = std::move(trees);
  return j.dump() + "\n";
}

Model parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("model file: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormatTag) {
      throw IoError("model file: unrecognized format tag");
    }
    const int version = j.at("version").get<int>();
    if (version != kFormatVersion) {
      throw IoError("model file: unsupported version " + std::to_string(version) +
                    " (expected " + std::to_string(kFormatVersion) + ")");
    }

    Model model;
    model.config = config_from_json(j.at("config"));
    for (const json& entry : j.at("palette")) {
      if (!entry.is_array() || entry.size() != 2) {
        throw IoError("model file: palette entries must be [a, b] pairs");
      }
      model.palette.centers.emplace_back(entry[0].get<double>(),
                                         entry[1].get<double>());
    }
    model.feature_scales.gabor = j.at("feature_scales").at("gabor").get<double>();
    model.feature_scales.sift = j.at("feature_scales").at("sift").get<double>();

    model.forest.classes = model.palette.size();
    model.forest.config = model.config.forest_config();
    for (const json& records : j.at("trees")) {
      model.forest.trees.push_back(tree_from_json(records, model.forest.classes));
    }
    validate_model(model);
    return model;
  } catch (const json::exception& e) {
    throw IoError(std::string("model file: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("model file: ") + e.what());
  }
}

void save_model(const Model& model, const std::string& path) {
  const std::string text = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("failed writing model to '" + path + "'");
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading model file '" + path + "'");
  return parse_model(buffer.str());
}

void apply_config_kv(PipelineConfig& cfg, const std::string& key,
                     const std::string& value) {
  auto as_int = [&](int& field) {
    std::size_t used = 0;
    int parsed = 0;
    try {
      parsed = std::stoi(value, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("config: value '" + value + "' for '" + key +
                            "' is not an integer");
    }
    if (used != value.size()) {
      throw InvalidArgument("config: value '" + value + "' for '" + key +
                            "' is not an integer");
    }
    field = parsed;
  };
  auto as_double = [&](double& field) {
    std::size_t used = 0;
    double parsed = 0.0;
    try {
      parsed = std::stod(value, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("config: value '" + value + "' for '" + key +
                            "' is not a number");
    }
    if (used != value.size()) {
      throw InvalidArgument("config: value '" + value + "' for '" + key +
                            "' is not a number");
    }
    field = parsed;
  };
  auto as_bool = [&](bool& field) {
    if (value == "true" || value == "1") {
      field = true;
    } else if (value == "false" || value == "0") {
      field = false;
    } else {
      throw InvalidArgument("config: value '" + value + "' for '" + key +
                            "' is not a boolean");
    }
  };

  if (key == "target_superpixel_size") {
    as_int(cfg.target_superpixel_size);
  } else if (key == "clusters") {
    as_int(cfg.clusters);
  } else if (key == "trees") {
    as_int(cfg.trees);
  } else if (key == "dims_per_node") {
    as_int(cfg.dims_per_node);
  } else if (key == "thresholds_per_dim") {
    as_int(cfg.thresholds_per_dim);
  } else if (key == "min_gain") {
    as_double(cfg.min_gain);
  } else if (key == "max_depth") {
    as_int(cfg.max_depth);
  } else if (key == "min_node") {
    as_int(cfg.min_node);
  } else if (key == "bootstrap") {
    as_bool(cfg.bootstrap);
  } else if (key == "spatial_bandwidth") {
    as_double(cfg.spatial_bandwidth);
  } else if (key == "range_bandwidth") {
    as_double(cfg.range_bandwidth);
  } else if (key == "min_region") {
    as_int(cfg.min_region);
  } else if (key == "cg_tolerance") {
    as_double(cfg.cg_tolerance);
  } else if (key == "seed") {
    try {
      std::size_t used = 0;
      cfg.seed = std::stoull(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw InvalidArgument("config: value '" + value + "' for 'seed' is not an integer");
    }
  } else {
    throw InvalidArgument("config: unknown key '" + key + "'");
  }
}

PipelineConfig load_config_file(const std::string& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const std::size_t first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return std::string();
    const std::size_t last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config file line " + std::to_string(line_no) +
                            ": expected 'key=value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw InvalidArgument("config file line " + std::to_string(line_no) +
                            ": empty key");
    }
    try {
      apply_config_kv(base, key, value);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("config file line " + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  return base;
}

}  // namespace colorforest

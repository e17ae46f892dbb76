#include "spmds/feeder.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "spmds/csv.hpp"
#include "spmds/errors.hpp"

namespace spmds {

namespace {

void check_impedances(std::span<const Line> lines) {
  std::vector<std::string> problems;
  for (const auto& line : lines) {
    if (!(line.resistance >= 0.0) || !(line.reactance >= 0.0)) {
      problems.push_back("line " + std::to_string(line.parent) + "->" +
                         std::to_string(line.child) + " has a negative or non-finite impedance");
    }
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

// Nodes ordered so that every parent precedes its children.
std::vector<int> top_down_order(const std::vector<int>& parent) {
  const int n = static_cast<int>(parent.size()) - 1;
  std::vector<std::vector<int>> children(parent.size());
  for (int node = 1; node <= n; ++node) children[parent[node]].push_back(node);
  std::vector<int> order{0};
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (int child : children[order[head]]) order.push_back(child);
  }
  return order;
}

}  // namespace

std::vector<int> check_radial_topology(int node_count, std::span<const Line> lines) {
  if (node_count < 1) throw TopologyError("feeder needs at least one load node");
  std::vector<int> parent(node_count + 1, -1);
  for (const auto& line : lines) {
    const auto label = std::to_string(line.parent) + "->" + std::to_string(line.child);
    if (line.parent < 0 || line.parent > node_count || line.child < 0 ||
        line.child > node_count) {
      throw TopologyError("line " + label + " references a node outside 0.." +
                          std::to_string(node_count));
    }
    if (line.child == 0) throw TopologyError("line " + label + " feeds the slack node");
    if (line.parent == line.child) throw TopologyError("line " + label + " is a self loop");
    if (parent[line.child] != -1) {
      throw TopologyError("node " + std::to_string(line.child) + " has more than one parent");
    }
    parent[line.child] = line.parent;
  }
  for (int node = 1; node <= node_count; ++node) {
    if (parent[node] == -1) {
      throw TopologyError("node " + std::to_string(node) + " is disconnected from the slack node");
    }
  }
  // Every node has one parent, so a walk upwards either reaches 0 or loops.
  std::vector<int> state(node_count + 1, 0);  // 0 unseen, 1 on current walk, 2 reaches root
  state[0] = 2;
  for (int start = 1; start <= node_count; ++start) {
    int node = start;
    while (state[node] == 0) {
      state[node] = 1;
      node = parent[node];
    }
    if (state[node] == 1) {
      throw TopologyError("cycle detected through node " + std::to_string(node));
    }
    for (node = start; state[node] == 1; node = parent[node]) state[node] = 2;
  }
  return parent;
}

std::pair<Matrix, Matrix> build_graph_matrices(int node_count, std::span<const Line> lines) {
  check_impedances(lines);
  const auto parent = check_radial_topology(node_count, lines);

  std::vector<const Line*> up_line(node_count + 1, nullptr);
  for (const auto& line : lines) up_line[line.child] = &line;

  // Cumulative impedance from the slack node, accumulated top-down.
  std::vector<double> path_r(node_count + 1, 0.0);
  std::vector<double> path_x(node_count + 1, 0.0);
  std::vector<int> depth(node_count + 1, 0);
  for (int node : top_down_order(parent)) {
    if (node == 0) continue;
    path_r[node] = path_r[parent[node]] + up_line[node]->resistance;
    path_x[node] = path_x[parent[node]] + up_line[node]->reactance;
    depth[node] = depth[parent[node]] + 1;
  }

  Matrix r(node_count, node_count);
  Matrix x(node_count, node_count);
  for (int i = 1; i <= node_count; ++i) {
    for (int j = i; j <= node_count; ++j) {
      int a = i;
      int b = j;
      while (depth[a] > depth[b]) a = parent[a];
      while (depth[b] > depth[a]) b = parent[b];
      while (a != b) {
        a = parent[a];
        b = parent[b];
      }
      r(i - 1, j - 1) = r(j - 1, i - 1) = path_r[a];
      x(i - 1, j - 1) = x(j - 1, i - 1) = path_x[a];
    }
  }
  return {std::move(r), std::move(x)};
}

FeederModel::FeederModel(std::string name, double slack_voltage, std::vector<Line> lines,
                         std::vector<NodeData> nodes)
    : name_(std::move(name)),
      slack_voltage_(slack_voltage),
      node_count_(static_cast<int>(lines.size())),
      lines_(std::move(lines)),
      nodes_(std::move(nodes)) {
  if (!(slack_voltage_ > 0.0)) throw ValidationError("slack voltage must be positive");
  if (nodes_.empty()) nodes_.resize(static_cast<std::size_t>(node_count_));
  if (static_cast<int>(nodes_.size()) != node_count_) {
    throw TopologyError("feeder declares " + std::to_string(nodes_.size()) + " nodes but " +
                        std::to_string(node_count_) + " lines; a radial feeder has one line per node");
  }
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (!(nodes_[k].load_share >= 0.0) || nodes_[k].ev_count < 0) {
      throw ValidationError("node " + std::to_string(k + 1) + " has a negative load share or EV count");
    }
  }
  std::tie(resistance_, reactance_) = build_graph_matrices(node_count_, lines_);
  parent_ = check_radial_topology(node_count_, lines_);
  parent_line_.assign(parent_.size(), -1);
  for (std::size_t k = 0; k < lines_.size(); ++k) {
    parent_line_[lines_[k].child] = static_cast<int>(k);
  }
}

std::vector<const Line*> FeederModel::root_path(int node) const {
  if (node < 1 || node > node_count_) throw ValidationError("unknown node " + std::to_string(node));
  std::vector<const Line*> path;
  for (; node != 0; node = parent_[node]) path.push_back(&lines_[parent_line_[node]]);
  return {path.rbegin(), path.rend()};
}

FeederModel parse_feeder(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("feeder document is not valid JSON: ") + e.what());
  }
  try {
    std::vector<Line> lines;
    for (const auto& item : doc.at("lines")) {
      lines.push_back({item.at("from").get<int>(), item.at("to").get<int>(),
                       item.at("r_ohm").get<double>(), item.value("x_ohm", 0.0)});
    }
    std::vector<NodeData> nodes;
    if (doc.contains("nodes")) {
      const auto& items = doc.at("nodes");
      nodes.resize(items.size());
      for (const auto& item : items) {
        const int id = item.at("id").get<int>();
        if (id < 1 || id > static_cast<int>(items.size())) {
          throw TopologyError("node id " + std::to_string(id) + " is outside 1.." +
                              std::to_string(items.size()));
        }
        nodes[id - 1] = {item.value("load_share", 0.0), item.value("ev_count", 0)};
      }
    }
    return FeederModel(doc.value("name", std::string("feeder")),
                       doc.at("slack_voltage_kv").get<double>() * 1000.0, std::move(lines),
                       std::move(nodes));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed feeder document: ") + e.what());
  }
}

FeederModel load_feeder(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feeder file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_feeder(buffer.str());
}

Matrix HorizonLoad::compensated_voltage() const {
  return (-baseline_drop).array() + slack_squared;
}

HorizonLoad make_horizon_load(const FeederModel& feeder, std::span<const double> baseline_power,
                              double power_factor) {
  if (!(power_factor > 0.0 && power_factor <= 1.0)) {
    throw ValidationError("power factor must lie in (0, 1]");
  }
  if (baseline_power.empty()) throw ValidationError("baseline profile is empty");
  const int n = feeder.node_count();
  const int slots = static_cast<int>(baseline_power.size());

  Vector share(n);
  for (int k = 0; k < n; ++k) share[k] = feeder.nodes()[k].load_share;
  const double total_share = share.sum();
  if (!(total_share > 0.0)) throw ValidationError("feeder has no baseline load shares");
  share /= total_share;

  HorizonLoad load;
  load.slots = slots;
  load.baseline_power = Eigen::Map<const Vector>(baseline_power.data(), slots);
  load.slack_squared = feeder.slack_voltage() * feeder.slack_voltage();
  const double reactive_ratio = std::tan(std::acos(power_factor));
  const Matrix real = share * load.baseline_power.transpose();
  load.baseline_drop =
      2.0 * feeder.resistance() * real + 2.0 * reactive_ratio * feeder.reactance() * real;

  if ((load.compensated_voltage().array() <= 0.0).any()) {
    throw ValidationError("baseline load alone collapses the feeder voltage");
  }
  return load;
}

Matrix evaluate_voltages(const HorizonLoad& loads, const Matrix& drop_matrix,
                         const ProfileMatrix& profiles) {
  if (drop_matrix.rows() != loads.node_count() || drop_matrix.cols() != profiles.rows() ||
      profiles.cols() != loads.slots) {
    throw ValidationError("voltage evaluation dimensions disagree: D is " +
                          std::to_string(drop_matrix.rows()) + "x" +
                          std::to_string(drop_matrix.cols()) + ", U is " +
                          std::to_string(profiles.rows()) + "x" + std::to_string(profiles.cols()) +
                          ", horizon has " + std::to_string(loads.node_count()) + " nodes and " +
                          std::to_string(loads.slots) + " slots");
  }
  Matrix voltage = loads.compensated_voltage();
  if (profiles.rows() > 0) voltage.noalias() -= drop_matrix * profiles;
  return voltage;
}

void write_matrix_csv(std::ostream& out, const Matrix& matrix) {
  out << "node";
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) out << ',' << j + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    out << i + 1;
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) out << ',' << format_number(matrix(i, j));
    out << '\n';
  }
}

}  // namespace spmds

#include "flab/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "flab/error.hpp"

#ifndef FLAB_VERSION
#define FLAB_VERSION "0.0.0"
#endif

namespace flab {

const char* version() { return FLAB_VERSION; }

const Process* Scenario::find_process(const std::string& name) const {
  auto it = processes.find(name);
  return it == processes.end() ? nullptr : &it->second;
}

Enlargement Scenario::selected_enlargement() const {
  if (!enlargement.empty()) {
    auto it = enlargements.find(enlargement);
    if (it == enlargements.end()) throw Error(ErrorKind::ParseError, "unknown enlargement '" + enlargement + "'");
    return it->second;
  }
  if (!enlargements.empty()) return enlargements.begin()->second;
  return Enlargement::trivial(tree);
}

namespace {

Rational rational_field(const json& j, const std::string& what) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  throw Error(ErrorKind::ParseError, what + " must be a \"p/q\" string");
}

const json& member(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::ParseError, std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

json tree_to_json(const FilteredTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes()) {
    json node{{"id", n.id}, {"time", n.time}, {"prob", format_rational(n.branch_prob)}};
    node["parent"] = n.parent < 0 ? json(nullptr) : json(tree.node(n.parent).id);
    nodes.push_back(node);
  }
  return json{{"horizon", tree.horizon()}, {"nodes", nodes}};
}

json process_to_json(const Process& p) {
  if (!is_adapted(p, base_filtration(p.tree_ptr())))
    throw Error(ErrorKind::NotAdapted, "only F-adapted processes serialize per node");
  json values = json::object();
  for (int v = 0; v < p.tree().num_nodes(); ++v) {
    json row = json::array();
    for (const auto& x : p.node_value(v)) row.push_back(format_rational(x));
    values[p.tree().node(v).id] = row;
  }
  return json{{"dim", p.dim()}, {"values", values}};
}

Process process_from_json(const TreePtr& tree, const json& j) {
  const json& dim_j = member(j, "dim");
  if (!dim_j.is_number_integer() || dim_j.get<int>() < 1) throw Error(ErrorKind::ParseError, "'dim' must be a positive integer");
  int dim = dim_j.get<int>();
  const json& values = member(j, "values");
  if (!values.is_object()) throw Error(ErrorKind::ParseError, "'values' must be an object");
  std::vector<Vec> by_node(static_cast<std::size_t>(tree->num_nodes()));
  std::vector<bool> seen(by_node.size(), false);
  for (auto it = values.begin(); it != values.end(); ++it) {
    auto v = tree->find(it.key());
    if (!v) throw Error(ErrorKind::ParseError, "process value for unknown node '" + it.key() + "'");
    if (!it->is_array() || static_cast<int>(it->size()) != dim)
      throw Error(ErrorKind::ParseError, "value at '" + it.key() + "' must have " + std::to_string(dim) + " entries");
    Vec row;
    for (const auto& x : *it) row.push_back(rational_field(x, "process value"));
    by_node[static_cast<std::size_t>(*v)] = std::move(row);
    seen[static_cast<std::size_t>(*v)] = true;
  }
  for (std::size_t v = 0; v < seen.size(); ++v)
    if (!seen[v]) throw Error(ErrorKind::ParseError, "process has no value at '" + tree->node(static_cast<int>(v)).id + "'");
  return Process::from_nodes(tree, dim, by_node);
}

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "scenario must be a JSON object");
  TreeSpec spec;
  const json& horizon = member(j, "horizon");
  if (!horizon.is_number_integer()) throw Error(ErrorKind::ParseError, "'horizon' must be an integer");
  spec.horizon = horizon.get<int>();
  const json& nodes = member(j, "nodes");
  if (!nodes.is_array()) throw Error(ErrorKind::ParseError, "'nodes' must be an array");
  for (const auto& n : nodes) {
    NodeSpec ns;
    const json& id = member(n, "id");
    const json& time = member(n, "time");
    if (!id.is_string() || !time.is_number_integer()) throw Error(ErrorKind::ParseError, "node needs string id and integer time");
    ns.id = id.get<std::string>();
    ns.time = time.get<int>();
    if (n.contains("parent") && !n.at("parent").is_null()) {
      if (!n.at("parent").is_string()) throw Error(ErrorKind::ParseError, "parent of '" + ns.id + "' must be a string");
      ns.parent = n.at("parent").get<std::string>();
    }
    ns.prob = n.contains("prob") ? rational_field(n.at("prob"), "prob") : Rational(1);
    spec.nodes.push_back(std::move(ns));
  }
  Scenario s;
  s.tree = FilteredTree::build(spec);
  if (j.contains("processes")) {
    const json& procs = j.at("processes");
    if (!procs.is_object()) throw Error(ErrorKind::ParseError, "'processes' must be an object");
    for (auto it = procs.begin(); it != procs.end(); ++it) s.processes.emplace(it.key(), process_from_json(s.tree, *it));
  }
  if (j.contains("enlargements")) {
    const json& ens = j.at("enlargements");
    if (!ens.is_object()) throw Error(ErrorKind::ParseError, "'enlargements' must be an object");
    for (auto it = ens.begin(); it != ens.end(); ++it) {
      EnlargementSpec es;
      if (!it->is_object()) throw Error(ErrorKind::ParseError, "enlargement '" + it.key() + "' must map times to partitions");
      for (auto t = it->begin(); t != it->end(); ++t) {
        int time = 0;
        try {
          std::size_t used = 0;
          time = std::stoi(t.key(), &used);
          if (used != t.key().size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          throw Error(ErrorKind::ParseError, "enlargement time key '" + t.key() + "' is not an integer");
        }
        try {
          es[time] = t->get<std::vector<std::vector<std::string>>>();
        } catch (const json::exception&) {
          throw Error(ErrorKind::ParseError, "enlargement '" + it.key() + "' time " + t.key() + " must be lists of leaf ids");
        }
      }
      s.enlargements.emplace(it.key(), enlarge(s.tree, es, it.key()));
    }
  }
  try {
    if (j.contains("basis")) s.basis = j.at("basis").get<std::string>();
    if (j.contains("enlargement")) s.enlargement = j.at("enlargement").get<std::string>();
    if (j.contains("assets")) s.assets = j.at("assets").get<std::vector<std::string>>();
    if (j.contains("checks")) s.checks = j.at("checks").get<std::vector<std::string>>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("expect_mrp")) s.expect_mrp = j.at("expect_mrp").get<bool>();
    if (j.contains("inject_fault")) s.inject_fault = j.at("inject_fault").get<bool>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  if (!s.enlargement.empty() && !s.enlargements.count(s.enlargement))
    throw Error(ErrorKind::ParseError, "unknown enlargement '" + s.enlargement + "'");
  for (const auto& a : s.assets)
    if (!s.processes.count(a)) throw Error(ErrorKind::ParseError, "unknown asset process '" + a + "'");
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
  return parse_scenario(j);
}

json to_json(const Scenario& s) {
  json j = tree_to_json(*s.tree);
  json procs = json::object();
  for (const auto& [name, p] : s.processes) procs[name] = process_to_json(p);
  j["processes"] = procs;
  json ens = json::object();
  for (const auto& [name, g] : s.enlargements) {
    json e = json::object();
    for (const auto& [t, part] : enlargement_spec(g)) e[std::to_string(t)] = part;
    ens[name] = e;
  }
  j["enlargements"] = ens;
  j["basis"] = s.basis;
  if (!s.enlargement.empty()) j["enlargement"] = s.enlargement;
  j["assets"] = s.assets;
  j["checks"] = s.checks;
  j["seed"] = s.seed;
  j["expect_mrp"] = s.expect_mrp;
  if (s.inject_fault) j["inject_fault"] = true;
  return j;
}

std::string scenario_hash(const json& j) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace flab

#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "pwcg/error.hpp"
#include "pwcg/topology.hpp"

namespace pwcg {

namespace detail {

template <typename T>
T field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(Errc::Parse, where + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::Parse, where + "." + key + ": wrong type");
  }
}

inline nlohmann::json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::Parse, source + ": " + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

// Topology document:
//   { "nodes": [{"id", "name"}], "links": [{"id", "a", "b", "length_km", "mttf_h"}],
//     "cores_per_link": K, "core_adjacency": [[i, j], ...] }
// core_adjacency may be omitted for K = 7 (hexagonal layout) and means "no
// adjacency" for any other K.
inline Network load_network(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(Errc::Parse, "topology: document must be an object");
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw Error(Errc::Parse, "topology: 'nodes' must be an array");
  }
  if (!doc.contains("links") || !doc["links"].is_array()) {
    throw Error(Errc::Parse, "topology: 'links' must be an array");
  }

  std::vector<Node> nodes;
  for (std::size_t i = 0; i < doc["nodes"].size(); ++i) {
    const auto& jn = doc["nodes"][i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    Node n;
    n.id = detail::field<int>(jn, "id", where);
    n.name = jn.contains("name") ? detail::field<std::string>(jn, "name", where)
                                 : std::to_string(n.id);
    nodes.push_back(std::move(n));
  }

  std::vector<Link> links;
  for (std::size_t i = 0; i < doc["links"].size(); ++i) {
    const auto& jl = doc["links"][i];
    const std::string where = "links[" + std::to_string(i) + "]";
    Link l;
    l.id = detail::field<int>(jl, "id", where);
    l.a = detail::field<int>(jl, "a", where);
    l.b = detail::field<int>(jl, "b", where);
    l.length_km = detail::field<double>(jl, "length_km", where);
    l.mttf_h = detail::field<double>(jl, "mttf_h", where);
    links.push_back(l);
  }

  const int cores = doc.contains("cores_per_link")
                        ? detail::field<int>(doc, "cores_per_link", "topology")
                        : 7;
  CoreLayout layout;
  if (doc.contains("core_adjacency")) {
    std::vector<std::pair<CoreId, CoreId>> pairs;
    const auto& adj = doc["core_adjacency"];
    if (!adj.is_array()) throw Error(Errc::Parse, "topology: 'core_adjacency' must be an array");
    for (std::size_t i = 0; i < adj.size(); ++i) {
      if (!adj[i].is_array() || adj[i].size() != 2 || !adj[i][0].is_number_integer() ||
          !adj[i][1].is_number_integer()) {
        throw Error(Errc::Parse, "core_adjacency[" + std::to_string(i) + "]: expected [i, j]");
      }
      pairs.emplace_back(adj[i][0].get<int>(), adj[i][1].get<int>());
    }
    layout = CoreLayout(cores, pairs);
  } else if (cores == 7) {
    layout = CoreLayout::hexagonal7();
  } else {
    layout = CoreLayout(cores, {});
  }
  return Network(std::move(nodes), std::move(links), std::move(layout));
}

inline Network load_network_text(const std::string& text, const std::string& source = "topology") {
  return load_network(detail::parse_json_text(text, source));
}

inline Network load_network_file(const std::string& path) {
  return load_network_text(detail::read_text_file(path), path);
}

inline nlohmann::json to_json(const Network& net) {
  nlohmann::json doc;
  doc["nodes"] = nlohmann::json::array();
  for (const auto& n : net.nodes()) doc["nodes"].push_back({{"id", n.id}, {"name", n.name}});
  doc["links"] = nlohmann::json::array();
  for (const auto& l : net.links()) {
    doc["links"].push_back(
        {{"id", l.id}, {"a", l.a}, {"b", l.b}, {"length_km", l.length_km}, {"mttf_h", l.mttf_h}});
  }
  doc["cores_per_link"] = net.cores();
  doc["core_adjacency"] = nlohmann::json::array();
  for (auto [i, j] : net.layout().pairs()) doc["core_adjacency"].push_back({i, j});
  return doc;
}

}  // namespace pwcg

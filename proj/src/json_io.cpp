#include "dhc/json_io.hpp"

#include <fstream>
#include <json.hpp>

namespace dhc {

using nlohmann::json;

namespace {

json cells_payload(const GridSet& s, bool& as_runs) {
  auto cells = s.cells();
  as_runs = false;
  if (s.dim() == 1 && !cells.empty()) {
    json runs = json::array();
    std::int64_t start = cells[0][0], prev = start;
    for (std::size_t i = 1; i <= cells.size(); ++i) {
      bool flush = i == cells.size() || cells[i][0] != prev + 1;
      if (!flush) {
        prev = cells[i][0];
        continue;
      }
      runs.push_back(json::array({start, prev - start + 1}));
      if (i < cells.size()) start = prev = cells[i][0];
    }
    if (2 * runs.size() < cells.size()) {
      as_runs = true;
      return runs;
    }
  }
  json arr = json::array();
  for (const auto& c : cells) {
    json cell = json::array();
    for (int i = 0; i < s.dim(); ++i) cell.push_back(c[i]);
    arr.push_back(std::move(cell));
  }
  return arr;
}

json set_to_value(const NamedSet& s) {
  json j;
  j["dim"] = s.set.dim();
  j["depth"] = s.set.depth();
  if (!s.info.name.empty()) {
    json gen;
    gen["name"] = s.info.name;
    gen["params"] = json::object();
    for (const auto& [k, v] : s.info.params) gen["params"][k] = v;
    if (s.info.seed) gen["seed"] = *s.info.seed;
    j["generator"] = std::move(gen);
  }
  bool as_runs = false;
  json payload = cells_payload(s.set, as_runs);
  j[as_runs ? "runs" : "cells"] = std::move(payload);
  return j;
}

NamedSet set_from_value(const json& j) {
  require(j.is_object(), "set json: object expected");
  require(j.contains("dim") && j.contains("depth"), "set json: dim and depth required");
  int dim = j.at("dim").get<int>();
  int depth = j.at("depth").get<int>();
  require(dim >= 1 && dim <= kMaxDim, "set json: dim must be 1, 2 or 3");
  require(depth >= 0 && depth <= grid_depth_cap(dim), "set json: depth beyond the cap");

  std::vector<Corner> cells;
  if (j.contains("runs")) {
    require(dim == 1, "set json: runs are only defined for dim 1");
    for (const auto& r : j.at("runs")) {
      require(r.is_array() && r.size() == 2, "set json: run must be [start, len]");
      std::int64_t start = r[0].get<std::int64_t>();
      std::int64_t len = r[1].get<std::int64_t>();
      require(len >= 0, "set json: negative run length");
      for (std::int64_t c = start; c < start + len; ++c) cells.push_back({c, 0, 0});
    }
  } else {
    require(j.contains("cells"), "set json: cells or runs required");
    for (const auto& cell : j.at("cells")) {
      require(cell.is_array() && int(cell.size()) == dim,
              "set json: cell arity must equal dim");
      Corner c{};
      for (int i = 0; i < dim; ++i) c[i] = cell[i].get<std::int64_t>();
      cells.push_back(c);
    }
  }

  NamedSet out{GridSet::from_cells(dim, depth, std::move(cells)), {}};
  if (j.contains("generator")) {
    const json& gen = j.at("generator");
    out.info.name = gen.at("name").get<std::string>();
    if (gen.contains("params"))
      for (const auto& [k, v] : gen.at("params").items())
        out.info.params[k] = v.get<double>();
    if (gen.contains("seed")) out.info.seed = gen.at("seed").get<std::uint64_t>();
  }
  return out;
}

}  // namespace

std::string set_to_json(const NamedSet& s) { return set_to_value(s).dump(2) + "\n"; }

NamedSet set_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw domain_error(std::string("set json: ") + e.what());
  }
  return set_from_value(j);
}

void save_set(const NamedSet& s, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  require(bool(f), "cannot open for writing: " + path);
  f << set_to_json(s);
  require(bool(f), "write failed: " + path);
}

NamedSet load_set(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(bool(f), "cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return set_from_json(text);
}

std::string region_to_json(const GridRegion& r) {
  return set_to_json(NamedSet{r, {}});
}

}  // namespace dhc

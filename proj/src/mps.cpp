#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "relalloc/solver.hpp"

namespace relalloc {

using nlohmann::json;

namespace {

char sense_code(Sense s) {
  switch (s) {
    case Sense::LessEqual: return 'L';
    case Sense::Equal: return 'E';
    case Sense::GreaterEqual: return 'G';
  }
  return 'E';
}

Sense parse_sense(const std::string& code, const std::string& row) {
  if (code == "L") return Sense::LessEqual;
  if (code == "E") return Sense::Equal;
  if (code == "G") return Sense::GreaterEqual;
  throw Error(fmt::format("row {} has unsupported type {}", row, code));
}

VarKind parse_kind(const std::string& s) {
  if (s == "candidate") return VarKind::Candidate;
  if (s == "arc") return VarKind::Arc;
  if (s == "replica") return VarKind::Replica;
  if (s == "set") return VarKind::Set;
  throw Error(fmt::format("unknown variable kind {}", s));
}

// Fixed-format field layout: type at column 2, names at 5 and 15, value at 25.
std::string entry(const std::string& a, const std::string& b, double value) {
  return fmt::format("    {:<8}  {:<8}  {}\n", a, b, value);
}

json terms_json(const SparseRow& row) {
  json out = json::array();
  for (const auto& [v, c] : row) out.push_back(json::array({v, c}));
  return out;
}

SparseRow terms_from(const json& j) {
  SparseRow row;
  for (const auto& t : j) row.emplace_back(t.at(0).get<std::size_t>(), t.at(1).get<double>());
  return row;
}

json sidecar(const BilpModel& model) {
  json cols = json::array();
  for (const auto& v : model.catalog.variables()) {
    json c = {{"name", v.name}, {"kind", to_string(v.kind)}, {"label", v.label},
              {"task", v.task}, {"device", v.device}};
    switch (v.kind) {
      case VarKind::Candidate: c["candidate"] = v.candidate; break;
      case VarKind::Replica:
        c["candidate"] = v.candidate;
        c["slot"] = v.slot;
        break;
      case VarKind::Arc:
        c["child_task"] = v.child_task;
        c["to_device"] = v.to_device;
        c["arc"] = v.arc;
        break;
      case VarKind::Set: break;
    }
    cols.push_back(std::move(c));
  }
  json rows = json::array();
  for (const auto& r : model.constraints) rows.push_back({{"name", r.name}, {"tag", r.tag}});

  const auto& md = model.metadata;
  json doc = {{"name", md.name},
              {"criticality_level", md.criticality_level},
              {"objective_offset", model.objective_offset},
              {"columns", std::move(cols)},
              {"rows", std::move(rows)},
              {"reliability_terms", terms_json(model.reliability_terms)},
              {"latency_terms", terms_json(model.latency_terms)}};
  doc["weights"] = md.weights ? json{{"w_rel", md.weights->rel}, {"w_lat", md.weights->lat}}
                              : json(nullptr);
  doc["bounds"] = md.bounds ? json{{"rel_min", md.bounds->rel_min},
                                   {"rel_max", md.bounds->rel_max},
                                   {"lat_min", md.bounds->lat_min},
                                   {"lat_max", md.bounds->lat_max}}
                            : json(nullptr);
  return doc;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw Error(fmt::format("cannot write {}", p.string()));
  return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(fmt::format("cannot read {}", p.string()));
  return in;
}

}  // namespace

void export_mps(const BilpModel& model, const std::filesystem::path& mps_path,
                const std::filesystem::path& sidecar_path) {
  const auto& cat = model.catalog;
  std::vector<std::vector<std::pair<std::size_t, double>>> by_column(cat.size());
  for (std::size_t r = 0; r < model.constraints.size(); ++r)
    for (const auto& [v, c] : model.constraints[r].terms) by_column.at(v).emplace_back(r, c);
  std::vector<double> obj(cat.size(), 0.0);
  for (const auto& [v, c] : model.objective) obj.at(v) += c;

  std::string text;
  text += fmt::format("NAME          {}\n", model.metadata.name);
  text += "OBJSENSE\n    MAX\n";
  text += "ROWS\n N  OBJ\n";
  for (const auto& r : model.constraints) text += fmt::format(" {}  {}\n", sense_code(r.sense), r.name);
  text += "COLUMNS\n";
  for (std::size_t v = 0; v < cat.size(); ++v) {
    const auto& name = cat.at(v).name;
    if (obj[v] != 0.0) text += entry(name, "OBJ", obj[v]);
    for (const auto& [r, c] : by_column[v]) text += entry(name, model.constraints[r].name, c);
  }
  text += "RHS\n";
  if (model.objective_offset != 0.0) text += entry("RHS", "OBJ", -model.objective_offset);
  for (const auto& r : model.constraints)
    if (r.rhs != 0.0) text += entry("RHS", r.name, r.rhs);
  text += "BOUNDS\n";
  for (const auto& v : cat.variables()) text += fmt::format(" BV BND       {}\n", v.name);
  text += "ENDATA\n";

  open_out(mps_path) << text;
  open_out(sidecar_path) << sidecar(model).dump(1) << '\n';
}

BilpModel read_mps(const std::filesystem::path& mps_path, const std::filesystem::path& sidecar_path) {
  json doc;
  {
    auto in = open_in(sidecar_path);
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw Error(fmt::format("{}: {}", sidecar_path.string(), e.what()));
    }
  }

  BilpModel model;
  std::vector<Variable> vars;
  for (const auto& c : doc.at("columns")) {
    Variable v;
    v.name = c.at("name").get<std::string>();
    v.kind = parse_kind(c.at("kind").get<std::string>());
    v.label = c.value("label", "");
    v.task = c.at("task").get<std::size_t>();
    v.device = c.at("device").get<std::size_t>();
    v.candidate = c.value("candidate", std::size_t{0});
    v.slot = c.value("slot", 0);
    v.child_task = c.value("child_task", std::size_t{0});
    v.to_device = c.value("to_device", std::size_t{0});
    v.arc = c.value("arc", std::size_t{0});
    vars.push_back(std::move(v));
  }
  model.catalog = VariableCatalog(std::move(vars));
  std::map<std::string, std::string> tags;
  for (const auto& r : doc.at("rows")) tags[r.at("name")] = r.at("tag");
  model.metadata.name = doc.value("name", "relalloc");
  model.metadata.criticality_level = doc.value("criticality_level", 0);
  if (const auto& w = doc.at("weights"); !w.is_null())
    model.metadata.weights = ObjectiveWeights{w.at("w_rel"), w.at("w_lat")};
  if (const auto& b = doc.at("bounds"); !b.is_null())
    model.metadata.bounds =
        NormalizationBounds{b.at("rel_min"), b.at("rel_max"), b.at("lat_min"), b.at("lat_max")};
  model.reliability_terms = terms_from(doc.at("reliability_terms"));
  model.latency_terms = terms_from(doc.at("latency_terms"));

  auto in = open_in(mps_path);
  std::map<std::string, std::size_t> row_index;
  std::string objective_row;
  bool maximize = false;
  std::string section;
  std::string line;
  std::size_t lineno = 0;
  double objective_rhs = 0.0;
  auto fail = [&](const std::string& what) {
    throw Error(fmt::format("{}:{}: {}", mps_path.string(), lineno, what));
  };
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double d = std::stod(s, &used);
      if (used != s.size()) fail("bad number " + s);
      return d;
    } catch (const std::logic_error&) {
      fail("bad number " + s);
    }
    return 0.0;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (line[0] != ' ') {
      section = tok[0];
      if (section == "OBJSENSE" && tok.size() > 1) maximize = tok[1] == "MAX" || tok[1] == "MAXIMIZE";
      if (section == "ENDATA") break;
      continue;
    }
    if (section == "OBJSENSE") {
      maximize = tok[0] == "MAX" || tok[0] == "MAXIMIZE";
    } else if (section == "ROWS") {
      if (tok.size() != 2) fail("malformed ROWS entry");
      if (tok[0] == "N") {
        if (objective_row.empty()) objective_row = tok[1];
        continue;
      }
      LinearConstraint r;
      r.sense = parse_sense(tok[0], tok[1]);
      r.name = tok[1];
      auto it = tags.find(r.name);
      if (it != tags.end()) r.tag = it->second;
      row_index[r.name] = model.constraints.size();
      model.constraints.push_back(std::move(r));
    } else if (section == "COLUMNS") {
      if (tok.size() >= 2 && tok[1] == "'MARKER'") continue;
      if (tok.size() != 3 && tok.size() != 5) fail("malformed COLUMNS entry");
      const auto v = model.catalog.find(tok[0]);
      if (!v) fail("column " + tok[0] + " missing from sidecar");
      for (std::size_t p = 1; p + 1 < tok.size(); p += 2) {
        const double c = number(tok[p + 1]);
        if (tok[p] == objective_row) {
          model.objective.emplace_back(*v, c);
        } else {
          auto it = row_index.find(tok[p]);
          if (it == row_index.end()) fail("unknown row " + tok[p]);
          model.constraints[it->second].terms.emplace_back(*v, c);
        }
      }
    } else if (section == "RHS") {
      if (tok.size() != 3 && tok.size() != 5) fail("malformed RHS entry");
      for (std::size_t p = 1; p + 1 < tok.size(); p += 2) {
        const double c = number(tok[p + 1]);
        if (tok[p] == objective_row) {
          objective_rhs = c;
        } else {
          auto it = row_index.find(tok[p]);
          if (it == row_index.end()) fail("unknown row " + tok[p]);
          model.constraints[it->second].rhs = c;
        }
      }
    } else if (section == "BOUNDS") {
      if (tok.size() < 3) fail("malformed BOUNDS entry");
      if (tok[0] != "BV") fail("only binary bounds are supported, got " + tok[0]);
      if (!model.catalog.find(tok[2])) fail("bound on unknown column " + tok[2]);
    } else {
      fail("unexpected data in section " + section);
    }
  }

  for (auto& r : model.constraints) std::sort(r.terms.begin(), r.terms.end());
  std::sort(model.objective.begin(), model.objective.end());
  model.objective_offset = -objective_rhs;
  if (!maximize) {
    for (auto& t : model.objective) t.second = -t.second;
    model.objective_offset = -model.objective_offset;
  }
  return model;
}

Solution read_solution(const std::filesystem::path& path, const VariableCatalog& catalog) {
  auto in = open_in(path);
  Solution sol;
  sol.status = SolveStatus::Optimal;
  sol.values.assign(catalog.size(), 0);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string name, value;
    if (!(ss >> name)) continue;
    std::string extra;
    if (!(ss >> value) || (ss >> extra))
      throw Error(fmt::format("{}:{}: expected '<name> <value>'", path.string(), lineno));
    const auto v = catalog.find(name);
    if (!v) throw Error(fmt::format("{}:{}: unknown variable {}", path.string(), lineno, name));
    double x = 0.0;
    try {
      x = std::stod(value);
    } catch (const std::logic_error&) {
      throw Error(fmt::format("{}:{}: bad value {}", path.string(), lineno, value));
    }
    if (std::abs(x) <= 1e-6)
      sol.values[*v] = 0;
    else if (std::abs(x - 1.0) <= 1e-6)
      sol.values[*v] = 1;
    else
      throw Error(fmt::format("{}:{}: {} = {} is not binary", path.string(), lineno, name, value));
  }
  sol.choice.assign(catalog.task_count(), std::numeric_limits<std::size_t>::max());
  for (TaskIndex t = 0; t < catalog.task_count(); ++t) {
    const auto& cands = catalog.candidates_of(t);
    for (std::size_t j = 0; j < cands.size(); ++j) {
      if (!sol.values[cands[j]]) continue;
      // more than one selected candidate leaves the choice unset; verify reports it
      sol.choice[t] = sol.choice[t] == std::numeric_limits<std::size_t>::max()
                          ? j
                          : std::numeric_limits<std::size_t>::max() - 1;
    }
  }
  for (auto& c : sol.choice)
    if (c == std::numeric_limits<std::size_t>::max() - 1) c = std::numeric_limits<std::size_t>::max();
  return sol;
}

}  // namespace relalloc

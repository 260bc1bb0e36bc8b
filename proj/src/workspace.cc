// Apache License, Version 2.0, refer to LICENSE.txt

#include "crossmi/workspace.hh"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace crossmi {

namespace fs = std::filesystem;

std::string schema_to_json(const Schema& schema) {
  nlohmann::json vars = nlohmann::json::array();
  for (const Variable& v : schema.variables()) {
    nlohmann::json jv{{"name", v.name},
                      {"type", v.is_nominal() ? "nominal" : "numerical"}};
    if (v.is_nominal()) {
      jv["categories"] = v.categories;
    }
    vars.push_back(std::move(jv));
  }
  return nlohmann::json{{"format_version", 1}, {"variables", std::move(vars)}}
      .dump(2);
}

Schema schema_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SerializationError(std::string("bad schema json: ") + e.what());
  }
  std::vector<Variable> vars;
  for (const auto& jv : doc.at("variables")) {
    Variable v;
    v.name = jv.at("name");
    if (jv.at("type") == "nominal") {
      v.type = StatType::kNominal;
      v.categories = jv.at("categories").get<std::vector<std::string>>();
      v.category_count = static_cast<int>(v.categories.size());
    } else {
      v.type = StatType::kNumerical;
    }
    vars.push_back(std::move(v));
  }
  return Schema(std::move(vars));
}

Workspace create_workspace(const std::string& csv_path,
                           const std::string& directory,
                           const IngestOptions& options,
                           IngestReport* report) {
  Workspace ws;
  ws.directory = directory;
  ws.dataset = read_csv_file(csv_path, options, report);
  fs::create_directories(directory);
  {
    std::ofstream out(fs::path(directory) / "schema.json");
    out << schema_to_json(ws.dataset->schema()) << '\n';
    if (!out) throw IngestError("cannot write schema.json");
  }
  {
    std::ofstream out(fs::path(directory) / "data.csv");
    write_csv(out, *ws.dataset);
    if (!out) throw IngestError("cannot write data.csv");
  }
  return ws;
}

Workspace open_workspace(const std::string& directory) {
  Workspace ws;
  ws.directory = directory;
  std::ifstream schema_in(fs::path(directory) / "schema.json");
  if (!schema_in) {
    throw IngestError("not a workspace (missing schema.json): " + directory);
  }
  std::stringstream buffer;
  buffer << schema_in.rdbuf();
  const Schema schema = schema_from_json(buffer.str());
  std::ifstream data_in(fs::path(directory) / "data.csv");
  if (!data_in) throw IngestError("missing data.csv in " + directory);
  ws.dataset = read_csv_with_schema(data_in, schema);
  return ws;
}

Ensemble fit_workspace(const Workspace& workspace, int h, long sweeps,
                       uint64_t seed, int jobs) {
  Ensemble ensemble = fit_ensemble(workspace.dataset, h, sweeps, seed, jobs);
  save_ensemble(ensemble, workspace.directory);
  return ensemble;
}

Ensemble load_workspace_ensemble(const Workspace& workspace) {
  return load_ensemble(workspace.directory, workspace.dataset);
}

bool workspace_has_ensemble(const Workspace& workspace) {
  return fs::exists(fs::path(workspace.directory) / "manifest.json");
}

}  // namespace crossmi

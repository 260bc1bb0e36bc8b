// Apache License, Version 2.0, refer to LICENSE.txt
//
// A workspace is a directory holding one ingested dataset and, once fitted,
// an ensemble: data.csv (normalized), schema.json, manifest.json and
// members/*.json.

#pragma once

#include <memory>
#include <optional>
#include <string>

#include "crossmi/crosscat.hh"
#include "crossmi/data.hh"

namespace crossmi {

struct Workspace {
  std::string directory;
  std::shared_ptr<const Dataset> dataset;
};

// Ingests a CSV into `directory`, writing the normalized data and schema.
Workspace create_workspace(const std::string& csv_path,
                           const std::string& directory,
                           const IngestOptions& options, IngestReport* report);

// Reopens a workspace from its stored schema and data.
Workspace open_workspace(const std::string& directory);

// Fits and persists an ensemble into the workspace.
Ensemble fit_workspace(const Workspace& workspace, int h, long sweeps,
                       uint64_t seed, int jobs);

// Loads the persisted ensemble, checking it matches the dataset.
Ensemble load_workspace_ensemble(const Workspace& workspace);

bool workspace_has_ensemble(const Workspace& workspace);

std::string schema_to_json(const Schema& schema);
Schema schema_from_json(const std::string& text);

}  // namespace crossmi

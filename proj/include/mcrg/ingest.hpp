#pragma once

#include "mcrg/corpus.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace mcrg {

// A provider record that could not be mapped. Skipped records are always
// reported back and logged, never dropped silently.
struct UnmappableRecord {
    std::string id;
    std::string reason;
};

struct NormalizeResult {
    ReviewCorpus corpus;
    std::vector<UnmappableRecord> skipped;
};

struct NormalizeOptions {
    std::string pseudonym_salt = "mcr-graph";
    int diff_context = 3;
};

std::string pseudonymize(const std::string& login, const std::string& salt);

// Maps pull-request review exports (see docs/ingestion.md) onto a validated
// ReviewCorpus. `documents` is a JSON array of pull-request documents.
NormalizeResult normalize_export(const nlohmann::json& documents, const NormalizeOptions& options = {});

// Inverse mapping, used to re-export a corpus in provider shape.
nlohmann::json to_export(const ReviewCorpus& corpus);

// Reads a provider export file: a JSON array, or one document per line.
nlohmann::json read_export_file(const std::filesystem::path& path);

}  // namespace mcrg

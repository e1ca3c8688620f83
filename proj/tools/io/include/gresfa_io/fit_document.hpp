#pragma once

#include "gresfa/estimation.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace gresfa::io {

struct FitProvenance {
  std::string data_sha256;
  std::string model_sha256;
  std::uint64_t seed = 0;
  std::size_t information_draws = 0;
};

/// JSON fit document: model structure, estimates, free-parameter vector,
/// log-likelihood, convergence diagnostics and the information matrices.
nlohmann::ordered_json fit_to_json(const FitResult& fit, const FitProvenance& provenance);
/// Rebuilds a FitResult; parameters come from the stored free-parameter
/// vector so a reloaded fit reproduces the original exactly.
FitResult fit_from_json(const nlohmann::json& doc);

void write_fit_document(const std::filesystem::path& path, const FitResult& fit, const FitProvenance& provenance);
FitResult read_fit_document(const std::filesystem::path& path);

}  // namespace gresfa::io

#include "gresfa_io/fit_document.hpp"

#include "gresfa/parametrization.hpp"
#include "gresfa_io/files.hpp"

namespace gresfa::io {
namespace {

constexpr const char* kFormat = "gresfa-fit";
constexpr int kFormatVersion = 1;

nlohmann::ordered_json matrix_json(const Matrix& a) {
  auto out = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

nlohmann::ordered_json vector_json(const Vector& v) {
  auto out = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix json_matrix(const nlohmann::json& doc) {
  if (!doc.is_array()) throw ParseError("fit document: expected a matrix");
  if (doc.empty()) return Matrix();
  Matrix out(static_cast<Eigen::Index>(doc.size()), static_cast<Eigen::Index>(doc[0].size()));
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (doc[i].size() != static_cast<std::size_t>(out.cols())) throw ParseError("fit document: ragged matrix");
    for (std::size_t j = 0; j < doc[i].size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = doc[i][j].get<double>();
    }
  }
  return out;
}

}  // namespace

nlohmann::ordered_json fit_to_json(const FitResult& fit, const FitProvenance& provenance) {
  const ParamLayout layout(fit.spec);
  const auto labels = layout.labels();
  nlohmann::ordered_json doc;
  doc["format"] = kFormat;
  doc["format_version"] = kFormatVersion;
  doc["tool_version"] = GRESFA_VERSION;
  doc["provenance"] = {{"data_sha256", provenance.data_sha256},
                       {"model_sha256", provenance.model_sha256},
                       {"seed", provenance.seed},
                       {"information_draws", provenance.information_draws}};

  nlohmann::ordered_json pattern = nlohmann::ordered_json::array();
  for (Eigen::Index j = 0; j < fit.spec.loading_pattern.rows(); ++j) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index k = 0; k < fit.spec.loading_pattern.cols(); ++k) row.push_back(fit.spec.loading_pattern(j, k));
    pattern.push_back(std::move(row));
  }
  doc["model"] = {{"m", fit.spec.m}, {"d", fit.spec.d}, {"mean_structure", fit.spec.mean_structure},
                  {"loading_pattern", std::move(pattern)}};

  doc["n"] = fit.n;
  doc["loglik"] = fit.loglik;
  doc["converged"] = fit.converged;
  doc["gradient_max_abs"] = fit.gradient_norm;
  doc["iterations"] = fit.n_iter;
  doc["warnings"] = fit.warnings;

  auto free = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < fit.free_params.size(); ++i) {
    free.push_back({{"label", labels[static_cast<std::size_t>(i)]}, {"value", fit.free_params(i)}});
  }
  doc["free_parameters"] = std::move(free);
  doc["estimates"] = {{"nu", vector_json(fit.params.nu)},
                      {"lambda", matrix_json(fit.params.lambda)},
                      {"phi", matrix_json(fit.params.phi)},
                      {"theta", vector_json(fit.params.theta)}};
  doc["information"] = matrix_json(fit.information);
  doc["inverse_information"] = matrix_json(fit.inv_information);
  return doc;
}

FitResult fit_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kFormat) throw ParseError("not a gresfa fit document");
    if (doc.at("format_version").get<int>() != kFormatVersion) throw ParseError("unsupported fit document version");
    FitResult fit;
    const auto& model = doc.at("model");
    fit.spec.m = model.at("m").get<std::size_t>();
    fit.spec.d = model.at("d").get<std::size_t>();
    fit.spec.mean_structure = model.at("mean_structure").get<bool>();
    const Matrix pattern = json_matrix(model.at("loading_pattern"));
    fit.spec.loading_pattern = pattern.cast<int>();
    fit.spec.validate();

    const ParamLayout layout(fit.spec);
    const auto& free = doc.at("free_parameters");
    if (free.size() != layout.size()) throw ParseError("fit document: free-parameter count does not match the model");
    fit.free_params.resize(static_cast<Eigen::Index>(free.size()));
    for (std::size_t i = 0; i < free.size(); ++i) fit.free_params(static_cast<Eigen::Index>(i)) = free[i].at("value").get<double>();
    fit.params = layout.unpack(fit.free_params);

    fit.n = doc.at("n").get<std::size_t>();
    fit.loglik = doc.at("loglik").get<double>();
    fit.converged = doc.at("converged").get<bool>();
    fit.gradient_norm = doc.at("gradient_max_abs").get<double>();
    fit.n_iter = doc.at("iterations").get<std::size_t>();
    fit.warnings = doc.at("warnings").get<std::vector<std::string>>();
    fit.information = json_matrix(doc.at("information"));
    fit.inv_information = json_matrix(doc.at("inverse_information"));
    return fit;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("fit document: ") + e.what());
  }
}

void write_fit_document(const std::filesystem::path& path, const FitResult& fit, const FitProvenance& provenance) {
  write_atomic(path, fit_to_json(fit, provenance).dump(2) + "\n");
}

FitResult read_fit_document(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return fit_from_json(doc);
}

}  // namespace gresfa::io

#include "bmsync/serialize.hpp"

#include "bmsync/matrix_io.hpp"

#include <cmath>

namespace bmsync {
namespace {

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json rows_json(const Matrix& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (Index i = 0; i < rows.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index k = 0; k < rows.cols(); ++k) row.push_back(rows(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

template <class Report>
nlohmann::json report_json(const Report& r) {
  return {{"cost", number(r.cost)},
          {"grad_residual", number(r.grad_residual)},
          {"hess_min_eig", number(r.hess_min_eig)},
          {"outer_iters", r.outer_iters},
          {"matvecs", r.matvecs},
          {"status", std::string(to_string(r.status))},
          {"seed", r.seed}};
}

}  // namespace

nlohmann::json to_json(const SolveReport& report, bool with_point) {
  nlohmann::json j = report_json(report);
  j["rank"] = 2;
  if (with_point) j["point"] = rows_json(report.point.rows());
  return j;
}

nlohmann::json to_json(const ObliqueSolveReport& report, bool with_point) {
  nlohmann::json j = report_json(report);
  j["rank"] = report.point.rank_bound();
  if (with_point) j["point"] = rows_json(report.point.rows());
  return j;
}

nlohmann::json to_json(const CertificateReport& report) {
  return {{"grad_residual", number(report.grad_residual)},
          {"hess_min_eig", number(report.hess_min_eig)},
          {"s_min_eig", number(report.s_min_eig)},
          {"q_rank", report.q_rank},
          {"verdict", std::string(to_string(report.verdict))},
          {"threshold", number(report.threshold)},
          {"norm_a", number(report.norm_a)}};
}

CertificateReport certificate_from_json(const nlohmann::json& j) {
  try {
    CertificateReport r;
    r.grad_residual = j.at("grad_residual").get<double>();
    r.hess_min_eig = j.at("hess_min_eig").get<double>();
    r.s_min_eig = j.at("s_min_eig").get<double>();
    r.q_rank = j.at("q_rank").get<int>();
    const auto verdict = parse_verdict(j.at("verdict").get<std::string>());
    if (!verdict) throw FormatError("certificate: unknown verdict");
    r.verdict = *verdict;
    r.threshold = j.at("threshold").get<double>();
    r.norm_a = j.at("norm_a").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("certificate: ") + e.what());
  }
}

nlohmann::json to_json(const UniquenessReport& report) {
  return {{"sz_norm", number(report.sz_norm)},
          {"s_min_eig", number(report.s_min_eig)},
          {"s_second_eig", number(report.s_second_eig)},
          {"threshold", number(report.threshold)},
          {"unique", report.unique}};
}

nlohmann::json to_json(const SdpEstimate& estimate) {
  return {{"lower", number(estimate.lower)},
          {"upper", number(estimate.upper)},
          {"norm_bound", number(estimate.norm_bound)},
          {"final_rank", estimate.final_rank},
          {"certified", estimate.certified}};
}

nlohmann::json to_json(const RecoveryMetrics& metrics) {
  return {{"correlation", number(metrics.correlation)},
          {"overlap", number(metrics.overlap)},
          {"exact", metrics.exact},
          {"frobenius_gap", number(metrics.frobenius_gap)}};
}

}  // namespace bmsync

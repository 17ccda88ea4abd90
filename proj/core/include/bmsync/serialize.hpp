#pragma once

#include "bmsync/certify.hpp"
#include "bmsync/recover.hpp"
#include "bmsync/solver.hpp"

#include <nlohmann/json.hpp>

namespace bmsync {

/// JSON views of the report types. Non-finite numbers become null. Points are
/// included as a list of rows only when `with_point` is set.
nlohmann::json to_json(const SolveReport& report, bool with_point = false);
nlohmann::json to_json(const ObliqueSolveReport& report, bool with_point = false);
nlohmann::json to_json(const CertificateReport& report);
nlohmann::json to_json(const UniquenessReport& report);
nlohmann::json to_json(const SdpEstimate& estimate);
nlohmann::json to_json(const RecoveryMetrics& metrics);

/// Inverse of to_json(CertificateReport); throws FormatError.
CertificateReport certificate_from_json(const nlohmann::json& j);

}  // namespace bmsync

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace bmsync {

/// Bumped whenever a column is added, removed or reordered.
inline constexpr int kResultSchemaVersion = 1;

/// One row per (grid point, trial, restart). Fields that do not apply to an
/// experiment stay empty: "" in CSV, null in JSON.
struct ResultRecord {
  std::string experiment;
  std::uint64_t seed = 0;  // solver seed of this restart
  std::int64_t n = 0;
  std::int64_t grid = 0;
  std::int64_t trial = 0;
  std::int64_t restart = 0;
  std::optional<double> sigma;
  std::optional<double> lambda;
  std::optional<double> a;
  std::optional<double> b;
  std::string status;
  std::optional<double> cost;
  std::optional<double> grad_residual;
  std::optional<double> hess_min_eig;
  std::optional<double> s_min_eig;
  std::optional<std::int64_t> q_rank;
  std::string verdict;
  std::optional<bool> unique;
  std::optional<double> correlation;
  std::optional<double> overlap;
  std::optional<bool> exact;
  std::optional<double> frobenius_gap;
  std::optional<double> gamma_hat;
  std::optional<double> c;
  std::optional<double> sdp_upper;   // duality bound at the returned point
  std::optional<double> norm_bound;  // n‖A‖
  std::optional<double> mle_value;
  std::optional<std::int64_t> soc_count;
  std::optional<bool> lemma4_holds;
  std::optional<std::int64_t> outer_iters;
  std::optional<std::int64_t> matvecs;
  std::string error;
  std::optional<double> wall_time;

  bool operator==(const ResultRecord&) const = default;
};

using ResultTable = std::vector<ResultRecord>;

/// Column names in output order; the first three are experiment, seed, n.
const std::vector<std::string>& result_columns();

/// 17-significant-digit floats; non-finite values as inf, -inf, nan.
void write_csv(std::ostream& out, const ResultTable& table);
ResultTable read_csv(std::istream& in);

/// Array of objects keyed by column name. Non-finite numbers become the
/// strings "inf", "-inf", "nan" since JSON has no literal for them.
nlohmann::json to_json(const ResultTable& table);
ResultTable table_from_json(const nlohmann::json& j);

struct EmitPaths {
  std::optional<std::filesystem::path> csv;
  std::optional<std::filesystem::path> json;
  std::filesystem::path manifest;
};

/// Writes `<stem>.csv` and/or `<stem>.json` plus `<stem>.manifest.json`.
/// Throws std::runtime_error naming the path on I/O failure and
/// std::invalid_argument for an empty table.
EmitPaths emit_results(const ResultTable& table, bool csv, bool json,
                       const std::filesystem::path& stem, const nlohmann::json& manifest);

/// config, code version, schema version and master seed.
nlohmann::json make_manifest(const nlohmann::json& config, std::uint64_t master_seed);

}  // namespace bmsync

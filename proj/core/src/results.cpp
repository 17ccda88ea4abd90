#include "bmsync/results.hpp"

#include "bmsync/matrix_io.hpp"
#include "bmsync/version.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <variant>

namespace bmsync {
namespace {

using Member = std::variant<std::string ResultRecord::*, std::uint64_t ResultRecord::*,
                            std::int64_t ResultRecord::*, std::optional<double> ResultRecord::*,
                            std::optional<std::int64_t> ResultRecord::*,
                            std::optional<bool> ResultRecord::*>;

struct Column {
  const char* name;
  Member member;
};

const std::vector<Column>& columns() {
  static const std::vector<Column> cols{
      {"experiment", &ResultRecord::experiment},
      {"seed", &ResultRecord::seed},
      {"n", &ResultRecord::n},
      {"grid", &ResultRecord::grid},
      {"trial", &ResultRecord::trial},
      {"restart", &ResultRecord::restart},
      {"sigma", &ResultRecord::sigma},
      {"lambda", &ResultRecord::lambda},
      {"a", &ResultRecord::a},
      {"b", &ResultRecord::b},
      {"status", &ResultRecord::status},
      {"cost", &ResultRecord::cost},
      {"grad_residual", &ResultRecord::grad_residual},
      {"hess_min_eig", &ResultRecord::hess_min_eig},
      {"s_min_eig", &ResultRecord::s_min_eig},
      {"q_rank", &ResultRecord::q_rank},
      {"verdict", &ResultRecord::verdict},
      {"unique", &ResultRecord::unique},
      {"correlation", &ResultRecord::correlation},
      {"overlap", &ResultRecord::overlap},
      {"exact", &ResultRecord::exact},
      {"frobenius_gap", &ResultRecord::frobenius_gap},
      {"gamma_hat", &ResultRecord::gamma_hat},
      {"c", &ResultRecord::c},
      {"sdp_upper", &ResultRecord::sdp_upper},
      {"norm_bound", &ResultRecord::norm_bound},
      {"mle_value", &ResultRecord::mle_value},
      {"soc_count", &ResultRecord::soc_count},
      {"lemma4_holds", &ResultRecord::lemma4_holds},
      {"outer_iters", &ResultRecord::outer_iters},
      {"matvecs", &ResultRecord::matvecs},
      {"error", &ResultRecord::error},
      {"wall_time", &ResultRecord::wall_time},
  };
  return cols;
}

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

std::string double_text(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

double text_double(const std::string& s, const char* column) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw FormatError(std::string("results: column ") + column + ": bad number '" + s + "'");
  }
  return v;
}

template <class Int>
Int text_int(const std::string& s, const char* column) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError(std::string("results: column ") + column + ": bad integer '" + s + "'");
  }
  return v;
}

bool text_bool(const std::string& s, const char* column) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw FormatError(std::string("results: column ") + column + ": bad boolean '" + s + "'");
}

std::string cell_text(const ResultRecord& r, const Member& m) {
  return std::visit(
      Overloaded{
          [&](std::string ResultRecord::*p) { return r.*p; },
          [&](std::uint64_t ResultRecord::*p) { return std::to_string(r.*p); },
          [&](std::int64_t ResultRecord::*p) { return std::to_string(r.*p); },
          [&](std::optional<double> ResultRecord::*p) {
            return (r.*p) ? double_text(*(r.*p)) : std::string();
          },
          [&](std::optional<std::int64_t> ResultRecord::*p) {
            return (r.*p) ? std::to_string(*(r.*p)) : std::string();
          },
          [&](std::optional<bool> ResultRecord::*p) {
            return (r.*p) ? std::string(*(r.*p) ? "true" : "false") : std::string();
          },
      },
      m);
}

void set_cell(ResultRecord& r, const Column& col, const std::string& text) {
  std::visit(Overloaded{
                 [&](std::string ResultRecord::*p) { r.*p = text; },
                 [&](std::uint64_t ResultRecord::*p) { r.*p = text_int<std::uint64_t>(text, col.name); },
                 [&](std::int64_t ResultRecord::*p) { r.*p = text_int<std::int64_t>(text, col.name); },
                 [&](std::optional<double> ResultRecord::*p) {
                   r.*p = text.empty() ? std::nullopt : std::optional(text_double(text, col.name));
                 },
                 [&](std::optional<std::int64_t> ResultRecord::*p) {
                   r.*p = text.empty() ? std::nullopt
                                       : std::optional(text_int<std::int64_t>(text, col.name));
                 },
                 [&](std::optional<bool> ResultRecord::*p) {
                   r.*p = text.empty() ? std::nullopt : std::optional(text_bool(text, col.name));
                 },
             },
             col.member);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

// Splits one CSV record, honouring quotes (which may span lines).
bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool quoted = false;
  bool any = false;
  char ch;
  while (in.get(ch)) {
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else if (ch != '\r') {
      field += ch;
    }
  }
  if (quoted) throw FormatError("results: unterminated quoted CSV field");
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

nlohmann::json cell_json(const ResultRecord& r, const Member& m) {
  return std::visit(
      Overloaded{
          [&](std::string ResultRecord::*p) { return nlohmann::json(r.*p); },
          [&](std::uint64_t ResultRecord::*p) { return nlohmann::json(r.*p); },
          [&](std::int64_t ResultRecord::*p) { return nlohmann::json(r.*p); },
          [&](std::optional<double> ResultRecord::*p) {
            if (!(r.*p)) return nlohmann::json(nullptr);
            const double v = *(r.*p);
            return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(double_text(v));
          },
          [&](std::optional<std::int64_t> ResultRecord::*p) {
            return (r.*p) ? nlohmann::json(*(r.*p)) : nlohmann::json(nullptr);
          },
          [&](std::optional<bool> ResultRecord::*p) {
            return (r.*p) ? nlohmann::json(*(r.*p)) : nlohmann::json(nullptr);
          },
      },
      m);
}

void set_json(ResultRecord& r, const Column& col, const nlohmann::json& v) {
  std::visit(Overloaded{
                 [&](std::string ResultRecord::*p) { r.*p = v.get<std::string>(); },
                 [&](std::uint64_t ResultRecord::*p) { r.*p = v.get<std::uint64_t>(); },
                 [&](std::int64_t ResultRecord::*p) { r.*p = v.get<std::int64_t>(); },
                 [&](std::optional<double> ResultRecord::*p) {
                   if (v.is_null()) {
                     r.*p = std::nullopt;
                   } else if (v.is_string()) {
                     r.*p = text_double(v.get<std::string>(), col.name);
                   } else {
                     r.*p = v.get<double>();
                   }
                 },
                 [&](std::optional<std::int64_t> ResultRecord::*p) {
                   r.*p = v.is_null() ? std::nullopt : std::optional(v.get<std::int64_t>());
                 },
                 [&](std::optional<bool> ResultRecord::*p) {
                   r.*p = v.is_null() ? std::nullopt : std::optional(v.get<bool>());
                 },
             },
             col.member);
}

template <class WriteFn>
void write_file(const std::filesystem::path& path, WriteFn&& write) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  std::filesystem::path p = stem;
  p += suffix;
  return p;
}

}  // namespace

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const Column& c : columns()) out.emplace_back(c.name);
    return out;
  }();
  return names;
}

void write_csv(std::ostream& out, const ResultTable& table) {
  const auto& cols = columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i].name;
  out << '\n';
  for (const ResultRecord& r : table) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      out << (i ? "," : "") << csv_escape(cell_text(r, cols[i].member));
    }
    out << '\n';
  }
}

ResultTable read_csv(std::istream& in) {
  std::vector<std::string> fields;
  if (!read_csv_record(in, fields)) throw FormatError("results: empty CSV");
  if (fields != result_columns()) throw FormatError("results: CSV header does not match the schema");
  const auto& cols = columns();
  ResultTable table;
  while (read_csv_record(in, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != cols.size()) {
      throw FormatError("results: row " + std::to_string(table.size() + 1) + " has " +
                        std::to_string(fields.size()) + " fields");
    }
    ResultRecord r;
    for (std::size_t i = 0; i < cols.size(); ++i) set_cell(r, cols[i], fields[i]);
    table.push_back(std::move(r));
  }
  return table;
}

nlohmann::json to_json(const ResultTable& table) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ResultRecord& r : table) {
    nlohmann::json obj = nlohmann::json::object();
    for (const Column& c : columns()) obj[c.name] = cell_json(r, c.member);
    arr.push_back(std::move(obj));
  }
  return arr;
}

ResultTable table_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw FormatError("results: JSON table must be an array");
  ResultTable table;
  try {
    for (const auto& obj : j) {
      ResultRecord r;
      for (const Column& c : columns()) set_json(r, c, obj.at(c.name));
      table.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("results: ") + e.what());
  }
  return table;
}

EmitPaths emit_results(const ResultTable& table, bool csv, bool json,
                       const std::filesystem::path& stem, const nlohmann::json& manifest) {
  if (table.empty()) throw std::invalid_argument("emit_results: empty table");
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  EmitPaths paths;
  if (csv) {
    paths.csv = with_suffix(stem, ".csv");
    write_file(*paths.csv, [&](std::ostream& out) { write_csv(out, table); });
  }
  if (json) {
    paths.json = with_suffix(stem, ".json");
    // nlohmann prints the shortest text that round-trips each double exactly.
    write_file(*paths.json, [&](std::ostream& out) { out << to_json(table).dump(1) << '\n'; });
  }
  paths.manifest = with_suffix(stem, ".manifest.json");
  write_file(paths.manifest, [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
  return paths;
}

nlohmann::json make_manifest(const nlohmann::json& config, std::uint64_t master_seed) {
  return {{"config", config},
          {"version", kVersion},
          {"schema_version", kResultSchemaVersion},
          {"master_seed", master_seed},
          {"columns", result_columns()}};
}

}  // namespace bmsync

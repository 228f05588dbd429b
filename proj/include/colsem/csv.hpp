#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "colsem/relation.hpp"

namespace colsem {

/// By default an unquoted empty field is Null and a quoted empty field ("")
/// is the empty string. Setting `null_token` makes that unquoted token the
/// Null marker instead.
struct CsvOptions {
  std::optional<std::string> null_token;
};

/// RFC-4180 reader. The header row is mandatory and must list the schema's
/// attribute names in order. Errors name the 1-based line of the record.
Relation read_csv(std::istream& in, const std::string& name, const Schema& schema,
                  const CsvOptions& options = {});
Relation load_csv(const std::filesystem::path& path, const std::string& name,
                  const Schema& schema, const CsvOptions& options = {});

void write_csv(std::ostream& out, const Relation& r, const CsvOptions& options = {});
void emit_csv(const Relation& r, const std::filesystem::path& path,
              const CsvOptions& options = {});

/// Catalog sidecar: one relation per line, `name(attr:type,...)`, with types
/// int, float, str, bool. Blank lines and `#` comments are ignored.
Catalog parse_catalog(std::string_view text);
Catalog load_catalog(const std::filesystem::path& path);
std::string format_catalog(const Catalog& catalog);

/// Loads `<dir>/<name>.csv` for every relation in the catalog.
Database load_database(const Catalog& catalog, const std::filesystem::path& dir,
                       const CsvOptions& options = {});
/// Writes `<dir>/<name>.csv` per relation plus `<dir>/catalog.txt`.
void emit_database(const Database& db, const std::filesystem::path& dir,
                   const CsvOptions& options = {});

}  // namespace colsem

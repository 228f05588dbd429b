#include "colsem/csv.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "colsem/error.hpp"

namespace colsem {
namespace {

struct Field {
  std::string text;
  bool quoted = false;
};

struct Record {
  std::vector<Field> fields;
  std::size_t line = 0;
};

// Splits the whole input into records. A newline-terminated line is always a
// record (so a lone empty line is one empty field); an unterminated trailing
// segment is a record only when non-empty.
std::vector<Record> split_records(std::string_view text) {
  std::vector<Record> records;
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    Record rec;
    rec.line = line;
    Field field;
    bool in_quotes = false;
    bool terminated = false;
    while (i < text.size()) {
      char c = text[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field.text += '"';
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field.text += c;
          ++i;
        }
        continue;
      }
      if (c == '"' && field.text.empty() && !field.quoted) {
        field.quoted = true;
        in_quotes = true;
        ++i;
      } else if (c == ',') {
        rec.fields.push_back(std::move(field));
        field = Field{};
        ++i;
      } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
        i += 2;
        terminated = true;
        break;
      } else if (c == '\n') {
        ++i;
        terminated = true;
        break;
      } else {
        field.text += c;
        ++i;
      }
    }
    if (in_quotes) {
      throw Error(ErrorKind::Syntax, "unterminated quoted field", rec.line, 1);
    }
    ++line;
    rec.fields.push_back(std::move(field));
    bool blank_tail = !terminated && rec.fields.size() == 1 && rec.fields[0].text.empty() &&
                      !rec.fields[0].quoted;
    if (!blank_tail) records.push_back(std::move(rec));
  }
  return records;
}

Value parse_cell(const Field& field, const Column& column, const CsvOptions& options,
                 std::size_t line) {
  if (!field.quoted) {
    if (options.null_token ? field.text == *options.null_token : field.text.empty()) {
      return Value::null();
    }
  }
  const std::string& s = field.text;
  auto fail = [&]() -> Error {
    return Error(ErrorKind::TypeParseError, "line " + std::to_string(line) + ": cannot parse '" +
                                                s + "' as " +
                                                std::string(to_string(column.type)) +
                                                " for column " + column.name);
  };
  switch (column.type) {
    case ColumnType::Str:
      return Value::string(s);
    case ColumnType::Int: {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size() || s.empty()) throw fail();
      return Value::integer(v);
    }
    case ColumnType::Float: {
      double v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size() || s.empty()) throw fail();
      return Value::real(v);
    }
    case ColumnType::Bool: {
      std::string lower;
      for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (lower == "true") return Value::boolean(true);
      if (lower == "false") return Value::boolean(false);
      throw fail();
    }
  }
  throw fail();
}

bool needs_quotes(std::string_view s, const CsvOptions& options) {
  if (s.empty()) return true;
  if (options.null_token && s == *options.null_token) return true;
  return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void write_field(std::ostream& out, std::string_view s, bool quote) {
  if (!quote) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

}  // namespace

Relation read_csv(std::istream& in, const std::string& name, const Schema& schema,
                  const CsvOptions& options) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto records = split_records(text);
  if (records.empty()) {
    throw Error(ErrorKind::ArityMismatch, "relation " + name + ": missing header row");
  }
  const Record& header = records.front();
  if (header.fields.size() != schema.size()) {
    throw Error(ErrorKind::ArityMismatch, "relation " + name + ": line 1: header has " +
                                              std::to_string(header.fields.size()) +
                                              " fields, schema has " +
                                              std::to_string(schema.size()));
  }
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (header.fields[c].text != schema[c].name) {
      throw Error(ErrorKind::UnknownAttribute, "relation " + name + ": header field '" +
                                                   header.fields[c].text + "' does not match '" +
                                                   schema[c].name + "'");
    }
  }
  Relation r(name, schema);
  for (std::size_t i = 1; i < records.size(); ++i) {
    const Record& rec = records[i];
    if (rec.fields.size() != schema.size()) {
      throw Error(ErrorKind::ArityMismatch,
                  "relation " + name + ": line " + std::to_string(rec.line) + ": expected " +
                      std::to_string(schema.size()) + " fields, got " +
                      std::to_string(rec.fields.size()));
    }
    Row row;
    row.reserve(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
      row.push_back(parse_cell(rec.fields[c], schema[c], options, rec.line));
    }
    r.add_row(std::move(row));
  }
  return r;
}

Relation load_csv(const std::filesystem::path& path, const std::string& name,
                  const Schema& schema, const CsvOptions& options) {
  std::istringstream in(read_file(path));
  return read_csv(in, name, schema, options);
}

void write_csv(std::ostream& out, const Relation& r, const CsvOptions& options) {
  for (std::size_t c = 0; c < r.arity(); ++c) {
    if (c) out << ',';
    write_field(out, r.columns()[c].name, needs_quotes(r.columns()[c].name, options));
  }
  out << '\n';
  for (const Row& row : r.rows()) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      const Value& v = row[c];
      if (v.is_null()) {
        if (options.null_token) out << *options.null_token;
      } else if (v.is_str()) {
        write_field(out, v.as_str(), needs_quotes(v.as_str(), options));
      } else if (v.is_int()) {
        out << v.as_int();
      } else if (v.is_float()) {
        out << format_float(v.as_float());
      } else {
        out << (v.as_bool() ? "true" : "false");
      }
    }
    out << '\n';
  }
}

void emit_csv(const Relation& r, const std::filesystem::path& path, const CsvOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_csv(out, r, options);
}

Catalog parse_catalog(std::string_view text) {
  Catalog catalog;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    auto open = line.find('(');
    if (open == std::string::npos || line.back() != ')') {
      throw Error(ErrorKind::Syntax, "expected name(attr:type,...)", line_no, 1);
    }
    std::string name = trim(line.substr(0, open));
    if (!is_identifier(name)) {
      throw Error(ErrorKind::Syntax, "invalid relation name '" + name + "'", line_no, 1);
    }
    std::string body = line.substr(open + 1, line.size() - open - 2);
    Schema schema;
    std::size_t start = 0;
    while (start <= body.size()) {
      std::size_t comma = body.find(',', start);
      std::string item = trim(body.substr(start, comma == std::string::npos ? body.npos
                                                                              : comma - start));
      start = comma == std::string::npos ? body.size() + 1 : comma + 1;
      auto colon = item.find(':');
      if (colon == std::string::npos) {
        throw Error(ErrorKind::Syntax, "expected attr:type in '" + item + "'", line_no,
                    open + 2);
      }
      std::string attr = trim(item.substr(0, colon));
      auto type = parse_column_type(trim(item.substr(colon + 1)));
      if (!is_identifier(attr) || !type) {
        throw Error(ErrorKind::Syntax, "invalid attribute declaration '" + item + "'", line_no,
                    open + 2);
      }
      for (const Column& c : schema) {
        if (c.name == attr) {
          throw Error(ErrorKind::NameCollision,
                      "duplicate attribute " + attr + " in relation " + name);
        }
      }
      schema.push_back({attr, *type});
    }
    catalog.add(name, std::move(schema));
  }
  return catalog;
}

Catalog load_catalog(const std::filesystem::path& path) { return parse_catalog(read_file(path)); }

std::string format_catalog(const Catalog& catalog) {
  std::string out;
  for (const auto& [name, schema] : catalog.relations) {
    out += name + "(";
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (i) out += ",";
      out += schema[i].name + ":" + std::string(to_string(schema[i].type));
    }
    out += ")\n";
  }
  return out;
}

Database load_database(const Catalog& catalog, const std::filesystem::path& dir,
                       const CsvOptions& options) {
  Database db;
  for (const auto& [name, schema] : catalog.relations) {
    db.add(load_csv(dir / (name + ".csv"), name, schema, options));
  }
  return db;
}

void emit_database(const Database& db, const std::filesystem::path& dir,
                   const CsvOptions& options) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, rel] : db.relations) emit_csv(rel, dir / (name + ".csv"), options);
  std::ofstream out(dir / "catalog.txt", std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + (dir / "catalog.txt").string());
  out << format_catalog(db.catalog());
}

}  // namespace colsem

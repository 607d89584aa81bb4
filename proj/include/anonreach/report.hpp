// Copyright 2026 The anonreach Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Result tables and their CSV / JSON output. Output depends only on the
// values, so equal runs produce byte-identical files.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "anonreach/error.hpp"

namespace anonreach {

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
      throw InternalStateError("table " + name + ": row has " + std::to_string(row.size()) +
                               " cells, expected " + std::to_string(columns.size()));
    }
    rows.push_back(std::move(row));
  }

  std::size_t column(const std::string& col) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == col) return i;
    }
    throw DomainError("table " + name + " has no column " + col);
  }

  double number(std::size_t row, const std::string& col) const {
    const Cell& c = rows.at(row).at(column(col));
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    throw DomainError("table " + name + ": column " + col + " is not numeric");
  }

  std::vector<double> numbers(const std::string& col) const {
    std::vector<double> out;
    for (std::size_t r = 0; r < rows.size(); ++r) out.push_back(number(r, col));
    return out;
  }
};

struct RunResult {
  std::string scenario;
  std::vector<Table> tables;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();

  const Table& table(const std::string& name) const {
    for (const auto& t : tables) {
      if (t.name == name) return t;
    }
    throw DomainError("no result table named " + name);
  }
};

enum class OutputFormat { kCsv, kJson };

namespace internal {

inline void WriteCell(std::ostream& os, const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) {
    os << *i;
  } else if (const auto* d = std::get_if<double>(&c)) {
    if (std::isnan(*d)) return;
    std::ostringstream tmp;
    tmp.precision(17);
    tmp << *d;
    os << tmp.str();
  } else {
    const auto& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) {
      os << s;
    } else {
      os << '"';
      for (char ch : s) os << (ch == '"' ? "\"\"" : std::string(1, ch));
      os << '"';
    }
  }
}

inline nlohmann::ordered_json CellJson(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  if (const auto* d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return nullptr;
    return *d;
  }
  return std::get<std::string>(c);
}

}  // namespace internal

inline void write_table_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      internal::WriteCell(os, row[i]);
    }
    os << '\n';
  }
}

inline nlohmann::ordered_json table_to_json(const Table& t) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = internal::CellJson(row[i]);
    rows.push_back(std::move(obj));
  }
  return rows;
}

// Writes into `dir`: with kCsv one <table>.csv per table plus summary.json;
// with kJson a single results.json holding the summary and every table.
// Returns the paths written, in order.
inline std::vector<std::string> emit_results(const RunResult& result, const std::string& dir,
                                             OutputFormat format) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  std::vector<std::string> written;
  auto open = [&](const std::string& file) {
    const std::string path = (fs::path(dir) / file).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    written.push_back(path);
    return out;
  };
  nlohmann::ordered_json doc = result.summary;
  doc["scenario"] = result.scenario;
  if (format == OutputFormat::kCsv) {
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& t : result.tables) {
      auto out = open(t.name + ".csv");
      write_table_csv(out, t);
      files.push_back(t.name + ".csv");
    }
    doc["tables"] = files;
    auto out = open("summary.json");
    out << doc.dump(2) << '\n';
  } else {
    nlohmann::ordered_json tables = nlohmann::ordered_json::object();
    for (const auto& t : result.tables) tables[t.name] = table_to_json(t);
    doc["tables"] = tables;
    auto out = open("results.json");
    out << doc.dump(2) << '\n';
  }
  return written;
}

}  // namespace anonreach

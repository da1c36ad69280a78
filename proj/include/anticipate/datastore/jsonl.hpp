// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>

#include <json.hpp>

#include "anticipate/errors.hpp"

namespace anticipate::datastore {

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Calls fn(json, line_number) for every non-blank line; line numbers are 1-based.
template <typename Fn>
void for_each_json_line(const std::string& text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
    }
    if (!row.is_object()) throw ParseError("line " + std::to_string(line_no) + ": expected a JSON object");
    fn(row, line_no);
  }
}

template <typename T>
T require_field(const nlohmann::json& row, const char* key, std::size_t line) {
  auto it = row.find(key);
  auto fail = [&](const std::string& why) {
    return ParseError("line " + std::to_string(line) + ": field '" + key + "' " + why);
  };
  if (it == row.end()) throw fail("is missing");
  if constexpr (std::is_same_v<T, std::string>) {
    if (!it->is_string()) throw fail("must be a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer()) throw fail("must be an integer");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!it->is_number()) throw fail("must be a number");
  }
  return it->template get<T>();
}

}  // namespace anticipate::datastore

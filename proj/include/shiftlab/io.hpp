#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "shiftlab/core.hpp"
#include "shiftlab/numeric.hpp"

namespace shiftlab::io {

using nlohmann::json;

// JSON has no infinities; they are spelled as strings.
inline json num(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : "-inf";
}

inline std::string csv_cell(double x) { return format_g17(x); }

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            std::initializer_list<std::string> header)
      : out_(path, std::ios::binary) {
    if (!out_) throw ValidationError("cannot open " + path.string());
    std::string line;
    for (const auto& h : header) {
      if (!line.empty()) line += ',';
      line += h;
    }
    out_ << line << '\n';
  }

  void row(std::span<const std::string> cells) {
    std::string line;
    for (const auto& c : cells) {
      if (!line.empty()) line += ',';
      line += c;
    }
    out_ << line << '\n';
  }

  void row(std::initializer_list<std::string> cells) {
    row(std::span<const std::string>(cells.begin(), cells.size()));
  }

 private:
  std::ofstream out_;
};

inline void write_text(const std::filesystem::path& path,
                       const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path.string());
  out << text;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

}  // namespace shiftlab::io

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "fieldnav/routing.hpp"

namespace fieldnav {

// Field CSV: one "x,y" pair per line (meters), '#' starts a comment,
// blank lines and CRLF endings allowed. Parse errors carry line numbers.
Field parse_field_csv(const std::string& text, const std::string& source_name = "<input>");
Field load_field(const std::filesystem::path& file);
void write_field(const std::filesystem::path& file, const Field& field);

struct GenerateOptions {
  std::uint64_t seed = 1;
  int count = 20;
  double width = 20.0;
  double height = 20.0;
  double min_separation = 0.5;
};

// Uniform random targets with pairwise separation, deterministic per seed.
// Throws PackingInfeasible after 1e5 rejected samples.
Field generate_field(const GenerateOptions& options);

}  // namespace fieldnav

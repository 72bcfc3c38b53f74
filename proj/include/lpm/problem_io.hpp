#pragma once

#include <string>

#include "lpm/errors.hpp"
#include "lpm/problem.hpp"

namespace lpm {

class FileParseError : public Error {
 public:
  FileParseError(const std::string& what, int line) : Error(what), line(line) {}
  int line;
};

class UnknownKey : public FileParseError {
 public:
  using FileParseError::FileParseError;
};

class MissingRequired : public Error {
 public:
  using Error::Error;
};

class RangeError : public FileParseError {
 public:
  using FileParseError::FileParseError;
};

struct Problem {
  ProblemSpec spec;
  GridConfig grid;
};

/// Line-oriented `key = value` format with sections [system], [norms],
/// [grid], [constants]; expression values quoted. Multiple pairs per line
/// are allowed, `#` starts a comment. Unknown keys are errors.
Problem load_problem(const std::string& path);
Problem parse_problem_text(const std::string& text, const std::string& origin = "<string>");

std::string save_problem_text(const ProblemSpec& spec, const GridConfig& grid);
void save_problem(const std::string& path, const ProblemSpec& spec, const GridConfig& grid);

/// Field-by-field equality (expressions compared by source text).
bool specs_equal(const ProblemSpec& a, const ProblemSpec& b);

}  // namespace lpm

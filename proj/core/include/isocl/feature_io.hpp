#pragma once

// CSV feature files: header `label,f0,f1,...,f{D-1}`, one sample per row.
// The label column may be left empty on every row for unlabeled data.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "isocl/error.hpp"
#include "isocl/spectral.hpp"

namespace isocl {

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::InvalidInput, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

FeatureMatrix read_feature_csv(std::istream& in);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

/// Writes with 17 significant digits so values round-trip exactly.
void write_feature_csv(std::ostream& out, const FeatureMatrix& x);
void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& x);

/// Shortest decimal text that parses back to the same double (%.17g).
std::string format_double(double v);

}  // namespace isocl

#pragma once

#include "fanosteer/entropy.hpp"
#include "fanosteer/spdc_sim.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

// Plain-text joint distribution files:
//
//   # comment lines are ignored
//   format fanosteer-joint 1
//   rows 2
//   cols 2
//   bin_width_a 1
//   bin_width_b 1
//   values probability        (or: counts)
//   total_counts 1000         (or: none)
//   axis_a x_A
//   axis_b x_B
//   seed 7                    (optional)
//   data
//   0.4 0.1
//   0.1 0.4
//
// Matrices are row-major with rows indexed by the A outcome.

namespace fanosteer {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int row = -1, int col = -1);
  int line() const { return line_; }
  int row() const { return row_; }
  int col() const { return col_; }
  /// Same error with the file name prefixed to the message.
  ParseError in_file(const std::string& source) const;

 private:
  struct Verbatim {};
  ParseError(Verbatim, const std::string& message, int line, int row, int col)
      : std::runtime_error(message), line_(line), row_(row), col_(col) {}

  int line_;
  int row_;
  int col_;
};

struct JointFile {
  JointDistribution joint;
  std::string axis_a = "A";
  std::string axis_b = "B";
  std::optional<std::uint64_t> seed;
};

JointFile read_joint(std::istream& in);
JointFile load_joint_file(const std::filesystem::path& path);
/// Shorthand returning just the distribution.
JointDistribution load_joint(const std::filesystem::path& path);

/// Writes probabilities at full precision, so save -> load is lossless.
void write_joint(std::ostream& out, const JointFile& file);
void save_joint(const std::filesystem::path& path, const JointFile& file);

/// Writes raw integer counts (values counts); loading normalizes them.
void save_counts(const std::filesystem::path& path, const CountMatrix& counts, double bin_width_a,
                 double bin_width_b, const std::string& axis_a, const std::string& axis_b);

}  // namespace fanosteer

#include "fanosteer/joint_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

namespace fanosteer {
namespace {

std::string describe(const std::string& what, int line, int row, int col) {
  std::ostringstream os;
  os << "line " << line;
  if (row >= 0) os << ", row " << row;
  if (col >= 0) os << ", column " << col;
  os << ": " << what;
  return os.str();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& token, int line, int row = -1, int col = -1) {
  // strtod round-trips %.17g output exactly.
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size()) {
    throw ParseError("not a number: '" + token + "'", line, row, col);
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& token, int line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError("not a nonnegative integer: '" + token + "'", line);
  }
  return v;
}

void write_header(std::ostream& out, Eigen::Index rows, Eigen::Index cols, double bw_a,
                  double bw_b, const char* values, std::optional<std::uint64_t> total,
                  const std::string& axis_a, const std::string& axis_b,
                  std::optional<std::uint64_t> seed) {
  out << "# fanosteer joint distribution\n";
  out << "format fanosteer-joint 1\n";
  out << "rows " << rows << "\n";
  out << "cols " << cols << "\n";
  out << "bin_width_a " << bw_a << "\n";
  out << "bin_width_b " << bw_b << "\n";
  out << "values " << values << "\n";
  out << "total_counts ";
  if (total) {
    out << *total << "\n";
  } else {
    out << "none\n";
  }
  out << "axis_a " << axis_a << "\n";
  out << "axis_b " << axis_b << "\n";
  if (seed) out << "seed " << *seed << "\n";
  out << "data\n";
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

}  // namespace

ParseError::ParseError(const std::string& what, int line, int row, int col)
    : std::runtime_error(describe(what, line, row, col)), line_(line), row_(row), col_(col) {}

ParseError ParseError::in_file(const std::string& source) const {
  return ParseError(Verbatim{}, source + ": " + what(), line_, row_, col_);
}

JointFile read_joint(std::istream& in) {
  std::map<std::string, std::string> header;
  std::string raw;
  int line = 0;
  bool saw_data = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    if (text == "data") {
      saw_data = true;
      break;
    }
    const auto space = text.find_first_of(" \t");
    if (space == std::string::npos) {
      throw ParseError("header line needs a key and a value", line);
    }
    header[text.substr(0, space)] = trim(text.substr(space));
  }
  if (!saw_data) throw ParseError("missing 'data' section", line);

  auto require = [&](const std::string& key) -> const std::string& {
    const auto it = header.find(key);
    if (it == header.end()) throw ParseError("missing header key '" + key + "'", line);
    return it->second;
  };
  if (require("format") != "fanosteer-joint 1") {
    throw ParseError("unsupported format '" + header["format"] + "'", line);
  }
  const auto rows = static_cast<Eigen::Index>(parse_unsigned(require("rows"), line));
  const auto cols = static_cast<Eigen::Index>(parse_unsigned(require("cols"), line));
  if (rows < 1 || cols < 1) throw ParseError("shape must be at least 1x1", line);
  const double bw_a = header.count("bin_width_a") ? parse_number(header["bin_width_a"], line) : 1.0;
  const double bw_b = header.count("bin_width_b") ? parse_number(header["bin_width_b"], line) : 1.0;
  const std::string values = header.count("values") ? header["values"] : "probability";
  if (values != "probability" && values != "counts") {
    throw ParseError("values must be 'probability' or 'counts'", line);
  }
  std::optional<std::uint64_t> total;
  if (header.count("total_counts") && header["total_counts"] != "none") {
    total = parse_unsigned(header["total_counts"], line);
  }

  Eigen::MatrixXd m(rows, cols);
  Eigen::Index r = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    if (r >= rows) {
      throw ParseError("more data rows than the header's " + std::to_string(rows), line,
                       static_cast<int>(r));
    }
    std::istringstream tokens(text);
    std::string tok;
    Eigen::Index c = 0;
    while (tokens >> tok) {
      if (c >= cols) {
        throw ParseError("more columns than the header's " + std::to_string(cols), line,
                         static_cast<int>(r), static_cast<int>(c));
      }
      const double v = parse_number(tok, line, static_cast<int>(r), static_cast<int>(c));
      if (!std::isfinite(v) || v < 0.0) {
        throw ParseError("negative or non-finite entry " + tok, line, static_cast<int>(r),
                         static_cast<int>(c));
      }
      m(r, c++) = v;
    }
    if (c != cols) {
      throw ParseError("expected " + std::to_string(cols) + " columns, found " + std::to_string(c),
                       line, static_cast<int>(r));
    }
    ++r;
  }
  if (r != rows) {
    throw ParseError("expected " + std::to_string(rows) + " data rows, found " + std::to_string(r),
                     line);
  }

  JointFile file{JointDistribution(Eigen::MatrixXd::Ones(1, 1)), "A", "B", std::nullopt};
  try {
    if (values == "counts") {
      JointDistribution j = JointDistribution::from_counts(m, bw_a, bw_b);
      if (total && *total != j.total_counts()) {
        throw ParseError("total_counts " + std::to_string(*total) + " does not match the data sum " +
                             std::to_string(*j.total_counts()),
                         line);
      }
      file.joint = std::move(j);
    } else {
      const JointDistribution j = JointDistribution::from_probabilities(m, bw_a, bw_b);
      file.joint = JointDistribution(j.matrix(), bw_a, bw_b, total);
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), line);
  }
  if (header.count("axis_a")) file.axis_a = header["axis_a"];
  if (header.count("axis_b")) file.axis_b = header["axis_b"];
  if (header.count("seed")) file.seed = parse_unsigned(header["seed"], line);
  return file;
}

JointFile load_joint_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  try {
    return read_joint(in);
  } catch (const ParseError& e) {
    throw e.in_file(path.string());
  }
}

JointDistribution load_joint(const std::filesystem::path& path) {
  return load_joint_file(path).joint;
}

void write_joint(std::ostream& out, const JointFile& file) {
  const auto precision = out.precision(std::numeric_limits<double>::max_digits10);
  const JointDistribution& j = file.joint;
  write_header(out, j.rows(), j.cols(), j.bin_width_a(), j.bin_width_b(), "probability",
               j.total_counts(), file.axis_a, file.axis_b, file.seed);
  for (Eigen::Index r = 0; r < j.rows(); ++r) {
    for (Eigen::Index c = 0; c < j.cols(); ++c) {
      if (c) out << ' ';
      out << j(r, c);
    }
    out << '\n';
  }
  out.precision(precision);
}

void save_joint(const std::filesystem::path& path, const JointFile& file) {
  std::ofstream out = open_for_write(path);
  write_joint(out, file);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void save_counts(const std::filesystem::path& path, const CountMatrix& counts, double bin_width_a,
                 double bin_width_b, const std::string& axis_a, const std::string& axis_b) {
  std::ofstream out = open_for_write(path);
  write_header(out, counts.counts.rows(), counts.counts.cols(), bin_width_a, bin_width_b, "counts",
               counts.total, axis_a, axis_b, counts.seed);
  for (Eigen::Index r = 0; r < counts.counts.rows(); ++r) {
    for (Eigen::Index c = 0; c < counts.counts.cols(); ++c) {
      if (c) out << ' ';
      out << counts.counts(r, c);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace fanosteer

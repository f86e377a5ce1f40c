#include "lsrn/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace lsrn::io {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool blank_or_comment(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '%';
}

// Splits on whitespace; the line may carry a trailing '\r'.
std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError("invalid number '" + s + "'", line);
  if (!std::isfinite(v)) throw ParseError("non-finite value '" + s + "'", line);
  return v;
}

Index parse_index(const std::string& s, std::size_t line) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("invalid integer '" + s + "'", line);
  }
  return static_cast<Index>(v);
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next line that is not blank and not a comment.
  bool next_data(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!blank_or_comment(line)) return true;
    }
    return false;
  }

  bool next_raw(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    return true;
  }

  std::size_t line() const noexcept { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

void write_double(std::ostream& out, double v) { out << std::setprecision(17) << v; }

}  // namespace

OperatorPtr read_matrix_market(std::istream& in) {
  LineReader reader(in);
  std::string line;
  if (!reader.next_raw(line)) throw ParseError("empty input, expected Matrix Market header", 1);

  const auto header = tokens(line);
  if (header.size() != 5 || header[0] != "%%MatrixMarket" || lower(header[1]) != "matrix") {
    throw ParseError("expected '%%MatrixMarket matrix <format> real general' header", reader.line());
  }
  const std::string format = lower(header[2]);
  const std::string field = lower(header[3]);
  const std::string symmetry = lower(header[4]);
  if (format != "coordinate" && format != "array") {
    throw ParseError("unsupported format '" + header[2] + "'", reader.line());
  }
  if (field != "real" && field != "integer" && field != "double") {
    throw ParseError("unsupported field '" + header[3] + "' (only real)", reader.line());
  }
  if (symmetry != "general") {
    throw ParseError("unsupported symmetry '" + header[4] + "' (only general)", reader.line());
  }

  if (!reader.next_data(line)) throw ParseError("missing size line", reader.line() + 1);
  const auto size = tokens(line);
  const std::size_t size_line = reader.line();

  if (format == "array") {
    if (size.size() != 2) throw ParseError("array size line must be 'rows cols'", size_line);
    const Index m = parse_index(size[0], size_line);
    const Index n = parse_index(size[1], size_line);
    if (m < 0 || n < 0) throw ParseError("negative dimension", size_line);
    RowMatrix a(m, n);
    // Array entries are stored column by column.
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < m; ++i) {
        if (!reader.next_data(line)) {
          throw ParseError("expected " + std::to_string(m * n) + " values, file ended early",
                           reader.line() + 1);
        }
        const auto t = tokens(line);
        if (t.size() != 1) throw ParseError("expected exactly one value per line", reader.line());
        a(i, j) = parse_double(t[0], reader.line());
      }
    }
    if (reader.next_data(line)) throw ParseError("unexpected trailing data", reader.line());
    return make_dense(std::move(a));
  }

  if (size.size() != 3) throw ParseError("coordinate size line must be 'rows cols nnz'", size_line);
  const Index m = parse_index(size[0], size_line);
  const Index n = parse_index(size[1], size_line);
  const Index nnz = parse_index(size[2], size_line);
  if (m < 0 || n < 0 || nnz < 0) throw ParseError("negative dimension", size_line);

  std::vector<std::tuple<Index, Index, double>> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  for (Index k = 0; k < nnz; ++k) {
    if (!reader.next_data(line)) {
      throw ParseError("expected " + std::to_string(nnz) + " entries, file ended early",
                       reader.line() + 1);
    }
    const auto t = tokens(line);
    if (t.size() != 3) throw ParseError("expected 'row col value'", reader.line());
    const Index i = parse_index(t[0], reader.line());
    const Index j = parse_index(t[1], reader.line());
    if (i < 1 || i > m || j < 1 || j > n) {
      throw ParseError("index (" + t[0] + ", " + t[1] + ") outside " + std::to_string(m) + "x" +
                           std::to_string(n),
                       reader.line());
    }
    entries.emplace_back(i - 1, j - 1, parse_double(t[2], reader.line()));
  }
  if (reader.next_data(line)) throw ParseError("unexpected trailing data", reader.line());

  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });

  CsrMatrix csr;
  csr.rows = m;
  csr.cols = n;
  csr.row_ptr.assign(static_cast<std::size_t>(m) + 1, 0);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto [i, j, v] = entries[k];
    if (!csr.col_idx.empty() && k > 0 && std::get<0>(entries[k - 1]) == i &&
        std::get<1>(entries[k - 1]) == j) {
      csr.values.back() += v;
      continue;
    }
    csr.col_idx.push_back(j);
    csr.values.push_back(v);
    ++csr.row_ptr[i + 1];
  }
  for (Index i = 0; i < m; ++i) csr.row_ptr[i + 1] += csr.row_ptr[i];
  return make_csr(std::move(csr));
}

OperatorPtr read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const CsrMatrix& a) {
  a.validate();
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows << ' ' << a.cols << ' ' << a.nnz() << '\n';
  for (Index i = 0; i < a.rows; ++i) {
    for (Index k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      out << i + 1 << ' ' << a.col_idx[k] + 1 << ' ';
      write_double(out, a.values[k]);
      out << '\n';
    }
  }
}

void write_matrix_market(std::ostream& out, const RowMatrix& a) {
  out << "%%MatrixMarket matrix array real general\n";
  out << a.rows() << ' ' << a.cols() << '\n';
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      write_double(out, a(i, j));
      out << '\n';
    }
  }
}

void write_matrix_market(const std::filesystem::path& path, const CsrMatrix& a) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_matrix_market(out, a);
}

void write_matrix_market(const std::filesystem::path& path, const RowMatrix& a) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_matrix_market(out, a);
}

Vector read_vector(std::istream& in) {
  LineReader reader(in);
  std::string line;
  std::vector<double> values;
  while (reader.next_data(line)) {
    const auto t = tokens(line);
    if (t.size() != 1) throw ParseError("expected exactly one value per line", reader.line());
    values.push_back(parse_double(t[0], reader.line()));
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

Vector read_vector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return read_vector(in);
}

void write_vector(std::ostream& out, const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) {
    write_double(out, v[i]);
    out << '\n';
  }
}

void write_vector(const std::filesystem::path& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_vector(out, v);
}

}  // namespace lsrn::io

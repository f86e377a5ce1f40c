#pragma once

#include "lsrn/linop.hpp"

#include <filesystem>
#include <iosfwd>

namespace lsrn::io {

/// Reads a Matrix Market file. `coordinate real general` becomes a CSR
/// operator (duplicate entries are summed), `array real general` a dense one.
/// Indices are 1-based on disk. Throws ParseError with the line number.
OperatorPtr read_matrix_market(std::istream& in);
OperatorPtr read_matrix_market(const std::filesystem::path& path);

/// Writers emit 17 significant digits so values round-trip exactly.
void write_matrix_market(std::ostream& out, const CsrMatrix& a);
void write_matrix_market(std::ostream& out, const RowMatrix& a);
void write_matrix_market(const std::filesystem::path& path, const CsrMatrix& a);
void write_matrix_market(const std::filesystem::path& path, const RowMatrix& a);

/// Plain-text vectors: one value per line; blank lines and lines starting
/// with '%' are ignored.
Vector read_vector(std::istream& in);
Vector read_vector(const std::filesystem::path& path);
void write_vector(std::ostream& out, const Vector& v);
void write_vector(const std::filesystem::path& path, const Vector& v);

}  // namespace lsrn::io

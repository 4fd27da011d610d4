#include "trialmarket/matrix.hpp"

#include "trialmarket/error.hpp"

namespace trialmarket {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols_) fail(ErrorKind::InvalidArgument, "ragged matrix rows");
    for (std::size_t c = 0; c < m.cols_; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r].assign(row(r).begin(), row(r).end());
  return out;
}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInstance: return "invalid-instance";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::DegenerateInstance: return "degenerate-instance";
    case ErrorKind::UndefinedShare: return "undefined-share";
    case ErrorKind::UnsupportedSolver: return "unsupported-solver";
    case ErrorKind::SizeLimit: return "size-limit";
    case ErrorKind::TieBreakingViolation: return "tie-breaking-violation";
    case ErrorKind::Undefined: return "undefined";
  }
  return "unknown";
}

}  // namespace trialmarket

#include "lsrn/lab.hpp"

#include "lsrn/gauss.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>

namespace lsrn::lab {
namespace {

// Independent streams for the pieces of one problem.
enum class Stream : std::uint64_t { left = 1, right = 2, coefficients = 3, noise = 4 };

GaussianSource stream(std::uint64_t seed, Stream which) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(which) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return GaussianSource(z ^ (z >> 31));
}

Matrix orthonormal_columns(const GaussianSource& src, Index rows, Index cols) {
  const Matrix g = fill_gaussian(src, rows, cols);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

Vector gaussian_vector(const GaussianSource& src, Index len) {
  const RowMatrix g = fill_gaussian(src, 1, len);
  return g.row(0).transpose();
}

void guard(Index rows, Index cols, const char* who) {
  if (rows > 0 && cols > kOracleMaxEntries / rows) {
    throw Error(std::string(who) + ": " + std::to_string(rows) + "x" + std::to_string(cols) +
                " exceeds the dense oracle limit of " + std::to_string(kOracleMaxEntries) +
                " entries");
  }
}

double default_tol(const Eigen::Ref<const Matrix>& a) {
  return static_cast<double>(std::max(a.rows(), a.cols())) * std::numeric_limits<double>::epsilon();
}

}  // namespace

void ProblemSpec::validate() const {
  if (m < 1 || n < 1) throw Error("problem: dimensions must be positive");
  if (r < 1 || r > std::min(m, n)) {
    throw Error("problem: rank " + std::to_string(r) + " outside [1, " +
                std::to_string(std::min(m, n)) + "]");
  }
  if (!(cond >= 1.0) || !std::isfinite(cond)) throw Error("problem: cond must be >= 1");
  if (!(noise_split >= 0.0 && noise_split < 1.0)) throw Error("problem: noise_split must lie in [0, 1)");
}

Problem gen_problem(const ProblemSpec& spec) {
  spec.validate();
  const Index m = spec.m;
  const Index n = spec.n;
  const Index r = spec.r;

  Problem p;
  p.u = orthonormal_columns(stream(spec.seed, Stream::left), m, r);
  p.v = orthonormal_columns(stream(spec.seed, Stream::right), n, r);
  p.singular_values.resize(r);
  const double log_cond = std::log(spec.cond);
  for (Index i = 0; i < r; ++i) {
    p.singular_values[i] = r == 1 ? 1.0 : std::exp(-log_cond * static_cast<double>(i) / static_cast<double>(r - 1));
  }
  if (r > 1) p.singular_values[r - 1] = 1.0 / spec.cond;

  RowMatrix a = p.u * p.singular_values.asDiagonal() * p.v.transpose();
  p.a = make_dense(std::move(a));

  // b = U diag(sigma) g (scaled) + a component orthogonal to range(U).
  const Vector g = gaussian_vector(stream(spec.seed, Stream::coefficients), r);
  const Vector coeff = p.singular_values.cwiseProduct(g);
  const double scale = std::sqrt(1.0 - spec.noise_split * spec.noise_split) / coeff.norm();
  const Vector b_range = p.u * (scale * coeff);
  p.x_star = p.v * (scale * g);

  Vector perp = Vector::Zero(m);
  if (r < m && spec.noise_split > 0.0) {
    perp = gaussian_vector(stream(spec.seed, Stream::noise), m);
    for (int pass = 0; pass < 2; ++pass) perp -= p.u * (p.u.transpose() * perp);
    perp *= spec.noise_split / perp.norm();
  }
  p.b = b_range + perp;
  return p;
}

Vector minlen_oracle(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Vector>& b,
                     std::optional<double> rank_tol) {
  guard(a.rows(), a.cols(), "minlen_oracle");
  if (b.size() != a.rows()) throw DimensionError("minlen_oracle: right-hand side length mismatch");
  // Extended precision keeps the oracle's own error well below what the
  // iterative solvers are checked against on ill-conditioned inputs.
  using ExtMatrix = Eigen::Matrix<Extended, Eigen::Dynamic, Eigen::Dynamic>;
  using ExtVector = Eigen::Matrix<Extended, Eigen::Dynamic, 1>;
  const ExtMatrix ae = a.cast<Extended>();
  Eigen::BDCSVD<ExtMatrix> svd(ae, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const ExtVector& sv = svd.singularValues();
  const auto tol = static_cast<Extended>(rank_tol.value_or(default_tol(a)));
  Index r = 0;
  if (sv.size() > 0 && sv[0] > 0) {
    while (r < sv.size() && sv[r] > tol * sv[0]) ++r;
  }
  if (r == 0) return Vector::Zero(a.cols());
  const ExtVector coeff =
      (svd.matrixU().leftCols(r).transpose() * b.cast<Extended>()).cwiseQuotient(sv.head(r));
  return (svd.matrixV().leftCols(r) * coeff).cast<double>();
}

Matrix pseudoinverse(const Eigen::Ref<const Matrix>& a, std::optional<double> rank_tol) {
  guard(a.rows(), a.cols(), "pseudoinverse");
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double tol = rank_tol.value_or(default_tol(a));
  Index r = 0;
  if (sv.size() > 0 && sv[0] > 0.0) {
    while (r < sv.size() && sv[r] > tol * sv[0]) ++r;
  }
  if (r == 0) return Matrix::Zero(a.cols(), a.rows());
  return svd.matrixV().leftCols(r) * sv.head(r).cwiseInverse().asDiagonal() *
         svd.matrixU().leftCols(r).transpose();
}

Vector singular_values(const Eigen::Ref<const Matrix>& a) {
  guard(a.rows(), a.cols(), "singular_values");
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues();
}

Index numerical_rank(const Eigen::Ref<const Matrix>& a, double rel_tol) {
  const Vector sv = singular_values(a);
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  Index r = 0;
  while (r < sv.size() && sv[r] > rel_tol * sv[0]) ++r;
  return r;
}

double effective_condition(const Eigen::Ref<const Matrix>& a, std::optional<double> rel_tol) {
  const Vector sv = singular_values(a);
  if (sv.size() == 0 || sv[0] == 0.0) throw Error("effective_condition: zero matrix");
  const double tol = rel_tol.value_or(default_tol(a));
  Index r = 0;
  while (r < sv.size() && sv[r] > tol * sv[0]) ++r;
  return sv[0] / sv[r - 1];
}

double measure_kappa(const LinearOperator& a, const Preconditioner& p) {
  const Index rows = p.side == Orientation::tall ? a.rows() : a.cols();
  guard(rows, p.factor.cols(), "measure_kappa");
  // A N (m x r), or (M^T A)^T = A^T M (n x r): same singular values.
  const Matrix dense = p.side == Orientation::tall ? a.apply_block(p.factor)
                                                   : a.apply_adjoint_block(p.factor);
  return effective_condition(dense);
}

}  // namespace lsrn::lab

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace cpce {

/// Partial polynomial degree per input dimension.
struct MultiIndex {
  std::vector<unsigned> degrees;

  std::size_t dim() const { return degrees.size(); }
  unsigned total_degree() const;
  bool is_zero() const { return total_degree() == 0; }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// Total-degree truncation set { alpha : |alpha|_1 <= P } in graded
/// lexicographic order: by total degree, then lexicographically on the
/// reversed index. The zero index is always first.
class MultiIndexSet {
 public:
  MultiIndexSet(std::size_t input_dim, unsigned max_degree, std::vector<MultiIndex> indices);

  std::size_t input_dim() const { return input_dim_; }
  unsigned max_degree() const { return max_degree_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& operator[](std::size_t k) const { return indices_[k]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  friend bool operator==(const MultiIndexSet&, const MultiIndexSet&) = default;

 private:
  std::size_t input_dim_;
  unsigned max_degree_;
  std::vector<MultiIndex> indices_;
};

/// (N+P)! / (N! P!). Throws std::overflow_error if it does not fit in size_t.
std::size_t total_degree_cardinality(std::size_t input_dim, unsigned max_degree);

MultiIndexSet build_total_degree_set(std::size_t input_dim, unsigned max_degree);

/// Closed [lower, upper] support of one independent uniform input.
struct Range {
  double lower;
  double upper;

  friend bool operator==(const Range&, const Range&) = default;
};

/// Box-shaped support of independent uniform inputs.
class InputSpec {
 public:
  explicit InputSpec(std::vector<Range> ranges);

  std::size_t dim() const { return ranges_.size(); }
  const Range& operator[](std::size_t n) const { return ranges_[n]; }
  const std::vector<Range>& ranges() const { return ranges_; }
  std::vector<double> midpoint() const;

  friend bool operator==(const InputSpec&, const InputSpec&) = default;

 private:
  std::vector<Range> ranges_;
};

/// Slack accepted on |xi| <= 1 before a point is treated as out of box.
inline constexpr double kDomainTolerance = 1e-12;

/// Affine map of x onto [-1,1]^N. Throws DomainError naming the dimension
/// when a component is outside the box beyond kDomainTolerance; components
/// within the tolerance are clamped.
std::vector<double> to_reference(std::span<const double> x, const InputSpec& spec);

/// Inverse of to_reference (no range checking).
std::vector<double> from_reference(std::span<const double> xi, const InputSpec& spec);

/// Legendre polynomials normalized to unit variance under U(-1,1):
/// out[j] = sqrt(2j+1) P_j(xi) for j = 0..max_degree.
void orthonormal_legendre(double xi, unsigned max_degree, std::span<double> out);

/// Row of basis evaluations Psi_k(xi), k = 0..K-1, at a reference point.
/// Throws DomainError if a component lies outside [-1,1] beyond tolerance.
Eigen::VectorXd eval_basis_row(std::span<const double> xi, const MultiIndexSet& set);

/// Same as eval_basis_row, but maps from the physical box first.
Eigen::VectorXd eval_basis_at(std::span<const double> x, const InputSpec& spec,
                              const MultiIndexSet& set);

}  // namespace cpce

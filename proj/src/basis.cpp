#include "cpce/basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cpce/errors.hpp"

namespace cpce {

unsigned MultiIndex::total_degree() const {
  return std::accumulate(degrees.begin(), degrees.end(), 0u);
}

MultiIndexSet::MultiIndexSet(std::size_t input_dim, unsigned max_degree,
                             std::vector<MultiIndex> indices)
    : input_dim_(input_dim), max_degree_(max_degree), indices_(std::move(indices)) {
  if (input_dim_ == 0) {
    throw std::invalid_argument("multi-index set needs input_dim >= 1");
  }
  for (const auto& alpha : indices_) {
    if (alpha.dim() != input_dim_) {
      throw std::invalid_argument("multi-index dimension does not match input_dim");
    }
    if (alpha.total_degree() > max_degree_) {
      throw std::invalid_argument("multi-index exceeds max_degree");
    }
  }
}

std::size_t total_degree_cardinality(std::size_t input_dim, unsigned max_degree) {
  // C(N+P, P) built incrementally; every partial product is itself a binomial
  // coefficient, so the division is exact.
  std::size_t k = 1;
  for (unsigned i = 1; i <= max_degree; ++i) {
    std::size_t product = 0;
    if (__builtin_mul_overflow(k, input_dim + i, &product)) {
      throw std::overflow_error("total-degree basis size overflows size_t for N=" +
                                std::to_string(input_dim) + ", P=" + std::to_string(max_degree));
    }
    k = product / i;
  }
  return k;
}

namespace {

// Appends every alpha with |alpha|_1 == remaining over dimensions [0, last],
// with the highest dimension as the most significant ascending key.
void append_compositions(std::vector<unsigned>& current, std::size_t last, unsigned remaining,
                         std::vector<MultiIndex>& out) {
  if (last == 0) {
    current[0] = remaining;
    out.push_back(MultiIndex{current});
    return;
  }
  for (unsigned d = 0; d <= remaining; ++d) {
    current[last] = d;
    append_compositions(current, last - 1, remaining - d, out);
  }
  current[last] = 0;
}

}  // namespace

MultiIndexSet build_total_degree_set(std::size_t input_dim, unsigned max_degree) {
  if (input_dim == 0) {
    throw std::invalid_argument("build_total_degree_set: input_dim must be >= 1");
  }
  const std::size_t cardinality = total_degree_cardinality(input_dim, max_degree);
  if (cardinality > std::numeric_limits<std::size_t>::max() / (input_dim * sizeof(unsigned))) {
    throw std::overflow_error("total-degree basis too large to store");
  }

  std::vector<MultiIndex> indices;
  indices.reserve(cardinality);
  std::vector<unsigned> current(input_dim, 0);
  for (unsigned degree = 0; degree <= max_degree; ++degree) {
    append_compositions(current, input_dim - 1, degree, indices);
  }
  return MultiIndexSet(input_dim, max_degree, std::move(indices));
}

InputSpec::InputSpec(std::vector<Range> ranges) : ranges_(std::move(ranges)) {
  if (ranges_.empty()) {
    throw std::invalid_argument("InputSpec needs at least one dimension");
  }
  for (std::size_t n = 0; n < ranges_.size(); ++n) {
    const auto& r = ranges_[n];
    if (!(std::isfinite(r.lower) && std::isfinite(r.upper) && r.lower < r.upper)) {
      throw std::invalid_argument("InputSpec range " + std::to_string(n + 1) +
                                  " must satisfy lower < upper");
    }
  }
}

std::vector<double> InputSpec::midpoint() const {
  std::vector<double> mid(ranges_.size());
  for (std::size_t n = 0; n < ranges_.size(); ++n) {
    mid[n] = 0.5 * (ranges_[n].lower + ranges_[n].upper);
  }
  return mid;
}

namespace {

double checked_reference_coordinate(double xi, std::size_t n) {
  if (!(std::abs(xi) <= 1.0 + kDomainTolerance)) {
    throw DomainError("input dimension " + std::to_string(n + 1) + " outside its range");
  }
  return std::clamp(xi, -1.0, 1.0);
}

}  // namespace

std::vector<double> to_reference(std::span<const double> x, const InputSpec& spec) {
  if (x.size() != spec.dim()) {
    throw std::invalid_argument("point has " + std::to_string(x.size()) +
                                " components, expected " + std::to_string(spec.dim()));
  }
  std::vector<double> xi(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const auto& r = spec[n];
    const double mapped = 2.0 * (x[n] - r.lower) / (r.upper - r.lower) - 1.0;
    xi[n] = checked_reference_coordinate(mapped, n);
  }
  return xi;
}

std::vector<double> from_reference(std::span<const double> xi, const InputSpec& spec) {
  if (xi.size() != spec.dim()) {
    throw std::invalid_argument("reference point dimension mismatch");
  }
  std::vector<double> x(xi.size());
  for (std::size_t n = 0; n < xi.size(); ++n) {
    const auto& r = spec[n];
    x[n] = r.lower + 0.5 * (xi[n] + 1.0) * (r.upper - r.lower);
  }
  return x;
}

void orthonormal_legendre(double xi, unsigned max_degree, std::span<double> out) {
  if (out.size() < max_degree + 1u) {
    throw std::invalid_argument("orthonormal_legendre: output span too small");
  }
  // Bonnet recurrence on the standard polynomials, scaled afterwards.
  double p_prev = 1.0;
  double p_curr = xi;
  out[0] = 1.0;
  if (max_degree >= 1) out[1] = std::sqrt(3.0) * xi;
  for (unsigned j = 1; j < max_degree; ++j) {
    const double p_next = ((2.0 * j + 1.0) * xi * p_curr - j * p_prev) / (j + 1.0);
    p_prev = p_curr;
    p_curr = p_next;
    out[j + 1] = std::sqrt(2.0 * (j + 1) + 1.0) * p_curr;
  }
}

Eigen::VectorXd eval_basis_row(std::span<const double> xi, const MultiIndexSet& set) {
  const std::size_t dim = set.input_dim();
  if (xi.size() != dim) {
    throw std::invalid_argument("reference point has " + std::to_string(xi.size()) +
                                " components, basis expects " + std::to_string(dim));
  }
  const unsigned stride = set.max_degree() + 1;
  std::vector<double> table(dim * stride);
  for (std::size_t n = 0; n < dim; ++n) {
    const double clamped = checked_reference_coordinate(xi[n], n);
    orthonormal_legendre(clamped, set.max_degree(),
                         std::span<double>(table).subspan(n * stride, stride));
  }

  Eigen::VectorXd row(static_cast<Eigen::Index>(set.size()));
  for (std::size_t k = 0; k < set.size(); ++k) {
    double value = 1.0;
    const auto& degrees = set[k].degrees;
    for (std::size_t n = 0; n < dim; ++n) {
      if (degrees[n] != 0) value *= table[n * stride + degrees[n]];
    }
    row[static_cast<Eigen::Index>(k)] = value;
  }
  return row;
}

Eigen::VectorXd eval_basis_at(std::span<const double> x, const InputSpec& spec,
                              const MultiIndexSet& set) {
  if (spec.dim() != set.input_dim()) {
    throw std::invalid_argument("input spec and basis dimensions differ");
  }
  const auto xi = to_reference(x, spec);
  return eval_basis_row(xi, set);
}

}  // namespace cpce

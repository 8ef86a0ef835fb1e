#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace slsi {

enum class Family : uint8_t { MinHash, SimHash };
enum class ProjectionStyle : uint8_t { Rademacher, Gaussian };

// Hash family selector. The projection style only matters for SimHash.
struct FamilyKind {
  Family family = Family::SimHash;
  ProjectionStyle style = ProjectionStyle::Rademacher;

  bool operator==(const FamilyKind&) const = default;
};

std::string to_string(Family f);
std::string to_string(ProjectionStyle s);
Family family_from_string(const std::string& s);
ProjectionStyle style_from_string(const std::string& s);

// A client's private attribute vector: either a dense real vector in R^D or
// a set of element identifiers (for resemblance similarity).
class AttributeVector {
 public:
  static AttributeVector dense(std::vector<double> coords) {
    if (coords.empty())
      throw std::invalid_argument("dense vector needs at least one coordinate");
    for (double c : coords)
      if (!std::isfinite(c))
        throw std::invalid_argument("dense coordinates must be finite");
    AttributeVector v;
    v.dense_ = std::move(coords);
    v.is_dense_ = true;
    return v;
  }

  static AttributeVector sparse(std::vector<uint64_t> ids);

  bool is_dense() const noexcept { return is_dense_; }
  bool is_sparse() const noexcept { return !is_dense_; }

  const std::vector<double>& coords() const {
    if (!is_dense_) throw std::logic_error("not a dense vector");
    return dense_;
  }
  const std::vector<uint64_t>& elements() const {
    if (is_dense_) throw std::logic_error("not a sparse set");
    return sparse_;
  }

  size_t dim() const noexcept {
    return is_dense_ ? dense_.size() : sparse_.size();
  }

  bool operator==(const AttributeVector&) const = default;

 private:
  AttributeVector() = default;
  bool is_dense_ = true;
  std::vector<double> dense_;
  std::vector<uint64_t> sparse_;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dimension mismatch in dot product");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const std::vector<double>& a) {
  return std::sqrt(dot(a, a));
}

inline double cosine_similarity(const std::vector<double>& a,
                                const std::vector<double>& b) {
  double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0)
    throw std::invalid_argument("cosine undefined for zero vector");
  return dot(a, b) / (na * nb);
}

// Exact resemblance (Jaccard) of two sorted id sets.
double resemblance(const std::vector<uint64_t>& x,
                   const std::vector<uint64_t>& y);

}  // namespace slsi

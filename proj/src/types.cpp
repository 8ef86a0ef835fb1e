#include "slsi/types.hpp"

#include <algorithm>

namespace slsi {

std::string to_string(Family f) {
  return f == Family::MinHash ? "minhash" : "simhash";
}

std::string to_string(ProjectionStyle s) {
  return s == ProjectionStyle::Rademacher ? "rademacher" : "gaussian";
}

Family family_from_string(const std::string& s) {
  if (s == "minhash") return Family::MinHash;
  if (s == "simhash") return Family::SimHash;
  throw std::invalid_argument("unknown family: " + s);
}

ProjectionStyle style_from_string(const std::string& s) {
  if (s == "rademacher") return ProjectionStyle::Rademacher;
  if (s == "gaussian") return ProjectionStyle::Gaussian;
  throw std::invalid_argument("unknown projection style: " + s);
}

AttributeVector AttributeVector::sparse(std::vector<uint64_t> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  AttributeVector v;
  v.sparse_ = std::move(ids);
  v.is_dense_ = false;
  return v;
}

double resemblance(const std::vector<uint64_t>& x,
                   const std::vector<uint64_t>& y) {
  if (x.empty() && y.empty())
    throw std::invalid_argument("resemblance undefined for two empty sets");
  size_t i = 0, j = 0, common = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] == y[j]) {
      ++common;
      ++i;
      ++j;
    } else if (x[i] < y[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  size_t uni = x.size() + y.size() - common;
  return double(common) / double(uni);
}

}  // namespace slsi

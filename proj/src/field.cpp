#include "steer3d/field.hpp"

#include <cmath>
#include <stdexcept>

namespace steer3d {

FieldType FieldType::make(const GroupSpec& spec,
                          std::shared_ptr<const FiniteRotationGroup> group,
                          std::vector<std::pair<RepKind, int>> factors) {
  if (factors.empty()) throw std::invalid_argument("FieldType: no factors");
  FieldType f;
  f.factors = std::move(factors);
  f.rep = make_representation(spec, group, RepKind::sum(f.factors));

  int offset = 0;
  for (const auto& [kind, mult] : f.factors) {
    const int dim = make_representation(spec, group, kind).dim();
    for (int i = 0; i < mult; ++i) {
      f.instances.push_back({kind, dim, offset});
      offset += dim;
    }
  }
  if (offset != f.rep.dim()) throw std::logic_error("FieldType: dim bookkeeping broke");
  return f;
}

double FieldTensor::norm() const {
  double s = 0.0;
  for (double v : data) s += v * v;
  return std::sqrt(s);
}

FieldTensor& FieldTensor::operator+=(const FieldTensor& rhs) {
  if (data.size() != rhs.data.size()) {
    throw std::invalid_argument("FieldTensor: shape mismatch in +=");
  }
  for (size_t i = 0; i < data.size(); ++i) data[i] += rhs.data[i];
  return *this;
}

FieldTensor& FieldTensor::operator*=(double s) {
  for (double& v : data) v *= s;
  return *this;
}

}  // namespace steer3d

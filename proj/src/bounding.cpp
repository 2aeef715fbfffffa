#include "paxrl/bounding.hpp"

#include <cmath>

namespace pax {

std::string to_string(BoundingStrategy s) {
  switch (s) {
    case BoundingStrategy::Zeroing:
      return "zero";
    case BoundingStrategy::Squashing:
      return "squash";
    case BoundingStrategy::Inverting:
      return "invert";
  }
  return "invert";
}

std::optional<BoundingStrategy> bounding_from_string(std::string_view s) {
  if (s == "zero") return BoundingStrategy::Zeroing;
  if (s == "squash") return BoundingStrategy::Squashing;
  if (s == "invert") return BoundingStrategy::Inverting;
  return std::nullopt;
}

double zero_gradient(double grad, double p, double p_min, double p_max) {
  return (p_min < p && p < p_max) ? grad : 0.0;
}

double invert_gradient(double grad, double p, double p_min, double p_max) {
  const double range = p_max - p_min;
  if (grad > 0.0) return grad * (p_max - p) / range;
  if (grad < 0.0) return grad * (p - p_min) / range;
  return 0.0;
}

double squash_transform(double raw, double p_min, double p_max) {
  return p_min + (std::tanh(raw) + 1.0) / 2.0 * (p_max - p_min);
}

double squash_backward(double raw, double upstream_grad, double p_min, double p_max) {
  const double t = std::tanh(raw);
  return upstream_grad * (1.0 - t * t) * (p_max - p_min) / 2.0;
}

}  // namespace pax

#ifndef PAXRL_BOUNDING_HPP
#define PAXRL_BOUNDING_HPP

#include <optional>
#include <string>
#include <string_view>

namespace pax {

// Strategies for keeping the actor's continuous-parameter activations inside
// their bounds. Zeroing and Inverting rewrite the critic's parameter
// gradients during the actor update; Squashing reshapes the activations
// themselves through a rescaled tanh.
enum class BoundingStrategy { Zeroing, Squashing, Inverting };

std::string to_string(BoundingStrategy s);
std::optional<BoundingStrategy> bounding_from_string(std::string_view s);

// Gradients below are ASCENT directions on Q: grad > 0 suggests increasing
// the parameter. The optimizer boundary negates once for descent.

// Passes the gradient only while the activation is strictly inside its
// range; annihilates it otherwise, regardless of sign.
double zero_gradient(double grad, double p, double p_min, double p_max);

// Scales the gradient by the remaining headroom toward the bound it pushes
// against, going negative once the activation has escaped the range.
double invert_gradient(double grad, double p, double p_min, double p_max);

// tanh squashing rescaled onto (p_min, p_max), and its exact derivative
// applied to an upstream gradient.
double squash_transform(double raw, double p_min, double p_max);
double squash_backward(double raw, double upstream_grad, double p_min, double p_max);

}  // namespace pax

#endif

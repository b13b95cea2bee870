#pragma once

#include "meshmotion/mesh/mesh.hpp"

#include <functional>
#include <string>

namespace meshmotion {

enum class MaskRhs { ConstantOne, HandTuned, Custom };

struct MaskConfig {
  MaskRhs rhs = MaskRhs::HandTuned;
  std::function<double(const Vec2&)> custom;  // used with MaskRhs::Custom
  bool normalize = true;                       // scale to max nodal value 1
};

MaskRhs parse_mask_rhs(const std::string& name);
std::string mask_rhs_name(MaskRhs rhs);

// 2(x + 1)(1 - x) exp(-3.5 x^7) + 0.1
double hand_tuned_rhs(double x, double y);

/// P1 solution of -Δℓ = f, ℓ = 0 on ∂Ω. The source is scaled so that
/// ∫f = |Ω|; with `normalize` the result is scaled to max nodal value 1.
/// Throws MaskPositivityError at the first interior vertex with ℓ <= 0.
Field compute_mask(const MeshPtr& mesh, const MaskConfig& cfg = {});

}  // namespace meshmotion

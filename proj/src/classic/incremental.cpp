#include "meshmotion/classic/extension.hpp"

namespace meshmotion {

Field incremental_extend(const ExtensionFn& base, const MeshPtr& mesh, const Field& u_old,
                         const BoundaryDisplacement& g, const BoundaryDisplacement& g_old) {
  if (u_old.space() != g.space()) throw std::invalid_argument("u_old and g live in different spaces");
  const MeshPtr moved = deform(*mesh, u_old);
  const BoundaryDisplacement increment = (g - g_old).with_mesh(moved);
  const Field du = base(moved, increment);
  return u_old + rebind(du, mesh);
}

}  // namespace meshmotion

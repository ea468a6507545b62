#include "qmrom/reduction.hpp"

#include <array>

#include "qmrom/errors.hpp"
#include "qmrom/rom.hpp"
#include "qmrom/systems.hpp"

namespace qmrom {
namespace {

constexpr std::array<std::pair<Method, std::string_view>, 13> kNames{{
    {Method::linearized, "linearized"},
    {Method::qm_md, "QM-MD"},
    {Method::qm_smd, "QM-SMD"},
    {Method::qm_krysd, "QM-KrySD"},
    {Method::qm_krysd_smd, "QM-KrySD-SMD"},
    {Method::qm_smd_orth, "QM-SMD-orth"},
    {Method::qm_krysd_orth, "QM-KrySD-orth"},
    {Method::qm_kry_smd_orth, "QM-Kry-SMD-orth"},
    {Method::lb_md, "LB-MD"},
    {Method::lb_smd, "LB-SMD"},
    {Method::lb_krysd, "LB-KrySD"},
    {Method::lb_krysd_smd, "LB-KrySD-SMD"},
    {Method::full, "full"},
}};

// Half Krylov vectors (rounded up), half vibration modes, orthonormalized.
ReductionBasis mixed_basis(const StructuralModel& model, Index n, double rho) {
  const Index n_kry = (n + 1) / 2;
  const Index n_vm = n - n_kry;
  ReductionBasis kry = krylov_modes(model, model.load_pattern(), n_kry);
  if (n_vm == 0) return kry;
  ReductionBasis vm = vibration_modes(model, n_vm);
  ReductionBasis out = combine_bases(kry, vm, rho);
  out.warnings.insert(out.warnings.end(), kry.warnings.begin(), kry.warnings.end());
  out.warnings.insert(out.warnings.end(), vm.warnings.begin(), vm.warnings.end());
  return out;
}

enum class LinearPart { modes, krylov, mixed };
enum class QuadraticPart { md, smd, sd };

struct Recipe {
  LinearPart linear;
  QuadraticPart quadratic;
  bool orthogonalize;
};

Recipe recipe_of(Method m) {
  switch (m) {
    case Method::qm_md:
    case Method::lb_md: return {LinearPart::modes, QuadraticPart::md, false};
    case Method::qm_smd:
    case Method::lb_smd: return {LinearPart::modes, QuadraticPart::smd, false};
    case Method::qm_smd_orth: return {LinearPart::modes, QuadraticPart::smd, true};
    case Method::qm_krysd:
    case Method::lb_krysd: return {LinearPart::krylov, QuadraticPart::sd, false};
    case Method::qm_krysd_orth: return {LinearPart::krylov, QuadraticPart::sd, true};
    case Method::qm_krysd_smd:
    case Method::lb_krysd_smd: return {LinearPart::mixed, QuadraticPart::sd, false};
    case Method::qm_kry_smd_orth: return {LinearPart::mixed, QuadraticPart::sd, true};
    default: break;
  }
  throw InvalidArgument("method has no reduction recipe");
}

}  // namespace

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = [] {
    std::vector<Method> v;
    for (const auto& [m, name] : kNames) v.push_back(m);
    return v;
  }();
  return methods;
}

std::string_view method_name(Method m) {
  for (const auto& [method, name] : kNames) {
    if (method == m) return name;
  }
  throw InvalidArgument("unknown method enumerator");
}

Method parse_method(std::string_view name) {
  for (const auto& [method, n] : kNames) {
    if (n == name) return method;
  }
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

bool is_quadratic_manifold(Method m) {
  switch (m) {
    case Method::qm_md:
    case Method::qm_smd:
    case Method::qm_krysd:
    case Method::qm_krysd_smd:
    case Method::qm_smd_orth:
    case Method::qm_krysd_orth:
    case Method::qm_kry_smd_orth: return true;
    default: return false;
  }
}

bool is_linear_basis(Method m) {
  switch (m) {
    case Method::lb_md:
    case Method::lb_smd:
    case Method::lb_krysd:
    case Method::lb_krysd_smd: return true;
    default: return false;
  }
}

bool is_reduced(Method m) { return is_quadratic_manifold(m) || is_linear_basis(m); }

Reduction build_reduction(const StructuralModel& model, Method method, Index modes,
                          const ReductionOptions& options) {
  Reduction out;
  out.method = method;
  if (!is_reduced(method)) {
    out.reduced_dofs = model.dofs();
    out.system = std::make_unique<FullSystem>(model, method == Method::linearized);
    return out;
  }
  if (modes < 1) throw InvalidArgument("reduced methods need at least one mode");
  if (modes > model.dofs()) throw InvalidArgument("more modes than model dofs");
  out.modes = modes;

  const Recipe recipe = recipe_of(method);
  switch (recipe.linear) {
    case LinearPart::modes: out.basis = vibration_modes(model, modes); break;
    case LinearPart::krylov: out.basis = krylov_modes(model, model.load_pattern(), modes); break;
    case LinearPart::mixed:
      out.basis = mixed_basis(model, modes, options.deflation_tolerance);
      break;
  }
  out.warnings = out.basis.warnings;

  QuadTensor theta;
  switch (recipe.quadratic) {
    case QuadraticPart::md:
      theta = modal_derivatives(model, out.basis, options.finite_difference);
      break;
    case QuadraticPart::smd:
      theta = static_modal_derivatives(model, out.basis, options.finite_difference);
      break;
    case QuadraticPart::sd:
      theta = static_derivatives(model, out.basis, options.finite_difference);
      break;
  }
  if (recipe.orthogonalize) theta = orthogonalize_theta(theta, out.basis.V);

  if (is_linear_basis(method)) {
    Deflation d = deflate_basis(out.basis.V, theta, options.deflation_tolerance);
    out.singular_values = d.singular_values;
    out.reduced_dofs = d.basis.cols();
    out.system = std::make_unique<LinearBasisSystem>(model, std::move(d.basis));
  } else {
    out.reduced_dofs = out.basis.size();
    QuadraticManifold manifold(out.basis.V, theta, std::string(method_name(method)));
    out.system = std::make_unique<QuadraticManifoldSystem>(model, std::move(manifold));
  }
  out.theta = std::move(theta);
  return out;
}

}  // namespace qmrom

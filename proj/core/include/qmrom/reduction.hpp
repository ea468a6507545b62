#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmrom/basis.hpp"
#include "qmrom/fem.hpp"
#include "qmrom/integrate.hpp"
#include "qmrom/quad_tensor.hpp"

namespace qmrom {

/// Closed vocabulary of simulation methods.
enum class Method {
  linearized,
  qm_md,
  qm_smd,
  qm_krysd,
  qm_krysd_smd,
  qm_smd_orth,
  qm_krysd_orth,
  qm_kry_smd_orth,
  lb_md,
  lb_smd,
  lb_krysd,
  lb_krysd_smd,
  full,
};

const std::vector<Method>& all_methods();
std::string_view method_name(Method m);
/// Throws InvalidArgument for names outside the vocabulary.
Method parse_method(std::string_view name);

bool is_quadratic_manifold(Method m);
bool is_linear_basis(Method m);
/// True for methods that need a mode count.
bool is_reduced(Method m);

struct ReductionOptions {
  FiniteDifferenceOptions finite_difference;
  double deflation_tolerance = 1e-8;
};

/// Everything assembled to simulate one method at one mode count.
struct Reduction {
  Method method = Method::full;
  Index modes = 0;          // requested linear modes (0 for unreduced methods)
  Index reduced_dofs = 0;   // size of the simulated system
  ReductionBasis basis;     // linear basis V (empty for unreduced methods)
  std::optional<QuadTensor> theta;
  Vector singular_values;   // from deflation, LB methods only
  std::vector<std::string> warnings;
  std::unique_ptr<SecondOrderSystem> system;
};

/// Builds bases, derivatives and the resulting second-order system. The model
/// must outlive the returned system.
Reduction build_reduction(const StructuralModel& model, Method method, Index modes,
                          const ReductionOptions& options = {});

}  // namespace qmrom

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <string>

#include <qmrom/basis.hpp>
#include <qmrom/log.hpp>
#include <qmrom/reduction.hpp>
#include <qmrom/rom.hpp>
#include <qmrom/scenarios.hpp>

using namespace qmrom;

namespace {

// Models are built once per process; benchmark bodies only time the kernels.
const StructuralModel& model(const std::string& name) {
  static std::map<std::string, std::unique_ptr<StructuralModel>> cache;
  auto& slot = cache[name];
  if (!slot) slot = build_model(builtin_scenario(name));
  return *slot;
}

const char* scenario_for(int64_t arg) { return arg == 0 ? "beam_cc_desk" : "beam_cc"; }

Vector sample_state(const StructuralModel& m) {
  const Vector phi = vibration_modes(m, 1).V.col(0);
  return 1e-3 * phi / phi.cwiseAbs().maxCoeff();
}

}  // namespace

static void BM_InternalForce(benchmark::State& state) {
  const auto& m = model(scenario_for(state.range(0)));
  const Vector u = sample_state(m);
  for (auto _ : state) benchmark::DoNotOptimize(m.internal_force(u));
  state.SetLabel(std::to_string(m.dofs()) + " dofs");
}
BENCHMARK(BM_InternalForce)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

static void BM_TangentStiffness(benchmark::State& state) {
  const auto& m = model(scenario_for(state.range(0)));
  const Vector u = sample_state(m);
  for (auto _ : state) benchmark::DoNotOptimize(m.stiffness(u));
  state.SetLabel(std::to_string(m.dofs()) + " dofs");
}
BENCHMARK(BM_TangentStiffness)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

static void BM_VibrationModes(benchmark::State& state) {
  const auto& m = model("beam_cc");
  for (auto _ : state) benchmark::DoNotOptimize(vibration_modes(m, state.range(0)));
}
BENCHMARK(BM_VibrationModes)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_StaticDerivatives(benchmark::State& state) {
  const auto& m = model("beam_cc");
  const ReductionBasis modes = vibration_modes(m, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(static_derivatives(m, modes));
}
BENCHMARK(BM_StaticDerivatives)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_ModalDerivatives(benchmark::State& state) {
  const auto& m = model("beam_cc");
  const ReductionBasis modes = vibration_modes(m, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(modal_derivatives(m, modes));
}
BENCHMARK(BM_ModalDerivatives)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_QmResidual(benchmark::State& state) {
  const auto& m = model("beam_cc");
  const Index n = state.range(0);
  const ReductionBasis modes = vibration_modes(m, n);
  const QuadraticManifold qm(modes.V, static_modal_derivatives(m, modes));
  const Vector z = Vector::Constant(n, 1e-3), zd = Vector::Constant(n, 0.1), zdd = Vector::Constant(n, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(qm_residual(m, qm, z, zd, zdd, 1e-3));
}
BENCHMARK(BM_QmResidual)->Arg(5)->Arg(10)->Unit(benchmark::kMicrosecond);

static void BM_QmJacobians(benchmark::State& state) {
  const auto& m = model("beam_cc");
  const Index n = state.range(0);
  const ReductionBasis modes = vibration_modes(m, n);
  const QuadraticManifold qm(modes.V, static_modal_derivatives(m, modes));
  const Vector z = Vector::Constant(n, 1e-3), zd = Vector::Constant(n, 0.1), zdd = Vector::Constant(n, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(qm_jacobians(m, qm, z, zd, zdd, 1e-3));
}
BENCHMARK(BM_QmJacobians)->Arg(5)->Arg(10)->Unit(benchmark::kMicrosecond);

static void BM_DeskRun(benchmark::State& state) {
  const auto& cfg = builtin_scenario("beam_cc_desk");
  const auto& m = model("beam_cc_desk");
  const Method method = static_cast<Method>(state.range(0));
  log::set_sink({});
  for (auto _ : state) {
    const Reduction red = build_reduction(m, method, 10);
    benchmark::DoNotOptimize(hht_run(*red.system, cfg.integrator));
  }
  state.SetLabel(std::string(method_name(method)));
}
BENCHMARK(BM_DeskRun)
    ->Arg(static_cast<int>(Method::qm_smd))
    ->Arg(static_cast<int>(Method::lb_smd))
    ->Unit(benchmark::kMillisecond)
    ->Iterations(1);

BENCHMARK_MAIN();

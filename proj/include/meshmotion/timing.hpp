#pragma once

#include <array>
#include <chrono>

namespace meshmotion {

enum class Phase { Assembly = 0, LinearSolve = 1, NeuralNetwork = 2 };

// Wall-clock accumulators in milliseconds. "rest" is total minus the
// instrumented phases.
struct Timings {
  std::array<double, 3> phase_ms{0.0, 0.0, 0.0};
  std::array<int, 3> phase_calls{0, 0, 0};
  double total_ms = 0.0;

  double assembly_ms() const { return phase_ms[0]; }
  double linear_solve_ms() const { return phase_ms[1]; }
  double nn_ms() const { return phase_ms[2]; }
  double rest_ms() const;
};

// Installs a Timings sink for the current thread; phases entered while it is
// alive accumulate into it. Nested recorders are not supported.
class TimingRecorder {
 public:
  explicit TimingRecorder(Timings& sink);
  ~TimingRecorder();
  TimingRecorder(const TimingRecorder&) = delete;
  TimingRecorder& operator=(const TimingRecorder&) = delete;

 private:
  Timings& sink_;
  Timings* previous_;
  std::chrono::steady_clock::time_point start_;
};

// RAII phase marker. Nested scopes pause the enclosing phase so phases stay
// disjoint.
class PhaseScope {
 public:
  explicit PhaseScope(Phase phase);
  ~PhaseScope();
  PhaseScope(const PhaseScope&) = delete;
  PhaseScope& operator=(const PhaseScope&) = delete;

 private:
  void stop_clock();

  Phase phase_;
  PhaseScope* parent_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace meshmotion

#include "meshmotion/timing.hpp"

#include <algorithm>

namespace meshmotion {

namespace {
thread_local Timings* active_sink = nullptr;
thread_local PhaseScope* active_scope = nullptr;

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}
}  // namespace

double Timings::rest_ms() const {
  return std::max(0.0, total_ms - phase_ms[0] - phase_ms[1] - phase_ms[2]);
}

TimingRecorder::TimingRecorder(Timings& sink)
    : sink_(sink), previous_(active_sink), start_(std::chrono::steady_clock::now()) {
  active_sink = &sink_;
}

TimingRecorder::~TimingRecorder() {
  sink_.total_ms += elapsed_ms(start_);
  active_sink = previous_;
}

PhaseScope::PhaseScope(Phase phase)
    : phase_(phase), parent_(active_scope), start_(std::chrono::steady_clock::now()) {
  if (parent_ != nullptr) parent_->stop_clock();
  active_scope = this;
  if (active_sink != nullptr) ++active_sink->phase_calls[static_cast<int>(phase_)];
}

void PhaseScope::stop_clock() {
  if (active_sink != nullptr) active_sink->phase_ms[static_cast<int>(phase_)] += elapsed_ms(start_);
}

PhaseScope::~PhaseScope() {
  stop_clock();
  active_scope = parent_;
  if (parent_ != nullptr) parent_->start_ = std::chrono::steady_clock::now();
}

}  // namespace meshmotion

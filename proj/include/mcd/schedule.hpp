/* Copyright 2026 The mcd-lstm Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef MCD_SCHEDULE_HPP_
#define MCD_SCHEDULE_HPP_

// Discrete-event simulation of the layer pipeline.
//
// Timing rules:
//  * A layer issues one time step every II cycles, in (pass, step) order.
//  * A step issued at cycle s completes at s + IL. Its hidden state streams
//    out during the last II cycles, so the next layer may issue the same
//    step at s + IL - II.
//  * Autoencoder: the first decoder layer waits until the last encoder layer
//    has completed step T of the same pass; the cached encoding then feeds
//    all T decoder steps.
//  * Each Bayesian layer owns a Bernoulli sampler holding masks for one
//    pass. Masks for the first pass are sampled before cycle 0. Sampling
//    for pass p+1 starts once pass p has latched its masks (first step
//    issued) and takes ceil(mask_bits / bits_per_cycle) cycles; a pass cannot
//    start on a layer before its masks are ready.
//  * Layers never stall on their own recurrence: the feedback path fits
//    inside one II.

#include <algorithm>
#include <cstdint>
#include <queue>
#include <vector>

#include "mcd/arch.hpp"
#include "mcd/error.hpp"
#include "mcd/hwmodel.hpp"

namespace mcd {

struct ScheduleLayer {
  std::int64_t il = 1;
  std::int64_t mask_bits = 0;  // 0 for a pointwise layer
};

struct ScheduleSpec {
  Task task = Task::kClassifier;
  std::int64_t ii = 1;
  std::int64_t seq_len = 1;
  std::vector<ScheduleLayer> layers;  // encoder then decoder for autoencoders
  std::int64_t sampler_bits_per_cycle = 1;
};

struct ScheduleEvent {
  enum Kind { kIssue, kDone, kMasksReady };
  Kind kind;
  std::int64_t time;
  int layer;
  std::int64_t pass;
  std::int64_t step;  // -1 for kMasksReady
};

struct ScheduleResult {
  std::int64_t makespan = 0;
  std::vector<std::int64_t> pass_done;  // completion cycle per pass
  std::vector<ScheduleEvent> trace;     // issue/done/mask events in time order
};

namespace detail {

class PipelineSim {
 public:
  PipelineSim(const ScheduleSpec& spec, std::int64_t passes, bool trace)
      : spec_(spec),
        passes_(passes),
        T_(spec.seq_len),
        L_(static_cast<int>(spec.layers.size())),
        record_(trace) {
    const std::int64_t items = passes_ * T_;
    ready_.assign(L_, std::vector<char>(static_cast<std::size_t>(items), 0));
    masks_ready_.assign(L_, std::vector<char>(static_cast<std::size_t>(passes_), 0));
    next_.assign(L_, 0);
    free_at_.assign(L_, 0);
    sampler_busy_.assign(L_, 0);
    result_.pass_done.assign(static_cast<std::size_t>(passes_), 0);
    encoder_last_ = spec.task == Task::kAutoencoder ? L_ / 2 - 1 : -1;
  }

  ScheduleResult run() {
    for (int l = 0; l < L_; ++l) {
      if (spec_.layers[l].mask_bits == 0) {
        std::fill(masks_ready_[l].begin(), masks_ready_[l].end(), 1);
      } else {
        masks_ready_[l][0] = 1;
      }
    }
    std::fill(ready_[0].begin(), ready_[0].end(), 1);
    push(0, Ev::kWake, 0, 0, 0);
    while (!queue_.empty()) {
      const Event e = queue_.top();
      queue_.pop();
      handle(e);
    }
    for (std::int64_t k : next_) {
      require(k == passes_ * T_, "pipeline simulation deadlocked");
    }
    return std::move(result_);
  }

 private:
  enum class Ev { kWake, kInputReady, kStreamOut, kDone, kMasksReady };

  struct Event {
    std::int64_t time;
    std::uint64_t seq;
    Ev kind;
    int layer;
    std::int64_t pass;
    std::int64_t step;
    bool operator>(const Event& o) const {
      return time != o.time ? time > o.time : seq > o.seq;
    }
  };

  void push(std::int64_t time, Ev kind, int layer, std::int64_t pass,
            std::int64_t step) {
    queue_.push(Event{time, seq_++, kind, layer, pass, step});
  }

  void log(ScheduleEvent::Kind kind, std::int64_t time, int layer,
           std::int64_t pass, std::int64_t step) {
    if (record_) result_.trace.push_back({kind, time, layer, pass, step});
  }

  void handle(const Event& e) {
    switch (e.kind) {
      case Ev::kWake:
        break;
      case Ev::kInputReady:
        ready_[e.layer][static_cast<std::size_t>(e.pass * T_ + e.step)] = 1;
        break;
      case Ev::kMasksReady:
        masks_ready_[e.layer][static_cast<std::size_t>(e.pass)] = 1;
        log(ScheduleEvent::kMasksReady, e.time, e.layer, e.pass, -1);
        break;
      case Ev::kStreamOut:
        if (e.layer + 1 < L_ && e.layer != encoder_last_) {
          push(e.time, Ev::kInputReady, e.layer + 1, e.pass, e.step);
        }
        break;
      case Ev::kDone:
        log(ScheduleEvent::kDone, e.time, e.layer, e.pass, e.step);
        if (e.layer == encoder_last_ && e.step == T_ - 1) {
          // The encoding is cached and replayed for every decoder step.
          for (std::int64_t t = 0; t < T_; ++t) {
            push(e.time, Ev::kInputReady, e.layer + 1, e.pass, t);
          }
        }
        if (e.layer == L_ - 1) {
          result_.makespan = std::max(result_.makespan, e.time);
          if (e.step == T_ - 1) result_.pass_done[e.pass] = e.time;
        }
        break;
    }
    try_issue(e.layer, e.time);
  }

  void try_issue(int l, std::int64_t now) {
    const std::int64_t k = next_[l];
    if (k >= passes_ * T_) return;
    const std::int64_t pass = k / T_;
    const std::int64_t step = k % T_;
    if (!ready_[l][static_cast<std::size_t>(k)] || now < free_at_[l] ||
        !masks_ready_[l][static_cast<std::size_t>(pass)]) {
      return;
    }
    const auto& layer = spec_.layers[l];
    ++next_[l];
    free_at_[l] = now + spec_.ii;
    log(ScheduleEvent::kIssue, now, l, pass, step);
    push(now + spec_.ii, Ev::kWake, l, pass, step);
    push(now + layer.il - spec_.ii, Ev::kStreamOut, l, pass, step);
    push(now + layer.il, Ev::kDone, l, pass, step);
    if (step == 0 && layer.mask_bits > 0 && pass + 1 < passes_) {
      const std::int64_t start = std::max(now, sampler_busy_[l]);
      const std::int64_t done =
          start + ceil_div(layer.mask_bits, spec_.sampler_bits_per_cycle);
      sampler_busy_[l] = done;
      push(done, Ev::kMasksReady, l, pass + 1, -1);
    }
  }

  const ScheduleSpec& spec_;
  std::int64_t passes_;
  std::int64_t T_;
  int L_;
  bool record_;
  int encoder_last_;
  std::vector<std::vector<char>> ready_;
  std::vector<std::vector<char>> masks_ready_;
  std::vector<std::int64_t> next_;
  std::vector<std::int64_t> free_at_;
  std::vector<std::int64_t> sampler_busy_;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
  std::uint64_t seq_ = 0;
  ScheduleResult result_;
};

}  // namespace detail

inline ScheduleResult simulate_schedule(const ScheduleSpec& spec,
                                        std::int64_t passes,
                                        bool record_trace = false) {
  detail::require(spec.ii >= 1 && spec.seq_len >= 1 && passes >= 1,
                  "schedule needs II, T and pass count >= 1");
  detail::require(!spec.layers.empty(), "schedule needs at least one layer");
  detail::require(spec.sampler_bits_per_cycle >= 1,
                  "sampler must emit at least one bit per cycle");
  if (spec.task == Task::kAutoencoder) {
    detail::require(spec.layers.size() % 2 == 0,
                    "autoencoder needs an even layer count");
  }
  for (const auto& l : spec.layers) {
    detail::require(l.il >= spec.ii, "every layer needs IL >= II");
    detail::require(l.mask_bits >= 0, "mask bit count must be >= 0");
  }
  return detail::PipelineSim(spec, passes, record_trace).run();
}

// Builds the schedule for a concrete design (II balanced across layers) and
// returns the makespan for n_inputs * S passes.
inline ScheduleSpec schedule_spec(const Arch& arch, Task task,
                                  const ModelDims& dims, const HwConfig& hw) {
  const auto plan = layer_plan(task, arch, dims.input_size);
  const auto ii = ii_estimate(plan, hw);
  const auto il = il_estimate(plan.size(), ii.design, hw);
  ScheduleSpec spec;
  spec.task = task;
  spec.ii = ii.design;
  spec.seq_len = dims.seq_len;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const std::int64_t bits =
        arch.is_bayesian(k) ? 4 * (plan[k].input + plan[k].hidden) : 0;
    spec.layers.push_back({il[k], bits});
  }
  return spec;
}

inline std::int64_t simulate_schedule(const Arch& arch, Task task,
                                      const ModelDims& dims, const HwConfig& hw,
                                      std::int64_t samples,
                                      std::int64_t n_inputs) {
  detail::require(samples >= 1 && n_inputs >= 1, "S and input count must be >= 1");
  return simulate_schedule(schedule_spec(arch, task, dims, hw), samples * n_inputs)
      .makespan;
}

}  // namespace mcd

#endif  // MCD_SCHEDULE_HPP_

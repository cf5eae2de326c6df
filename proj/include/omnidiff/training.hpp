#pragma once

#include <array>
#include <functional>
#include <map>
#include <vector>

#include "omnidiff/corruption.hpp"
#include "omnidiff/loss.hpp"
#include "omnidiff/net.hpp"
#include "omnidiff/optim.hpp"
#include "omnidiff/toyworld.hpp"

namespace omnidiff {

struct StageConfig {
    int stage_id = 1;  // 1|2|3
    std::vector<std::pair<TaskTag, double>> task_mixture;
    double learning_rate = 1e-4;
    std::size_t iterations = 0;
    double pad_attenuation = 0.6;   // gamma
    std::size_t max_tail_pads = 8;
    std::size_t batch_size = 32;
    std::size_t log_interval = 100;
    // Prompts are protected from masking by default; flag exposed because the
    // supervised-stage treatment of conditioning tokens is a judgement call.
    bool protect_prompts = true;
    // Canonical 1/t importance weighting, off by default (the printed loss
    // carries none).
    bool time_weighting = false;
    LossNorm loss_norm = LossNorm::Mean;
    // Probability of truncating a speech-to-text response to the adaptive
    // region length (0.2x the speech length) so the decode-time layout,
    // which always undershoots the true text length, is in-distribution.
    double asr_truncation = 0.5;

    void validate() const;
};

struct MetricsRecord {
    int stage = 0;
    std::int64_t step = 0;
    double loss = 0.0;
    std::size_t masked_count = 0;
    std::size_t pad_masked_count = 0;
    double lr = 0.0;
    double wallclock_ms = 0.0;
};

std::string metrics_to_json(const MetricsRecord& r);

using Datasets = std::map<TaskTag, std::vector<PairedSample>>;
using MetricsSink = std::function<void(const MetricsRecord&)>;
using StageEndHook = std::function<void(int stage, NetParams<float>&)>;

// Draws batch_size training sequences, tasks i.i.d. by mixture weight.
std::vector<TrainingSequence> mixture_sampler(const StageConfig& stage, const Datasets& datasets,
                                              const ToyWorldConfig& world,
                                              const Vocabulary& vocab, Rng& rng);

// One full stage: batch -> tail pads -> time -> corrupt -> forward -> masked
// CE -> backward -> AdamW, with a metrics record per log interval.
void run_stage(const StageConfig& stage, NetParams<float>& params, const Datasets& datasets,
               const ToyWorldConfig& world, const Vocabulary& vocab, Rng& rng,
               const MetricsSink& sink = nullptr);

// Stages 1, 2, 3 in order, carrying parameters. Each stage gets its own rng
// stream and a fresh optimizer, so a run resumed from a stage checkpoint
// (params loaded, first_stage set past the completed stages) reproduces the
// remaining stages bitwise.
void run_pipeline(const std::array<StageConfig, 3>& stages, NetParams<float>& params,
                  const Datasets& datasets, const ToyWorldConfig& world,
                  const Vocabulary& vocab, std::uint64_t seed,
                  const MetricsSink& sink = nullptr, const StageEndHook& on_stage_end = nullptr,
                  int first_stage = 1);

}  // namespace omnidiff

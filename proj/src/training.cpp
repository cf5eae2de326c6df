#include "omnidiff/training.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "omnidiff/errors.hpp"
#include "omnidiff/sampler.hpp"

namespace omnidiff {

void StageConfig::validate() const {
    if (stage_id < 1 || stage_id > 3) throw ConfigError("stage id must be 1, 2 or 3");
    if (learning_rate <= 0.0) throw ConfigError("learning rate must be > 0");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (task_mixture.empty()) throw ConfigError("stage task mixture is empty");
    double total = 0.0;
    for (const auto& [task, w] : task_mixture) {
        if (w <= 0.0) throw ConfigError("mixture weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("mixture weights must sum to 1");
    if (pad_attenuation <= 0.0 || pad_attenuation > 1.0)
        throw ConfigError("pad attenuation must lie in (0, 1]");
    if (asr_truncation < 0.0 || asr_truncation > 1.0)
        throw ConfigError("asr truncation probability must lie in [0, 1]");
}

std::string metrics_to_json(const MetricsRecord& r) {
    std::ostringstream out;
    out << "{\"stage\":" << r.stage << ",\"step\":" << r.step << ",\"loss\":" << r.loss
        << ",\"masked_count\":" << r.masked_count
        << ",\"pad_masked_count\":" << r.pad_masked_count << ",\"lr\":" << r.lr
        << ",\"wallclock_ms\":" << r.wallclock_ms << "}";
    return out.str();
}

std::vector<TrainingSequence> mixture_sampler(const StageConfig& stage, const Datasets& datasets,
                                              const ToyWorldConfig& world,
                                              const Vocabulary& vocab, Rng& rng) {
    stage.validate();
    std::vector<double> weights;
    for (const auto& [task, w] : stage.task_mixture) {
        auto it = datasets.find(task);
        if (it == datasets.end() || it->second.empty())
            throw ConfigError(std::string("no dataset for task ") + task_name(task));
        weights.push_back(w);
    }
    std::vector<TrainingSequence> batch;
    batch.reserve(stage.batch_size);
    for (std::size_t b = 0; b < stage.batch_size; ++b) {
        const std::size_t pick = rng.categorical(weights);
        const auto& pool = datasets.at(stage.task_mixture[pick].first);
        const auto& sample = pool[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
        TrainingSequence ts;
        if (sample.task == TaskTag::ASR && rng.bernoulli(stage.asr_truncation)) {
            // Mirror the decode-time layout: the adaptive text region is
            // shorter than the true transcript, so train on the prefix.
            PairedSample truncated = sample;
            const std::size_t speech_len = truncated.prompt.at(0).second.size();
            const std::size_t region = adaptive_init_length(SpeechTask::ASR, speech_len);
            auto& text = truncated.response.at(0).second;
            if (region < text.size()) text.resize(region);
            ts = to_training_sequence(truncated, world, vocab);
        } else {
            ts = to_training_sequence(sample, world, vocab);
        }
        if (!stage.protect_prompts) ts.protected_positions.clear();
        batch.push_back(std::move(ts));
    }
    return batch;
}

void run_stage(const StageConfig& stage, NetParams<float>& params, const Datasets& datasets,
               const ToyWorldConfig& world, const Vocabulary& vocab, Rng& rng,
               const MetricsSink& sink) {
    stage.validate();
    auto opt = OptimizerState<float>::make(params);
    const auto t0 = std::chrono::steady_clock::now();

    for (std::size_t iter = 0; iter < stage.iterations; ++iter) {
        auto batch = mixture_sampler(stage, datasets, world, vocab, rng);
        NetParams<float> grads = zero_like(params);
        double batch_loss = 0.0;
        std::size_t batch_masked = 0, batch_pad_masked = 0, contributing = 0;

        for (auto& ts : batch) {
            UnifiedSequence padded = append_tail_pads(ts.seq, rng, stage.max_tail_pads, vocab);
            MaskPlan plan;
            plan.base_ratio = mask_ratio(sample_time(rng));
            plan.pad_attenuation = stage.pad_attenuation;
            plan.protected_positions = ts.protected_positions;
            CorruptedSequence xt = corrupt(padded, plan, vocab, rng);
            if (xt.mask_positions.empty()) continue;

            ForwardCache<float> cache;
            auto logits = denoiser_forward(params, xt.tokens, &cache);
            Eigen::MatrixXf dlogits;
            auto report = masked_ce_loss(logits, padded.tokens, xt.mask_positions, vocab,
                                         &dlogits, stage.loss_norm);
            double weight = 1.0;
            if (stage.time_weighting) weight = 1.0 / std::max(xt.t, 1e-3);
            dlogits *= static_cast<float>(weight);
            denoiser_backward(params, cache, dlogits, grads);
            batch_loss += report.total * weight;
            batch_masked += report.masked_count;
            batch_pad_masked += report.pad_masked_count;
            ++contributing;
        }
        if (contributing == 0) continue;
        // Mean over contributing sequences.
        const float inv = 1.0f / static_cast<float>(contributing);
        for (auto& [name, g] : tensor_list(grads)) *g *= inv;
        try {
            adamw_step(params, grads, opt, stage.learning_rate);
        } catch (const DivergenceError& e) {
            throw DivergenceError(std::string(e.what()) + " at stage " +
                                  std::to_string(stage.stage_id) + " step " +
                                  std::to_string(iter));
        }

        if (sink && ((iter + 1) % stage.log_interval == 0 || iter + 1 == stage.iterations)) {
            MetricsRecord rec;
            rec.stage = stage.stage_id;
            rec.step = static_cast<std::int64_t>(iter + 1);
            rec.loss = batch_loss / static_cast<double>(contributing);
            rec.masked_count = batch_masked;
            rec.pad_masked_count = batch_pad_masked;
            rec.lr = stage.learning_rate;
            rec.wallclock_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
            sink(rec);
        }
    }
}

void run_pipeline(const std::array<StageConfig, 3>& stages, NetParams<float>& params,
                  const Datasets& datasets, const ToyWorldConfig& world,
                  const Vocabulary& vocab, std::uint64_t seed, const MetricsSink& sink,
                  const StageEndHook& on_stage_end, int first_stage) {
    for (int i = 0; i < 3; ++i)
        if (stages[static_cast<std::size_t>(i)].stage_id != i + 1)
            throw ConfigError("pipeline stages must be 1, 2, 3 in order");
    if (first_stage < 1 || first_stage > 3) throw ConfigError("first stage must be 1, 2 or 3");
    for (const auto& stage : stages) {
        if (stage.stage_id < first_stage) continue;
        Rng stage_rng(seed ^ (0x51700000ULL + static_cast<std::uint64_t>(stage.stage_id)));
        run_stage(stage, params, datasets, world, vocab, stage_rng, sink);
        if (on_stage_end) on_stage_end(stage.stage_id, params);
    }
}

}  // namespace omnidiff

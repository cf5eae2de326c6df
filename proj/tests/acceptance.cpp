// Acceptance gate: nine end-to-end checks covering forward-process statistics,
// gradient correctness, oracle-exact decoding, inpainting, the staged training
// pipeline, the position penalty, step-count robustness, pre-infilling and the
// scheduler invariant suite. Prints one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <vector>

#include "omnidiff/checkpoint.hpp"
#include "omnidiff/corruption.hpp"
#include "omnidiff/loss.hpp"
#include "omnidiff/net.hpp"
#include "omnidiff/oracle.hpp"
#include "omnidiff/tasks.hpp"
#include "omnidiff/training.hpp"

using namespace omnidiff;

namespace {

int g_failures = 0;

class Timer {
public:
    Timer() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

void report(int criterion, bool pass, const std::string& detail, double secs) {
    std::printf("[%s] criterion %d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", criterion,
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Forward-process statistics.

void criterion1() {
    Timer timer;
    const auto vocab = build_vocabulary({8, 8, 8});
    // 48 content tokens (with delimiters) plus 16 tail pads = 64 positions.
    std::vector<TokenId> content;
    for (int i = 0; i < 46; ++i)
        content.push_back(vocab.text_range().begin + static_cast<TokenId>(i % 8));
    auto seq = assemble_sequence({{Modality::Text, content}}, vocab);
    seq.tokens.insert(seq.tokens.end(), 16, vocab.pad());

    MaskPlan plan;
    plan.base_ratio = 0.5;
    plan.pad_attenuation = 0.6;
    Rng rng(100);
    const int n = 100000;
    std::vector<int> counts(seq.tokens.size(), 0);
    for (int i = 0; i < n; ++i) {
        const auto xt = corrupt(seq, plan, vocab, rng);
        for (std::size_t p : xt.mask_positions) ++counts[p];
    }
    double worst_nonpad = 0.0, worst_pad = 0.0;
    for (std::size_t p = 0; p < seq.tokens.size(); ++p) {
        const double rate = static_cast<double>(counts[p]) / n;
        if (seq.tokens[p] == vocab.pad())
            worst_pad = std::max(worst_pad, std::abs(rate - 0.30));
        else
            worst_nonpad = std::max(worst_nonpad, std::abs(rate - 0.50));
    }
    const double secs = timer.seconds();
    const bool pass = worst_nonpad < 0.01 && worst_pad < 0.01 && secs < 10.0;
    report(1, pass,
           fmt("per-position rate dev %.4f (<0.01), pad rate dev %.4f (<0.01)", worst_nonpad,
               worst_pad),
           secs);
}

// ---------------------------------------------------------------------------
// 2. Gradient check in double precision.

void criterion2() {
    Timer timer;
    const auto vocab = build_vocabulary({4, 4, 4});
    NetHyper hyper;
    hyper.layers = 2;
    hyper.d = 16;
    hyper.heads = 4;
    hyper.vocab_size = vocab.total_size();
    hyper.max_len = 8;

    double worst = 0.0;
    const double h = 1e-3;
    for (int draw = 0; draw < 5; ++draw) {
        Rng rng(200 + static_cast<std::uint64_t>(draw));
        auto params = init_params<double>(hyper, rng);
        std::vector<TokenId> clean(8), corrupted(8);
        for (auto& t : clean)
            t = static_cast<TokenId>(rng.uniform_int(Vocabulary::kNumSpecials,
                                                     vocab.total_size() - 1));
        corrupted = clean;
        std::vector<std::size_t> masks;
        for (std::size_t i = 0; i < 8; ++i)
            if (rng.bernoulli(0.5)) {
                corrupted[i] = vocab.mask();
                masks.push_back(i);
            }
        if (masks.empty()) {
            corrupted[3] = vocab.mask();
            masks.push_back(3);
        }

        ForwardCache<double> cache;
        const auto logits = denoiser_forward(params, corrupted, &cache);
        Eigen::MatrixXd dlogits;
        masked_ce_loss(logits, clean, masks, vocab, &dlogits);
        auto grads = zero_like(params);
        denoiser_backward(params, cache, dlogits, grads);

        auto loss_of = [&]() {
            return masked_ce_loss(denoiser_forward(params, corrupted), clean, masks, vocab)
                .total;
        };
        auto ptensors = tensor_list(params);
        auto gtensors = tensor_list(grads);
        for (std::size_t t = 0; t < ptensors.size(); ++t) {
            auto& mat = *ptensors[t].second;
            for (Eigen::Index j = 0; j < mat.cols(); ++j) {
                for (Eigen::Index i = 0; i < mat.rows(); ++i) {
                    const double orig = mat(i, j);
                    mat(i, j) = orig + h;
                    const double up = loss_of();
                    mat(i, j) = orig - h;
                    const double dn = loss_of();
                    mat(i, j) = orig;
                    const double fd = (up - dn) / (2.0 * h);
                    const double an = (*gtensors[t].second)(i, j);
                    const double rel =
                        std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
                    worst = std::max(worst, rel);
                }
            }
        }
    }
    const double secs = timer.seconds();
    report(2, worst < 1e-4 && secs < 60.0,
           fmt("max relative gradient error %.2e (<1e-4) over 5 draws", worst), secs);
}

// ---------------------------------------------------------------------------
// 3. Exact decoding against the enumeration oracle.

DenoiserFn oracle_denoiser(const OracleModel& oracle, const Vocabulary& vocab) {
    return [&oracle, &vocab](const std::vector<TokenId>& tokens) {
        return oracle_posterior(oracle, tokens, vocab.mask()).cast<float>().eval();
    };
}

void criterion3() {
    Timer timer;
    const auto world = ToyWorldConfig::make_default(2, 2, 2, 2, 1, 2);
    const auto vocab = build_vocabulary(world.modality_sizes());
    const auto oracle = joint_distribution(TaskTag::TTS, world, vocab);
    const std::size_t L = oracle.support[0].size();
    const auto denoiser = oracle_denoiser(oracle, vocab);

    const int n = 50000;
    std::vector<std::vector<TokenId>> samples;
    samples.reserve(n);
    for (int i = 0; i < n; ++i) {
        DecodeConfig cfg;
        cfg.steps = L;  // one committed token per step
        cfg.temperature = 1.0;
        cfg.ranking = Ranking::Random;
        cfg.seed = 300 + static_cast<std::uint64_t>(i);
        samples.push_back(
            decode(denoiser, DecodeState::fresh(L, vocab), cfg, vocab).tokens);
    }
    const double tv = total_variation(samples, oracle);
    const double secs = timer.seconds();
    report(3, tv <= 0.05 && secs < 300.0,
           fmt("TV %.4f (<=0.05), support %.0f, 5e4 any-order decodes", tv,
               static_cast<double>(oracle.support.size())),
           secs);
}

// ---------------------------------------------------------------------------
// 4. Inpainting posterior.

void criterion4() {
    Timer timer;
    const auto world = ToyWorldConfig::make_default(3, 2, 3, 4, 1, 1);
    const auto vocab = build_vocabulary(world.modality_sizes());
    const auto oracle = joint_distribution(TaskTag::T2I, world, vocab);
    const auto denoiser = oracle_denoiser(oracle, vocab);

    // Base evidence: a support element built from a length-3 text (its EOT sits
    // at position 4).
    std::size_t base_idx = 0;
    for (std::size_t i = 0; i < oracle.support.size(); ++i)
        if (oracle.support[i][4] == vocab.eot(Modality::Text)) base_idx = i;
    auto partial = oracle.support[base_idx];
    // Mask the text content and the bottom half of the image segment.
    const auto segments = parse_sequence(partial, vocab);
    const auto& image_seg = segments[1];
    for (std::size_t p = 1; p <= 3; ++p) partial[p] = vocab.mask();
    for (std::size_t p = 8; p < 16; ++p) partial[image_seg.start + p] = vocab.mask();

    // Brute-force posterior: filter the joint by the unmasked evidence.
    OracleModel posterior;
    posterior.vocab_size = oracle.vocab_size;
    double z = 0.0;
    for (std::size_t i = 0; i < oracle.support.size(); ++i) {
        bool ok = true;
        for (std::size_t p = 0; p < partial.size() && ok; ++p)
            if (partial[p] != vocab.mask() && oracle.support[i][p] != partial[p]) ok = false;
        if (!ok) continue;
        posterior.support.push_back(oracle.support[i]);
        posterior.probs.push_back(oracle.probs[i]);
        z += oracle.probs[i];
    }
    for (auto& p : posterior.probs) p /= z;

    const int n = 50000;
    std::vector<std::vector<TokenId>> samples;
    samples.reserve(n);
    bool preserved = true;
    for (int i = 0; i < n; ++i) {
        DecodeConfig cfg;
        cfg.steps = 11;  // 3 text + 8 image masks, one per step
        cfg.temperature = 1.0;
        cfg.ranking = Ranking::Random;
        cfg.seed = 400 + static_cast<std::uint64_t>(i);
        const auto result = inpaint(partial, denoiser, cfg, vocab);
        for (std::size_t p = 0; p < partial.size(); ++p)
            if (partial[p] != vocab.mask() && result.tokens[p] != partial[p])
                preserved = false;
        samples.push_back(result.tokens);
    }
    const double tv = total_variation(samples, posterior);
    const double secs = timer.seconds();
    report(4, tv <= 0.05 && preserved,
           fmt("TV %.4f (<=0.05) vs %.0f-element posterior, evidence preserved: %.0f", tv,
               static_cast<double>(posterior.support.size()), preserved ? 1.0 : 0.0),
           secs);
}

// ---------------------------------------------------------------------------
// 5-8 share one trained pipeline.

struct TrainedModel {
    ToyWorldConfig world;
    Vocabulary vocab;
    NetParams<float> params;
    double train_minutes = 0.0;
};

TrainedModel train_pipeline() {
    TrainedModel m{ToyWorldConfig::make_default(6, 3, 6, 8, 3, 4),
                   build_vocabulary(ToyWorldConfig::make_default(6, 3, 6, 8, 3, 4)
                                        .modality_sizes()),
                   {},
                   0.0};
    Timer timer;
    Rng data_rng(1001);
    Datasets data;
    const std::vector<std::pair<TaskTag, std::size_t>> sizes = {
        {TaskTag::T2I, 512}, {TaskTag::I2T, 512}, {TaskTag::TTS, 512},
        {TaskTag::ASR, 512}, {TaskTag::SQA, 512}, {TaskTag::SVQA, 256},
        {TaskTag::S2I, 256}};
    for (const auto& [task, n] : sizes)
        data[task] = make_dataset(task, n, m.world, m.vocab, data_rng);

    NetHyper hyper;
    hyper.layers = 2;
    hyper.d = 64;
    hyper.heads = 4;
    hyper.vocab_size = m.vocab.total_size();
    hyper.max_len = 224;
    Rng init_rng(2002);
    m.params = init_params<float>(hyper, init_rng);

    std::array<StageConfig, 3> stages;
    stages[0].stage_id = 1;
    stages[0].task_mixture = {{TaskTag::T2I, 0.5}, {TaskTag::I2T, 0.5}};
    stages[0].iterations = 3000;
    stages[0].learning_rate = 1e-4;
    stages[1].stage_id = 2;
    stages[1].task_mixture = {{TaskTag::T2I, 0.1}, {TaskTag::I2T, 0.1}, {TaskTag::TTS, 0.2},
                              {TaskTag::ASR, 0.3}, {TaskTag::SQA, 0.3}};
    stages[1].iterations = 10000;
    stages[1].learning_rate = 1e-4;
    stages[2].stage_id = 3;
    stages[2].task_mixture = {{TaskTag::T2I, 0.1},  {TaskTag::I2T, 0.1},
                              {TaskTag::TTS, 0.15}, {TaskTag::ASR, 0.2},
                              {TaskTag::SQA, 0.15}, {TaskTag::SVQA, 0.15},
                              {TaskTag::S2I, 0.15}};
    stages[2].iterations = 3000;
    stages[2].learning_rate = 1e-5;
    for (auto& st : stages) {
        st.batch_size = 16;
        st.log_interval = 1000;
    }
    run_pipeline(stages, m.params, data, m.world, m.vocab, 2024, [](const MetricsRecord& r) {
        std::printf("  stage %d step %lld loss %.4f\n", r.stage,
                    static_cast<long long>(r.step), r.loss);
        std::fflush(stdout);
    });
    m.train_minutes = timer.seconds() / 60.0;
    return m;
}

void criterion5(const TrainedModel& m) {
    Timer timer;
    const auto denoiser = make_denoiser(m.params);

    // Held-out ASR: adaptive 0.2x regions are shorter than the text, so
    // accuracy is measured on the decoded prefix against the reference prefix.
    Rng asr_rng(5005);
    const auto asr = make_dataset(TaskTag::ASR, 200, m.world, m.vocab, asr_rng);
    std::size_t matches = 0, total = 0;
    for (std::size_t i = 0; i < asr.size(); ++i) {
        auto plan = plan_response(TaskTag::ASR, asr[i].prompt, m.world, m.vocab);
        DecodeConfig cfg;
        cfg.steps = plan.state.remaining_masks();
        cfg.temperature = 0.0;
        cfg.seed = 500 + i;
        const auto response =
            extract_response(plan, decode(denoiser, plan.state, cfg, m.vocab,
                                          plan.gen_segment));
        const auto& ref = asr[i].response[0].second;
        const std::size_t k = std::min(response.size(), ref.size());
        for (std::size_t j = 0; j < k; ++j)
            if (response[j] == ref[j]) ++matches;
        total += k;
    }
    const double asr_acc = static_cast<double>(matches) / static_cast<double>(total);

    // Held-out TTS: exact match up to duration ambiguity.
    Rng tts_rng(6006);
    const auto tts = make_dataset(TaskTag::TTS, 100, m.world, m.vocab, tts_rng);
    std::size_t exact = 0;
    for (std::size_t i = 0; i < tts.size(); ++i) {
        auto plan = plan_response(TaskTag::TTS, tts[i].prompt, m.world, m.vocab);
        DecodeConfig cfg;
        cfg.steps = plan.state.remaining_masks();
        cfg.temperature = 0.0;
        cfg.seed = 600 + i;
        const auto response =
            extract_response(plan, decode(denoiser, plan.state, cfg, m.vocab,
                                          plan.gen_segment));
        try {
            if (speech_to_text(response, m.world, m.vocab) == tts[i].prompt[0].second) ++exact;
        } catch (const Error&) {
        }
    }
    const double tts_match = static_cast<double>(exact) / static_cast<double>(tts.size());

    const bool pass = asr_acc >= 0.95 && tts_match >= 0.90 && m.train_minutes <= 30.0;
    report(5, pass,
           fmt("ASR prefix accuracy %.3f (>=0.95), TTS match %.3f (>=0.90), train %.1f min "
               "(<=30)",
               asr_acc, tts_match, m.train_minutes),
           timer.seconds());
}

void criterion6(const TrainedModel& m) {
    Timer timer;
    const auto denoiser = make_denoiser(m.params);
    Rng prompt_rng(7007);
    const auto prompts = make_dataset(TaskTag::T2I, 200, m.world, m.vocab, prompt_rng);
    const std::size_t grid = static_cast<std::size_t>(m.world.grid_side) * m.world.grid_side;

    int wins = 0, losses = 0;
    double mean_pen = 0.0, mean_plain = 0.0;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        auto run = [&](double gamma_p) {
            auto plan = plan_response(TaskTag::T2I, prompts[i].prompt, m.world, m.vocab);
            DecodeConfig cfg;
            cfg.steps = 16;
            // Low temperature keeps sampled rows coherent enough for exact
            // row matches, which is what the duplication score counts.
            cfg.temperature = 0.3;
            cfg.seed = 700 + i;
            cfg.position_penalty.gamma_p = gamma_p;
            cfg.position_penalty.n_p = scaled_tail_window(grid);
            const auto response = extract_response(
                plan, decode(denoiser, plan.state, cfg, m.vocab, plan.gen_segment));
            return duplication_score(response, m.world.grid_side);
        };
        const double plain = run(1.0);
        const double penalized = run(0.5);
        mean_plain += plain;
        mean_pen += penalized;
        if (penalized < plain)
            ++wins;
        else if (penalized > plain)
            ++losses;
    }
    mean_plain /= static_cast<double>(prompts.size());
    mean_pen /= static_cast<double>(prompts.size());

    // One-sided sign test over the non-tied pairs.
    const int trials = wins + losses;
    double p_value = 0.0;
    for (int k = wins; k <= trials; ++k) {
        double log_term = 0.0;
        for (int j = 0; j < k; ++j)
            log_term += std::log(static_cast<double>(trials - j)) -
                        std::log(static_cast<double>(j + 1));
        p_value += std::exp(log_term - trials * std::log(2.0));
    }
    const bool pass = mean_pen < mean_plain && p_value < 0.01;
    report(6, pass,
           fmt("mean duplication %.3f penalized vs %.3f plain, sign-test p %.2e (<0.01)",
               mean_pen, mean_plain, p_value),
           timer.seconds());
}

void criterion7(const TrainedModel& m) {
    Timer timer;
    const auto denoiser = make_denoiser(m.params);
    Rng prompt_rng(8008);
    const auto prompts = make_dataset(TaskTag::T2I, 32, m.world, m.vocab, prompt_rng);
    const std::size_t full =
        static_cast<std::size_t>(m.world.grid_side) * m.world.grid_side;

    struct Run {
        std::size_t steps;
        double accuracy = 0.0;
        double tokens_per_second = 0.0;
    };
    std::vector<Run> runs = {{full}, {full / 5}, {std::max<std::size_t>(1, full / 25)}};
    for (auto& run : runs) {
        Timer t;
        std::size_t matches = 0, total = 0;
        for (std::size_t i = 0; i < prompts.size(); ++i) {
            auto plan = plan_response(TaskTag::T2I, prompts[i].prompt, m.world, m.vocab);
            DecodeConfig cfg;
            cfg.steps = run.steps;
            cfg.temperature = 0.0;
            cfg.seed = 800 + i;
            const auto response = extract_response(
                plan, decode(denoiser, plan.state, cfg, m.vocab, plan.gen_segment));
            const auto& ref = prompts[i].response[0].second;
            for (std::size_t j = 0; j < response.size(); ++j)
                if (response[j] == ref[j]) ++matches;
            total += response.size();
        }
        run.accuracy = static_cast<double>(matches) / static_cast<double>(total);
        run.tokens_per_second = static_cast<double>(total) / t.seconds();
    }
    const bool quality = runs[1].accuracy >= 0.9 * runs[0].accuracy;
    const bool monotone = runs[1].tokens_per_second > runs[0].tokens_per_second &&
                          runs[2].tokens_per_second > runs[1].tokens_per_second;
    report(7, quality && monotone,
           fmt("accuracy %.3f at full steps vs %.3f at 1/5 (within 10%%), throughput "
               "monotone: %.0f",
               runs[0].accuracy, runs[1].accuracy, monotone ? 1.0 : 0.0),
           timer.seconds());
}

void criterion8(const TrainedModel& m) {
    Timer timer;
    const auto denoiser = make_denoiser(m.params);
    Rng prompt_rng(9009);
    const auto prompts = make_dataset(TaskTag::SQA, 100, m.world, m.vocab, prompt_rng);

    int marker_ok = 0, parse_ok = 0;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        auto plan = plan_response(TaskTag::SQA, prompts[i].prompt, m.world, m.vocab);
        DecodeConfig cfg;
        cfg.steps = 32;
        cfg.temperature = 0.0;
        cfg.seed = 900 + i;
        const auto region = extract_response(
            plan, decode(denoiser, plan.state, cfg, m.vocab, plan.gen_segment));
        if (region[kDialogBosIndex] == m.vocab.bos_speech_response()) ++marker_ok;
        try {
            const auto segs = parse_sequence(region, m.vocab);
            if (segs.size() == 2 && segs[0].modality == Modality::Text &&
                segs[1].modality == Modality::Speech && segs[0].start < segs[1].start)
                ++parse_ok;
        } catch (const Error&) {
        }
    }
    const bool pass = marker_ok == 100 && parse_ok == 100;
    report(8, pass,
           fmt("marker at index 32 in %.0f/100, text-then-speech parse in %.0f/100",
               static_cast<double>(marker_ok), static_cast<double>(parse_ok)),
           timer.seconds());
}

// ---------------------------------------------------------------------------
// 9. Scheduler invariant suite over randomized configurations.

void criterion9() {
    Timer timer;
    const auto vocab = build_vocabulary({4, 4, 4});
    const int V = vocab.total_size();
    Rng meta(9900);
    int passed = 0;
    const int configs = 1000;
    for (int c = 0; c < configs; ++c) {
        const auto L = static_cast<std::size_t>(meta.uniform_int(4, 32));
        const auto prefix_len = static_cast<std::size_t>(
            meta.uniform_int(0, static_cast<std::int64_t>(L / 2)));
        const auto steps = static_cast<std::size_t>(
            meta.uniform_int(1, static_cast<std::int64_t>(L) + 4));
        const double taus[3] = {0.0, 0.7, 1.3};
        const double tau = taus[meta.uniform_int(0, 2)];

        Logits grid(static_cast<Eigen::Index>(L), V);
        for (Eigen::Index i = 0; i < grid.size(); ++i)
            grid(i) = static_cast<float>(meta.normal() * 2.0);
        const DenoiserFn denoiser = [&grid](const std::vector<TokenId>&) { return grid; };

        std::vector<TokenId> prefix(prefix_len);
        for (auto& t : prefix) t = static_cast<TokenId>(meta.uniform_int(9, V - 1));

        DecodeConfig cfg;
        cfg.steps = steps;
        cfg.temperature = tau;
        cfg.seed = static_cast<std::uint64_t>(9000 + c);

        bool ok = true;
        const auto a = decode(denoiser, DecodeState::fresh(L, vocab, prefix), cfg, vocab);
        const auto b = decode(denoiser, DecodeState::fresh(L, vocab, prefix), cfg, vocab);
        // Full determinism under a fixed seed.
        ok = ok && a.tokens == b.tokens && a.commit_step == b.commit_step;

        // Even-schedule exactness and monotone (single, final) commitment.
        const std::size_t masks = L - prefix_len;
        const std::size_t used_steps = std::min(steps, masks);
        std::map<std::size_t, std::size_t> per_step;
        for (std::size_t i = 0; i < L; ++i) {
            if (i < prefix_len) {
                ok = ok && a.commit_step[i] == 0 && a.tokens[i] == prefix[i];
            } else {
                ok = ok && a.commit_step[i] >= 1 && a.commit_step[i] <= used_steps;
                ++per_step[a.commit_step[i]];
            }
        }
        std::size_t remaining = masks;
        for (std::size_t s = 1; s <= used_steps; ++s) {
            const std::size_t k = (remaining + (used_steps - s + 1) - 1) / (used_steps - s + 1);
            ok = ok && per_step[s] == k;
            remaining -= k;
        }
        ok = ok && remaining == 0;

        // CFG s=1 is bitwise identity, and decode ignores conditioning flags at s=1.
        Logits uncond(static_cast<Eigen::Index>(L), V);
        for (Eigen::Index i = 0; i < uncond.size(); ++i)
            uncond(i) = static_cast<float>(meta.normal());
        ok = ok && apply_cfg(grid, uncond, 1.0) == grid;
        auto st = DecodeState::fresh(L, vocab, prefix);
        std::fill(st.condition.begin(), st.condition.end(), 1);
        const auto flagged = decode(denoiser, std::move(st), cfg, vocab);
        ok = ok && flagged.tokens == a.tokens;

        // Argmax of a row is invariant under positive scaling.
        const auto row = static_cast<Eigen::Index>(meta.uniform_int(0, static_cast<std::int64_t>(L) - 1));
        const float scale = static_cast<float>(meta.uniform_real() * 9.9 + 0.1);
        Eigen::Index arg1 = 0, arg2 = 0;
        grid.row(row).maxCoeff(&arg1);
        (grid.row(row) * scale).maxCoeff(&arg2);
        ok = ok && arg1 == arg2;

        if (ok) ++passed;
    }
    report(9, passed == configs,
           fmt("%.0f/1000 randomized decode configurations satisfied every invariant",
               static_cast<double>(passed)),
           timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
    // --skip-trained: run only the criteria that need no trained model
    // (useful while iterating on training hyperparameters).
    const bool skip_trained = argc > 1 && std::string(argv[1]) == "--skip-trained";
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion9();
    if (skip_trained) {
        std::printf("%s\n", g_failures == 0 ? "ALL UNTRAINED CRITERIA PASSED"
                                            : "SOME CRITERIA FAILED");
        return g_failures == 0 ? 0 : 1;
    }
    std::printf("training the three-stage pipeline for criteria 5-8...\n");
    std::fflush(stdout);
    const auto model = train_pipeline();
    criterion5(model);
    criterion6(model);
    criterion7(model);
    criterion8(model);
    std::printf("%s\n", g_failures == 0 ? "ALL CRITERIA PASSED"
                                        : "SOME CRITERIA FAILED");
    return g_failures == 0 ? 0 : 1;
}

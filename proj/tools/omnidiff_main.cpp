// Command-line front end: corpus generation, staged training, sampling,
// inpainting, step-count benchmarks and evaluation over the toy worlds.
#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "omnidiff/checkpoint.hpp"
#include "omnidiff/corpus.hpp"
#include "omnidiff/errors.hpp"
#include "omnidiff/tasks.hpp"
#include "omnidiff/training.hpp"

using namespace omnidiff;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "omnidiff 0.1.0";

// ---------------------------------------------------------------------------
// Key-value run configuration with --set overrides.

class RunConfig {
public:
    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file: " + path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError("config line " + std::to_string(lineno) +
                                 " is not key=value");
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    void set_from_flag(const std::string& kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value: " + kv);
        set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }

    std::string get(const std::string& key, const std::string& fallback) const {
        used_.insert(key);
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }
    long get_int(const std::string& key, long fallback) const {
        const auto s = get(key, std::to_string(fallback));
        return std::stol(s);
    }
    double get_double(const std::string& key, double fallback) const {
        const auto s = get(key, std::to_string(fallback));
        return std::stod(s);
    }
    bool get_bool(const std::string& key, bool fallback) const {
        const auto s = get(key, fallback ? "true" : "false");
        if (s == "true" || s == "1") return true;
        if (s == "false" || s == "0") return false;
        throw ConfigError("boolean config key " + key + " has value " + s);
    }

    // Unknown keys are rejected once the command has read everything it knows.
    void reject_unknown() const {
        for (const auto& [key, value] : values_)
            if (!used_.count(key)) throw ConfigError("unknown config key: " + key);
    }

    std::string canonical() const {
        std::ostringstream out;
        for (const auto& [key, value] : values_) out << key << '=' << value << '\n';
        return out.str();
    }

    std::uint64_t hash() const {
        std::uint64_t h = 1469598103934665603ULL;
        for (unsigned char c : canonical()) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return h;
    }

private:
    static std::string trim(std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

ToyWorldConfig world_from(const RunConfig& cfg) {
    auto world = ToyWorldConfig::make_default(
        static_cast<int>(cfg.get_int("world.alphabet", 6)),
        static_cast<int>(cfg.get_int("world.text_len_min", 3)),
        static_cast<int>(cfg.get_int("world.text_len_max", 6)),
        static_cast<int>(cfg.get_int("world.grid_side", 4)),
        static_cast<int>(cfg.get_int("world.expand_min", 2)),
        static_cast<int>(cfg.get_int("world.expand_max", 5)));
    return world;
}

NetHyper model_from(const RunConfig& cfg, const Vocabulary& vocab) {
    NetHyper h;
    h.layers = static_cast<int>(cfg.get_int("model.layers", 2));
    h.d = static_cast<int>(cfg.get_int("model.d", 64));
    h.heads = static_cast<int>(cfg.get_int("model.heads", 4));
    h.max_len = static_cast<int>(cfg.get_int("model.max_len", 224));
    h.vocab_size = vocab.total_size();
    return h;
}

DecodeConfig decode_from(const RunConfig& cfg, std::uint64_t seed) {
    DecodeConfig d;
    d.steps = static_cast<std::size_t>(cfg.get_int("decode.steps", 16));
    d.temperature = cfg.get_double("decode.temperature", 0.0);
    d.cfg_scale = cfg.get_double("decode.cfg_scale", 1.0);
    d.repetition_penalty = cfg.get_double("decode.repetition_penalty", 1.0);
    d.position_penalty.gamma_p = cfg.get_double("decode.gamma_p", 1.0);
    d.position_penalty.n_p = static_cast<std::size_t>(cfg.get_int("decode.n_p", 0));
    d.seed = seed;
    d.validate();
    return d;
}

std::vector<std::pair<TaskTag, double>> parse_weighted_tasks(const std::string& spec) {
    std::vector<std::pair<TaskTag, double>> out;
    std::istringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError("expected task:weight entries, got " + item);
        out.emplace_back(task_from_name(item.substr(0, colon)),
                         std::stod(item.substr(colon + 1)));
    }
    if (out.empty()) throw ConfigError("empty task list: " + spec);
    return out;
}

void write_run_manifest(const fs::path& out_dir, const std::string& command,
                        const RunConfig& cfg, std::uint64_t seed) {
    std::ofstream out(out_dir / "run.json");
    out << "{\"command\":\"" << command << "\",\"config_hash\":" << cfg.hash()
        << ",\"seed\":" << seed << ",\"version\":\"" << kVersion << "\"}\n";
}

// ---------------------------------------------------------------------------
// ASCII rendering: one glyph per token id.

char glyph(TokenId id, const Vocabulary& vocab) {
    if (id == vocab.mask()) return '?';
    if (id == vocab.pad()) return '.';
    if (id == vocab.bos_speech_response()) return '&';
    if (vocab.is_special(id)) return '|';
    if (vocab.in_range(id, Modality::Text))
        return static_cast<char>('a' + (id - vocab.text_range().begin));
    if (vocab.in_range(id, Modality::Speech))
        return static_cast<char>('0' + (id - vocab.speech_range().begin));
    if (vocab.in_range(id, Modality::Image)) {
        const int u = id - vocab.image_range().begin;
        return static_cast<char>(u < 26 ? 'A' + u : 'a' + (u - 26));
    }
    return '#';
}

std::string render_tokens(const std::vector<TokenId>& tokens, const Vocabulary& vocab) {
    std::string out;
    for (TokenId id : tokens) out.push_back(glyph(id, vocab));
    return out;
}

std::string render_image_grid(const std::vector<TokenId>& image, int side,
                              const Vocabulary& vocab) {
    std::string out;
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c)
            out.push_back(glyph(image[static_cast<std::size_t>(r) * side + c], vocab));
        out.push_back('\n');
    }
    return out;
}

Datasets datasets_from_corpus(const std::vector<PairedSample>& samples) {
    Datasets data;
    for (const auto& s : samples) data[s.task].push_back(s);
    return data;
}

std::array<StageConfig, 3> stages_from(const RunConfig& cfg) {
    std::array<StageConfig, 3> stages;
    const char* default_mix[3] = {
        "t2i:0.5,i2t:0.5",
        "t2i:0.1,i2t:0.1,tts:0.2,asr:0.3,sqa:0.3",
        "t2i:0.1,i2t:0.1,tts:0.15,asr:0.2,sqa:0.15,svqa:0.15,s2i:0.15"};
    const long default_iters[3] = {3000, 10000, 3000};
    const double default_lr[3] = {1e-4, 1e-4, 1e-5};
    for (int i = 0; i < 3; ++i) {
        auto& st = stages[static_cast<std::size_t>(i)];
        const std::string p = "stage" + std::to_string(i + 1) + ".";
        st.stage_id = i + 1;
        st.task_mixture = parse_weighted_tasks(cfg.get(p + "mixture", default_mix[i]));
        st.iterations = static_cast<std::size_t>(cfg.get_int(p + "iterations", default_iters[i]));
        st.learning_rate = cfg.get_double(p + "lr", default_lr[i]);
        st.batch_size = static_cast<std::size_t>(cfg.get_int(p + "batch_size", 16));
        st.log_interval = static_cast<std::size_t>(cfg.get_int(p + "log_interval", 100));
        st.max_tail_pads = static_cast<std::size_t>(cfg.get_int(p + "max_tail_pads", 8));
        st.pad_attenuation = cfg.get_double(p + "pad_attenuation", 0.6);
        st.asr_truncation = cfg.get_double(p + "asr_truncation", 0.5);
        st.validate();
    }
    return stages;
}

// ---------------------------------------------------------------------------
// Subcommands.

int cmd_gen_corpus(const RunConfig& cfg, const fs::path& out_dir, std::uint64_t seed) {
    const auto world = world_from(cfg);
    const auto vocab = build_vocabulary(world.modality_sizes());
    const auto tasks = parse_weighted_tasks(cfg.get("corpus.tasks", "t2i:200,i2t:200"));
    const std::string path = cfg.get("corpus.path", (out_dir / "corpus.bin").string());
    cfg.reject_unknown();

    Rng rng(seed);
    std::vector<PairedSample> samples;
    for (const auto& [task, count] : tasks) {
        const auto n = static_cast<std::size_t>(count);
        if (n < 1) throw ConfigError("corpus task counts must be >= 1");
        auto part = make_dataset(task, n, world, vocab, rng);
        std::cout << task_name(task) << ": " << part.size() << " samples\n";
        samples.insert(samples.end(), part.begin(), part.end());
    }
    write_corpus(path, world, samples);
    std::cout << "wrote " << samples.size() << " records to " << path << "\n";
    return 0;
}

int cmd_train(const RunConfig& cfg, const fs::path& out_dir, std::uint64_t seed) {
    const std::string corpus_path = cfg.get("corpus.path", (out_dir / "corpus.bin").string());
    const auto [world, samples] = read_corpus(corpus_path);
    (void)world_from(cfg);  // the corpus owns the world; accept the keys anyway
    const auto vocab = build_vocabulary(world.modality_sizes());
    const auto stages = stages_from(cfg);
    const auto hyper = model_from(cfg, vocab);
    const int resume_stage = static_cast<int>(cfg.get_int("train.resume_stage", 0));
    const std::string resume_path = cfg.get(
        "train.checkpoint",
        (out_dir / ("stage" + std::to_string(resume_stage) + ".ckpt")).string());
    cfg.reject_unknown();

    const auto data = datasets_from_corpus(samples);
    NetParams<float> params = [&] {
        if (resume_stage > 0) {
            std::cout << "resuming from " << resume_path << "\n";
            return read_checkpoint(resume_path, vocab);
        }
        Rng init_rng(seed ^ 0x1A17ULL);
        return init_params<float>(hyper, init_rng);
    }();

    {
        std::ofstream vf(out_dir / "vocab.txt");
        vf << vocab.to_manifest();
    }
    std::ofstream metrics(out_dir / "metrics.jsonl",
                          resume_stage > 0 ? std::ios::app : std::ios::trunc);
    const auto sink = [&](const MetricsRecord& r) {
        const auto line = metrics_to_json(r);
        metrics << line << "\n";
        metrics.flush();
        std::cout << line << "\n";
    };
    const auto on_stage_end = [&](int stage, NetParams<float>& p) {
        write_checkpoint((out_dir / ("stage" + std::to_string(stage) + ".ckpt")).string(), p,
                         vocab);
    };
    run_pipeline(stages, params, data, world, vocab, seed, sink, on_stage_end,
                 resume_stage + 1);
    write_checkpoint((out_dir / "final.ckpt").string(), params, vocab);
    std::cout << "wrote " << (out_dir / "final.ckpt").string() << "\n";
    return 0;
}

struct LoadedModel {
    ToyWorldConfig world;
    Vocabulary vocab;
    NetParams<float> params;
};

LoadedModel load_model(const RunConfig& cfg, const fs::path& out_dir) {
    const auto world = world_from(cfg);
    const std::string manifest_path = cfg.get("model.vocab", (out_dir / "vocab.txt").string());
    Vocabulary vocab = [&] {
        std::ifstream in(manifest_path);
        if (!in) return build_vocabulary(world.modality_sizes());
        std::ostringstream buf;
        buf << in.rdbuf();
        return Vocabulary::from_manifest(buf.str());
    }();
    const std::string ckpt = cfg.get("model.checkpoint", (out_dir / "final.ckpt").string());
    return {world, vocab, read_checkpoint(ckpt, vocab)};
}

int cmd_sample(const RunConfig& cfg, const fs::path& out_dir, std::uint64_t seed) {
    auto model = load_model(cfg, out_dir);
    const auto task = task_from_name(cfg.get("sample.task", "t2i"));
    const auto count = static_cast<std::size_t>(cfg.get_int("sample.count", 4));
    const auto decode_cfg = decode_from(cfg, seed);
    cfg.reject_unknown();

    const auto denoiser = make_denoiser(model.params);
    Rng rng(seed ^ 0x5A17ULL);
    const auto prompts = make_dataset(task, count, model.world, model.vocab, rng);
    std::ofstream file(out_dir / "samples.txt");
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        auto plan = plan_response(task, prompts[i].prompt, model.world, model.vocab);
        DecodeConfig dc = decode_cfg;
        dc.seed = decode_cfg.seed + i;
        const auto result =
            decode(denoiser, plan.state, dc, model.vocab, plan.gen_segment);
        const auto response = extract_response(plan, result);

        std::ostringstream block;
        block << "# " << task_name(task) << " sample " << i << "\n";
        block << "prompt:   " << render_tokens(assemble_sequence(prompts[i].prompt, model.vocab).tokens,
                                               model.vocab)
              << "\n";
        if (task == TaskTag::T2I || task == TaskTag::S2I)
            block << "response:\n"
                  << render_image_grid(response, model.world.grid_side, model.vocab);
        else
            block << "response: " << render_tokens(response, model.vocab) << "\n";
        std::cout << block.str();
        file << block.str();
    }
    return 0;
}

int cmd_inpaint(const RunConfig& cfg, const fs::path& out_dir, std::uint64_t seed) {
    auto model = load_model(cfg, out_dir);
    const long row_begin = cfg.get_int("inpaint.row_begin", 2);
    const long row_end = cfg.get_int("inpaint.row_end", 3);  // inclusive
    const auto decode_cfg = decode_from(cfg, seed);
    cfg.reject_unknown();
    const int side = model.world.grid_side;
    if (row_begin < 0 || row_end < row_begin || row_end >= side)
        throw ConfigError("inpaint rows outside the image segment");

    Rng rng(seed ^ 0x14BAULL);
    const auto sample = make_dataset(TaskTag::T2I, 1, model.world, model.vocab, rng)[0];
    std::vector<SegmentPart> parts = sample.prompt;
    parts.insert(parts.end(), sample.response.begin(), sample.response.end());
    const auto seq = assemble_sequence(parts, model.vocab);

    // Mask rows row_begin..row_end of the image segment.
    const auto& image_seg = seq.segments[1];
    auto partial = seq.tokens;
    for (long r = row_begin; r <= row_end; ++r)
        for (int c = 0; c < side; ++c)
            partial[image_seg.start + static_cast<std::size_t>(r) * side + c] =
                model.vocab.mask();

    const auto result = inpaint(partial, make_denoiser(model.params), decode_cfg, model.vocab);
    for (std::size_t i = 0; i < partial.size(); ++i)
        if (partial[i] != model.vocab.mask() && result.tokens[i] != partial[i])
            throw DomainError("inpainting modified a known token");

    std::ofstream file(out_dir / "inpaint.txt");
    std::ostringstream block;
    const auto grid_of = [&](const std::vector<TokenId>& toks) {
        return render_image_grid(
            {toks.begin() + static_cast<std::ptrdiff_t>(image_seg.start),
             toks.begin() + static_cast<std::ptrdiff_t>(image_seg.start + image_seg.length)},
            side, model.vocab);
    };
    block << "original:\n" << grid_of(seq.tokens);
    block << "masked:\n" << grid_of(partial);
    block << "inpainted:\n" << grid_of(result.tokens);
    std::cout << block.str();
    file << block.str();
    return 0;
}

struct BenchRecord {
    std::string task;
    std::size_t steps = 0;
    double token_accuracy = 0.0;
    double wallclock_ms = 0.0;
    double tokens_per_second = 0.0;
};

int cmd_bench_steps(const RunConfig& cfg, const fs::path& out_dir, std::uint64_t seed) {
    auto model = load_model(cfg, out_dir);
    const auto task = task_from_name(cfg.get("bench.task", "t2i"));
    const auto count = static_cast<std::size_t>(cfg.get_int("bench.count", 16));
    const std::string list = cfg.get("bench.steps_list", "");
    DecodeConfig base = decode_from(cfg, seed);
    cfg.reject_unknown();

    Rng rng(seed ^ 0xBE9CULL);
    const auto samples = make_dataset(task, count, model.world, model.vocab, rng);
    const auto denoiser = make_denoiser(model.params);

    // Default sweep: full, 1/5 and 1/25 of the mask count.
    std::vector<std::size_t> steps_list;
    if (list.empty()) {
        const auto probe = plan_response(task, samples[0].prompt, model.world, model.vocab);
        const std::size_t full = probe.state.remaining_masks();
        steps_list = {full, std::max<std::size_t>(1, full / 5),
                      std::max<std::size_t>(1, full / 25)};
    } else {
        std::istringstream in(list);
        std::string item;
        while (std::getline(in, item, ','))
            steps_list.push_back(static_cast<std::size_t>(std::stoul(item)));
    }

    std::ofstream file(out_dir / "bench.jsonl");
    for (std::size_t steps : steps_list) {
        BenchRecord rec;
        rec.task = task_name(task);
        rec.steps = steps;
        std::size_t tokens = 0, matches = 0, total = 0;
        const auto t0 = std::chrono::steady_clock::now();
        for (std::size_t i = 0; i < samples.size(); ++i) {
            auto plan = plan_response(task, samples[i].prompt, model.world, model.vocab);
            DecodeConfig dc = base;
            dc.steps = steps;
            dc.seed = seed + i;
            const auto result =
                decode(denoiser, plan.state, dc, model.vocab, plan.gen_segment);
            const auto response = extract_response(plan, result);
            tokens += response.size();
            const auto& ref = samples[i].response[0].second;
            for (std::size_t j = 0; j < response.size() && j < ref.size(); ++j)
                if (response[j] == ref[j]) ++matches;
            total += std::min(response.size(), ref.size());
        }
        rec.wallclock_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
        rec.token_accuracy = total ? static_cast<double>(matches) / total : 0.0;
        rec.tokens_per_second = tokens / (rec.wallclock_ms / 1000.0);
        std::ostringstream line;
        line << "{\"task\":\"" << rec.task << "\",\"steps\":" << rec.steps
             << ",\"token_accuracy\":" << rec.token_accuracy
             << ",\"wallclock_ms\":" << rec.wallclock_ms
             << ",\"tokens_per_second\":" << rec.tokens_per_second << "}";
        std::cout << line.str() << "\n";
        file << line.str() << "\n";
    }
    return 0;
}

int cmd_eval(const RunConfig& cfg, const fs::path& out_dir, std::uint64_t seed) {
    auto model = load_model(cfg, out_dir);
    const auto tasks = parse_weighted_tasks(cfg.get("eval.tasks", "t2i:32,asr:32,tts:32"));
    DecodeConfig base = decode_from(cfg, seed);
    cfg.reject_unknown();

    const auto denoiser = make_denoiser(model.params);
    std::ofstream file(out_dir / "eval.jsonl");
    for (const auto& [task, countf] : tasks) {
        const auto count = static_cast<std::size_t>(countf);
        Rng rng(seed ^ (0xE7A1ULL + static_cast<std::uint64_t>(task)));
        const auto samples = make_dataset(task, count, model.world, model.vocab, rng);
        std::size_t matches = 0, total = 0, exact = 0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& ref = samples[i].response[0].second;
            std::optional<std::size_t> content_len;
            if (task == TaskTag::I2T) content_len = ref.size();
            auto plan =
                plan_response(task, samples[i].prompt, model.world, model.vocab, content_len);
            DecodeConfig dc = base;
            dc.seed = seed + i;
            const auto result =
                decode(denoiser, plan.state, dc, model.vocab, plan.gen_segment);
            const auto response = extract_response(plan, result);
            if (task == TaskTag::TTS) {
                // Exact match up to duration ambiguity.
                try {
                    if (speech_to_text(response, model.world, model.vocab) ==
                        samples[i].prompt[0].second)
                        ++exact;
                } catch (const Error&) {
                }
                total += response.size();
                continue;
            }
            for (std::size_t j = 0; j < response.size() && j < ref.size(); ++j)
                if (response[j] == ref[j]) ++matches;
            total += std::min(response.size(), ref.size());
            if (response == ref) ++exact;
        }
        std::ostringstream line;
        line << "{\"task\":\"" << task_name(task)
             << "\",\"token_accuracy\":" << (total ? static_cast<double>(matches) / total : 0.0)
             << ",\"exact_match\":" << static_cast<double>(exact) / samples.size() << "}";
        std::cout << line.str() << "\n";
        file << line.str() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mask-based multimodal discrete diffusion toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir_str = ".";
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "key=value config file");
    app.add_option("--set", overrides, "config overrides (key=value)");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--out", out_dir_str, "output directory");

    const std::map<std::string, int (*)(const RunConfig&, const fs::path&, std::uint64_t)>
        commands = {{"gen-corpus", cmd_gen_corpus}, {"train", cmd_train},
                    {"sample", cmd_sample},         {"inpaint", cmd_inpaint},
                    {"bench-steps", cmd_bench_steps}, {"eval", cmd_eval}};
    for (const auto& [name, fn] : commands) app.add_subcommand(name)->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg.load_file(config_path);
        for (const auto& kv : overrides) cfg.set_from_flag(kv);
        const fs::path out_dir(out_dir_str);
        fs::create_directories(out_dir);

        const auto* sub = app.get_subcommands().front();
        write_run_manifest(out_dir, sub->get_name(), cfg, seed);
        return commands.at(sub->get_name())(cfg, out_dir, seed);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

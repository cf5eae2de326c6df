#include "omnidiff/toyworld.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "omnidiff/errors.hpp"

namespace omnidiff {

ToyWorldConfig ToyWorldConfig::make_default(int alphabet, int len_min, int len_max, int side,
                                            int emin, int emax) {
    ToyWorldConfig w;
    w.alphabet = alphabet;
    w.text_len_min = len_min;
    w.text_len_max = len_max;
    w.grid_side = side;
    w.expand_min = emin;
    w.expand_max = emax;
    w.init_probs.resize(alphabet);
    double z = 0.0;
    for (int i = 0; i < alphabet; ++i) {
        w.init_probs[i] = 1.0 + static_cast<double>(i % 2);
        z += w.init_probs[i];
    }
    for (auto& p : w.init_probs) p /= z;
    w.transition.assign(alphabet, std::vector<double>(alphabet, 0.0));
    for (int i = 0; i < alphabet; ++i) {
        double rz = 0.0;
        for (int j = 0; j < alphabet; ++j) {
            if (j == i) continue;
            w.transition[i][j] = 1.0 + static_cast<double>((i + j) % 3);
            rz += w.transition[i][j];
        }
        for (int j = 0; j < alphabet; ++j) w.transition[i][j] /= rz;
    }
    w.validate();
    return w;
}

void ToyWorldConfig::validate() const {
    if (alphabet < 1) throw ConfigError("alphabet must be >= 1");
    if (grid_side < 2 || grid_side % 2 != 0)
        throw ConfigError("grid side must be even and >= 2");
    if (expand_min < 1 || expand_min > expand_max)
        throw ConfigError("speech expansion range requires 1 <= min <= max");
    if (text_len_min < 1 || text_len_min > text_len_max)
        throw ConfigError("text length range requires 1 <= min <= max");
    if (static_cast<int>(init_probs.size()) != alphabet ||
        static_cast<int>(transition.size()) != alphabet)
        throw ConfigError("Markov chain shape does not match alphabet");
    for (const auto& row : transition)
        if (static_cast<int>(row.size()) != alphabet)
            throw ConfigError("Markov chain shape does not match alphabet");
}

const char* task_name(TaskTag t) {
    switch (t) {
        case TaskTag::T2I: return "t2i";
        case TaskTag::I2T: return "i2t";
        case TaskTag::TTS: return "tts";
        case TaskTag::ASR: return "asr";
        case TaskTag::S2I: return "s2i";
        case TaskTag::SQA: return "sqa";
        case TaskTag::SVQA: return "svqa";
    }
    return "?";
}

TaskTag task_from_name(const std::string& name) {
    for (TaskTag t : {TaskTag::T2I, TaskTag::I2T, TaskTag::TTS, TaskTag::ASR, TaskTag::S2I,
                      TaskTag::SQA, TaskTag::SVQA})
        if (name == task_name(t)) return t;
    throw ConfigError("unknown task tag: " + name);
}

std::vector<TokenId> gen_text(const ToyWorldConfig& world, const Vocabulary& vocab, Rng& rng) {
    world.validate();
    const std::size_t len = static_cast<std::size_t>(
        rng.uniform_int(world.text_len_min, world.text_len_max));
    std::vector<TokenId> out;
    out.reserve(len);
    int state = static_cast<int>(rng.categorical(world.init_probs));
    out.push_back(vocab.text_range().begin + state);
    for (std::size_t i = 1; i < len; ++i) {
        state = static_cast<int>(rng.categorical(world.transition[static_cast<std::size_t>(state)]));
        out.push_back(vocab.text_range().begin + state);
    }
    return out;
}

std::vector<TokenId> render_image_toy(const std::vector<TokenId>& text,
                                      const ToyWorldConfig& world, const Vocabulary& vocab) {
    if (text.empty()) throw DomainError("cannot render an empty text");
    const int side = world.grid_side;
    const int tiles_per_side = side / 2;
    std::vector<TokenId> grid(static_cast<std::size_t>(side) * side, 0);
    for (int k = 0; k < world.tiles(); ++k) {
        const TokenId t = text[static_cast<std::size_t>(k) % text.size()];
        const int u = t - vocab.text_range().begin;
        if (u < 0 || u >= world.alphabet) throw ModalityViolation("text token outside alphabet");
        const int tr = k / tiles_per_side, tc = k % tiles_per_side;
        for (int j = 0; j < 4; ++j) {
            const int r = 2 * tr + j / 2, c = 2 * tc + j % 2;
            grid[static_cast<std::size_t>(r) * side + c] =
                vocab.image_range().begin + 4 * u + j;
        }
    }
    return grid;
}

std::vector<TokenId> render_speech_toy(const std::vector<TokenId>& text,
                                       const ToyWorldConfig& world, const Vocabulary& vocab,
                                       Rng& rng) {
    if (text.empty()) throw DomainError("cannot render an empty text");
    std::vector<TokenId> out;
    for (TokenId t : text) {
        const int u = t - vocab.text_range().begin;
        if (u < 0 || u >= world.alphabet) throw ModalityViolation("text token outside alphabet");
        const auto d = static_cast<std::size_t>(rng.uniform_int(world.expand_min, world.expand_max));
        out.insert(out.end(), d, vocab.speech_range().begin + u);
    }
    return out;
}

std::vector<TokenId> speech_to_text(const std::vector<TokenId>& speech,
                                    const ToyWorldConfig& world, const Vocabulary& vocab) {
    std::vector<TokenId> out;
    for (std::size_t i = 0; i < speech.size(); ++i) {
        if (i > 0 && speech[i] == speech[i - 1]) continue;
        const int u = speech[i] - vocab.speech_range().begin;
        if (u < 0 || u >= world.alphabet)
            throw ModalityViolation("speech token outside alphabet");
        out.push_back(vocab.text_range().begin + u);
    }
    return out;
}

TokenId majority_text_token(const std::vector<TokenId>& image, const ToyWorldConfig& world,
                            const Vocabulary& vocab) {
    const int side = world.grid_side;
    if (static_cast<int>(image.size()) != side * side)
        throw ShapeError("image token count does not match grid");
    std::vector<int> counts(static_cast<std::size_t>(world.alphabet), 0);
    const int tiles_per_side = side / 2;
    for (int k = 0; k < world.tiles(); ++k) {
        const int tr = k / tiles_per_side, tc = k % tiles_per_side;
        const TokenId cell0 = image[static_cast<std::size_t>(2 * tr) * side + 2 * tc];
        const int u = (cell0 - vocab.image_range().begin) / 4;
        if (u >= 0 && u < world.alphabet) ++counts[static_cast<std::size_t>(u)];
    }
    int best = 0;
    for (int u = 1; u < world.alphabet; ++u)
        if (counts[static_cast<std::size_t>(u)] > counts[static_cast<std::size_t>(best)]) best = u;
    return vocab.text_range().begin + best;
}

std::vector<TokenId> dialog_response_layout(const std::vector<TokenId>& answer_text,
                                            const std::vector<TokenId>& answer_speech,
                                            const Vocabulary& vocab) {
    if (answer_text.size() + 2 > kDialogBosIndex)
        throw ConfigError("dialogue text answer does not fit before the speech marker");
    if (answer_speech.size() + 2 > kDialogRegionLen - kDialogBosIndex - 1)
        throw ConfigError("dialogue speech answer does not fit in the region");
    std::vector<TokenId> out;
    out.reserve(kDialogRegionLen);
    out.push_back(vocab.bot(Modality::Text));
    out.insert(out.end(), answer_text.begin(), answer_text.end());
    out.push_back(vocab.eot(Modality::Text));
    out.resize(kDialogBosIndex, vocab.pad());
    out.push_back(vocab.bos_speech_response());
    out.push_back(vocab.bot(Modality::Speech));
    out.insert(out.end(), answer_speech.begin(), answer_speech.end());
    out.push_back(vocab.eot(Modality::Speech));
    out.resize(kDialogRegionLen, vocab.pad());
    return out;
}

std::vector<PairedSample> make_dataset(TaskTag task, std::size_t n, const ToyWorldConfig& world,
                                       const Vocabulary& vocab, Rng& rng) {
    if (n < 1) throw ConfigError("dataset size must be >= 1");
    world.validate();
    std::vector<PairedSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        PairedSample s;
        s.task = task;
        const auto text = gen_text(world, vocab, rng);
        switch (task) {
            case TaskTag::T2I:
                s.prompt = {{Modality::Text, text}};
                s.response = {{Modality::Image, render_image_toy(text, world, vocab)}};
                break;
            case TaskTag::I2T:
                s.prompt = {{Modality::Image, render_image_toy(text, world, vocab)}};
                s.response = {{Modality::Text, text}};
                break;
            case TaskTag::TTS:
                s.prompt = {{Modality::Text, text}};
                s.response = {{Modality::Speech, render_speech_toy(text, world, vocab, rng)}};
                break;
            case TaskTag::ASR:
                s.prompt = {{Modality::Speech, render_speech_toy(text, world, vocab, rng)}};
                s.response = {{Modality::Text, text}};
                break;
            case TaskTag::S2I:
                s.prompt = {{Modality::Speech, render_speech_toy(text, world, vocab, rng)}};
                s.response = {{Modality::Image, render_image_toy(text, world, vocab)}};
                break;
            case TaskTag::SQA: {
                const std::vector<TokenId> answer = {text.back()};
                s.prompt = {{Modality::Speech, render_speech_toy(text, world, vocab, rng)}};
                s.response = {{Modality::Text, answer},
                              {Modality::Speech, render_speech_toy(answer, world, vocab, rng)}};
                break;
            }
            case TaskTag::SVQA: {
                const auto image = render_image_toy(text, world, vocab);
                const std::vector<TokenId> question = {vocab.text_range().begin};
                const std::vector<TokenId> answer = {majority_text_token(image, world, vocab)};
                s.prompt = {{Modality::Image, image},
                            {Modality::Speech, render_speech_toy(question, world, vocab, rng)}};
                s.response = {{Modality::Text, answer},
                              {Modality::Speech, render_speech_toy(answer, world, vocab, rng)}};
                break;
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

TrainingSequence to_training_sequence(const PairedSample& sample, const ToyWorldConfig& world,
                                      const Vocabulary& vocab) {
    (void)world;
    TrainingSequence out;
    const bool dialogue = sample.task == TaskTag::SQA || sample.task == TaskTag::SVQA;
    UnifiedSequence prompt_seq = assemble_sequence(sample.prompt, vocab);
    const std::size_t prompt_len = prompt_seq.tokens.size();
    if (!dialogue) {
        std::vector<SegmentPart> parts = sample.prompt;
        parts.insert(parts.end(), sample.response.begin(), sample.response.end());
        out.seq = assemble_sequence(parts, vocab);
    } else {
        if (sample.response.size() != 2)
            throw ConfigError("dialogue sample needs text + speech response parts");
        out.seq = prompt_seq;
        const auto region = dialog_response_layout(sample.response[0].second,
                                                   sample.response[1].second, vocab);
        out.seq.segments.push_back(
            {Modality::Text, prompt_len + 1, sample.response[0].second.size()});
        out.seq.segments.push_back({Modality::Speech, prompt_len + kDialogBosIndex + 2,
                                    sample.response[1].second.size()});
        out.seq.tokens.insert(out.seq.tokens.end(), region.begin(), region.end());
    }
    for (std::size_t i = 0; i < prompt_len; ++i) out.protected_positions.insert(i);
    out.response_offset = prompt_len;
    return out;
}

namespace {

void enumerate_texts(const ToyWorldConfig& world, std::size_t len, std::vector<int>& prefix,
                     double prob, std::vector<std::pair<std::vector<int>, double>>& out) {
    if (prefix.size() == len) {
        if (prob > 0.0) out.emplace_back(prefix, prob);
        return;
    }
    for (int j = 0; j < world.alphabet; ++j) {
        const double p = prefix.empty()
                             ? world.init_probs[static_cast<std::size_t>(j)]
                             : world.transition[static_cast<std::size_t>(prefix.back())]
                                               [static_cast<std::size_t>(j)];
        if (p <= 0.0) continue;
        prefix.push_back(j);
        enumerate_texts(world, len, prefix, prob * p, out);
        prefix.pop_back();
    }
}

}  // namespace

OracleModel joint_distribution(TaskTag task, const ToyWorldConfig& world,
                               const Vocabulary& vocab, std::size_t limit) {
    world.validate();
    const bool speech_task =
        task == TaskTag::TTS || task == TaskTag::ASR || task == TaskTag::S2I;
    std::vector<std::pair<std::vector<int>, double>> texts;
    for (int len = world.text_len_min; len <= world.text_len_max; ++len) {
        std::vector<int> prefix;
        enumerate_texts(world, static_cast<std::size_t>(len), prefix,
                        1.0 / (world.text_len_max - world.text_len_min + 1), texts);
        if (texts.size() > limit) throw EnumerationLimitError("oracle support too large");
    }

    // Expand duration randomness for speech tasks.
    struct Entry {
        std::vector<TokenId> text;
        std::vector<TokenId> speech;
        double prob;
    };
    std::vector<Entry> entries;
    for (const auto& [sym, prob] : texts) {
        std::vector<TokenId> text;
        for (int u : sym) text.push_back(vocab.text_range().begin + u);
        if (!speech_task) {
            entries.push_back({text, {}, prob});
            continue;
        }
        const int span = world.expand_max - world.expand_min + 1;
        const double dprob = 1.0 / std::pow(static_cast<double>(span), static_cast<double>(sym.size()));
        std::vector<int> durations(sym.size(), world.expand_min);
        while (true) {
            std::vector<TokenId> speech;
            for (std::size_t i = 0; i < sym.size(); ++i)
                speech.insert(speech.end(), static_cast<std::size_t>(durations[i]),
                              vocab.speech_range().begin + sym[i]);
            entries.push_back({text, speech, prob * dprob});
            if (entries.size() > limit) throw EnumerationLimitError("oracle support too large");
            std::size_t pos = 0;
            while (pos < durations.size() && durations[pos] == world.expand_max)
                durations[pos++] = world.expand_min;
            if (pos == durations.size()) break;
            ++durations[pos];
        }
    }

    OracleModel oracle;
    oracle.vocab_size = vocab.total_size();
    std::size_t max_len = 0;
    std::vector<std::vector<TokenId>> seqs;
    for (const auto& e : entries) {
        std::vector<SegmentPart> parts;
        switch (task) {
            case TaskTag::T2I:
                parts = {{Modality::Text, e.text},
                         {Modality::Image, render_image_toy(e.text, world, vocab)}};
                break;
            case TaskTag::I2T:
                parts = {{Modality::Image, render_image_toy(e.text, world, vocab)},
                         {Modality::Text, e.text}};
                break;
            case TaskTag::TTS:
                parts = {{Modality::Text, e.text}, {Modality::Speech, e.speech}};
                break;
            case TaskTag::ASR:
                parts = {{Modality::Speech, e.speech}, {Modality::Text, e.text}};
                break;
            case TaskTag::S2I:
                parts = {{Modality::Speech, e.speech},
                         {Modality::Image, render_image_toy(e.text, world, vocab)}};
                break;
            default:
                throw ConfigError("joint_distribution does not cover dialogue tasks");
        }
        auto seq = assemble_sequence(parts, vocab).tokens;
        max_len = std::max(max_len, seq.size());
        seqs.push_back(std::move(seq));
        oracle.probs.push_back(e.prob);
    }
    // Variable-length supports are tail-padded to one common length, which
    // marginalizes duration randomness at each position.
    for (auto& s : seqs) s.resize(max_len, vocab.pad());
    // Merge duplicates (identical padded sequences).
    std::map<std::vector<TokenId>, double> merged;
    for (std::size_t i = 0; i < seqs.size(); ++i) merged[seqs[i]] += oracle.probs[i];
    oracle.support.clear();
    oracle.probs.clear();
    for (auto& [seq, p] : merged) {
        oracle.support.push_back(seq);
        oracle.probs.push_back(p);
    }
    oracle.validate();
    return oracle;
}

double duplication_score(const std::vector<TokenId>& image, int grid_side) {
    if (static_cast<int>(image.size()) != grid_side * grid_side)
        throw ShapeError("image token count does not match grid");
    const int half = grid_side / 2;
    std::set<std::vector<TokenId>> bottom;
    for (int r = half; r < grid_side; ++r)
        bottom.insert(std::vector<TokenId>(image.begin() + static_cast<std::ptrdiff_t>(r) * grid_side,
                                           image.begin() + static_cast<std::ptrdiff_t>(r + 1) * grid_side));
    int hits = 0;
    for (int r = 0; r < half; ++r) {
        std::vector<TokenId> row(image.begin() + static_cast<std::ptrdiff_t>(r) * grid_side,
                                 image.begin() + static_cast<std::ptrdiff_t>(r + 1) * grid_side);
        if (bottom.count(row)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(half);
}

EvalReport evaluate(const std::vector<std::vector<TokenId>>& outputs,
                    const std::vector<std::vector<TokenId>>& references, TaskTag task,
                    const ToyWorldConfig& world) {
    if (outputs.size() != references.size() || outputs.empty())
        throw EvalError("outputs and references must align");
    EvalReport report;
    std::size_t matches = 0, total = 0, exact = 0;
    double dup = 0.0;
    const bool image_task = task == TaskTag::T2I || task == TaskTag::S2I;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        if (outputs[i].size() != references[i].size())
            throw EvalError("output/reference length mismatch at sample " + std::to_string(i));
        for (std::size_t j = 0; j < outputs[i].size(); ++j)
            if (outputs[i][j] == references[i][j]) ++matches;
        total += outputs[i].size();
        if (outputs[i] == references[i]) ++exact;
        if (image_task) dup += duplication_score(outputs[i], world.grid_side);
    }
    report.token_accuracy = static_cast<double>(matches) / static_cast<double>(total);
    report.exact_match = static_cast<double>(exact) / static_cast<double>(outputs.size());
    if (image_task) report.duplication_score = dup / static_cast<double>(outputs.size());
    return report;
}

double total_variation(const std::vector<std::vector<TokenId>>& samples,
                       const OracleModel& oracle) {
    std::map<std::vector<TokenId>, double> emp;
    const double w = 1.0 / static_cast<double>(samples.size());
    for (const auto& s : samples) emp[s] += w;
    double tv = 0.0;
    for (std::size_t i = 0; i < oracle.support.size(); ++i) {
        auto it = emp.find(oracle.support[i]);
        const double e = it == emp.end() ? 0.0 : it->second;
        tv += std::abs(e - oracle.probs[i]);
        if (it != emp.end()) emp.erase(it);
    }
    for (const auto& [seq, e] : emp) tv += e;  // mass outside the support
    return 0.5 * tv;
}

double mean_nll(const std::vector<std::vector<TokenId>>& samples, const OracleModel& oracle) {
    std::map<std::vector<TokenId>, double> probs;
    for (std::size_t i = 0; i < oracle.support.size(); ++i)
        probs[oracle.support[i]] = oracle.probs[i];
    double nll = 0.0;
    for (const auto& s : samples) {
        auto it = probs.find(s);
        if (it == probs.end() || it->second <= 0.0)
            return std::numeric_limits<double>::infinity();
        nll -= std::log(it->second);
    }
    return nll / static_cast<double>(samples.size());
}

}  // namespace omnidiff

// Python bindings for the core operations: token space, corruption, the
// denoiser network, decoding/inpainting, toy worlds and checkpoints.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "omnidiff/checkpoint.hpp"
#include "omnidiff/corruption.hpp"
#include "omnidiff/loss.hpp"
#include "omnidiff/tasks.hpp"
#include "omnidiff/training.hpp"

namespace py = pybind11;
using namespace omnidiff;

namespace {

// Owns parameters so Python callers get value semantics.
struct Model {
    NetParams<float> params;

    static Model create(int layers, int d, int heads, int vocab_size, int max_len,
                        std::uint64_t seed) {
        NetHyper h;
        h.layers = layers;
        h.d = d;
        h.heads = heads;
        h.vocab_size = vocab_size;
        h.max_len = max_len;
        Rng rng(seed);
        return {init_params<float>(h, rng)};
    }

    Eigen::MatrixXf forward(const std::vector<TokenId>& tokens) const {
        return denoiser_forward(params, tokens);
    }

    std::vector<TokenId> inpaint_tokens(const std::vector<TokenId>& partial,
                                        const Vocabulary& vocab, std::size_t steps,
                                        double temperature, std::uint64_t seed) const {
        DecodeConfig cfg;
        cfg.steps = steps;
        cfg.temperature = temperature;
        cfg.seed = seed;
        return inpaint(partial, make_denoiser(params), cfg, vocab).tokens;
    }

    std::vector<TokenId> respond(TaskTag task, const std::vector<SegmentPart>& prompt,
                                 const ToyWorldConfig& world, const Vocabulary& vocab,
                                 std::size_t steps, double temperature,
                                 std::uint64_t seed) const {
        auto plan = plan_response(task, prompt, world, vocab);
        DecodeConfig cfg;
        cfg.steps = steps;
        cfg.temperature = temperature;
        cfg.seed = seed;
        const auto result =
            decode(make_denoiser(params), plan.state, cfg, vocab, plan.gen_segment);
        return extract_response(plan, result);
    }
};

}  // namespace

PYBIND11_MODULE(_omnidiff, m) {
    m.doc() = "mask-based multimodal discrete diffusion core";

    py::register_exception<Error>(m, "OmnidiffError");

    py::enum_<Modality>(m, "Modality")
        .value("TEXT", Modality::Text)
        .value("IMAGE", Modality::Image)
        .value("SPEECH", Modality::Speech);

    py::enum_<TaskTag>(m, "Task")
        .value("T2I", TaskTag::T2I)
        .value("I2T", TaskTag::I2T)
        .value("TTS", TaskTag::TTS)
        .value("ASR", TaskTag::ASR)
        .value("S2I", TaskTag::S2I)
        .value("SQA", TaskTag::SQA)
        .value("SVQA", TaskTag::SVQA);

    py::class_<IdRange>(m, "IdRange")
        .def_readonly("begin", &IdRange::begin)
        .def_readonly("end", &IdRange::end)
        .def("size", &IdRange::size);

    py::class_<Vocabulary>(m, "Vocabulary")
        .def("total_size", &Vocabulary::total_size)
        .def("mask", &Vocabulary::mask)
        .def("pad", &Vocabulary::pad)
        .def("bot", &Vocabulary::bot)
        .def("eot", &Vocabulary::eot)
        .def("bos_speech_response", &Vocabulary::bos_speech_response)
        .def("range", &Vocabulary::range, py::return_value_policy::copy)
        .def("to_manifest", &Vocabulary::to_manifest)
        .def_static("from_manifest", &Vocabulary::from_manifest)
        .def("manifest_hash", &Vocabulary::manifest_hash);

    m.def(
        "build_vocabulary",
        [](TokenId text, TokenId image, TokenId speech) {
            return build_vocabulary({text, image, speech});
        },
        py::arg("text"), py::arg("image"), py::arg("speech"));

    py::class_<SegmentSpec>(m, "SegmentSpec")
        .def_readonly("modality", &SegmentSpec::modality)
        .def_readonly("start", &SegmentSpec::start)
        .def_readonly("length", &SegmentSpec::length);

    m.def(
        "assemble_sequence",
        [](const std::vector<SegmentPart>& parts, const Vocabulary& vocab) {
            const auto seq = assemble_sequence(parts, vocab);
            return py::make_tuple(seq.tokens, seq.segments);
        },
        py::arg("parts"), py::arg("vocab"));
    m.def("parse_sequence", &parse_sequence, py::arg("tokens"), py::arg("vocab"));

    m.def("mask_ratio", &mask_ratio, py::arg("t"));
    m.def(
        "corrupt",
        [](const std::vector<TokenId>& tokens, double ratio, double pad_attenuation,
           const std::vector<std::size_t>& protected_positions, const Vocabulary& vocab,
           std::uint64_t seed) {
            UnifiedSequence seq;
            seq.tokens = tokens;
            MaskPlan plan;
            plan.base_ratio = ratio;
            plan.pad_attenuation = pad_attenuation;
            plan.protected_positions.insert(protected_positions.begin(),
                                            protected_positions.end());
            Rng rng(seed);
            const auto xt = corrupt(seq, plan, vocab, rng);
            return py::make_tuple(xt.tokens, xt.mask_positions);
        },
        py::arg("tokens"), py::arg("ratio"), py::arg("pad_attenuation"),
        py::arg("protected_positions"), py::arg("vocab"), py::arg("seed"));

    py::class_<ToyWorldConfig>(m, "ToyWorld")
        .def_static("default", &ToyWorldConfig::make_default, py::arg("alphabet") = 6,
                    py::arg("len_min") = 3, py::arg("len_max") = 6, py::arg("side") = 4,
                    py::arg("emin") = 2, py::arg("emax") = 5)
        .def_readonly("alphabet", &ToyWorldConfig::alphabet)
        .def_readonly("grid_side", &ToyWorldConfig::grid_side)
        .def("modality_sizes", [](const ToyWorldConfig& w) {
            const auto s = w.modality_sizes();
            return py::make_tuple(s.text, s.image, s.speech);
        });

    py::class_<PairedSample>(m, "PairedSample")
        .def_readonly("task", &PairedSample::task)
        .def_readonly("prompt", &PairedSample::prompt)
        .def_readonly("response", &PairedSample::response);

    m.def(
        "make_dataset",
        [](TaskTag task, std::size_t n, const ToyWorldConfig& world, const Vocabulary& vocab,
           std::uint64_t seed) {
            Rng rng(seed);
            return make_dataset(task, n, world, vocab, rng);
        },
        py::arg("task"), py::arg("n"), py::arg("world"), py::arg("vocab"), py::arg("seed"));
    m.def("render_image_toy", &render_image_toy, py::arg("text"), py::arg("world"),
          py::arg("vocab"));
    m.def("speech_to_text", &speech_to_text, py::arg("speech"), py::arg("world"),
          py::arg("vocab"));
    m.def("adaptive_init_length", &adaptive_init_length, py::arg("task"), py::arg("count"));
    py::enum_<SpeechTask>(m, "SpeechTask")
        .value("TTS", SpeechTask::TTS)
        .value("ASR", SpeechTask::ASR);

    py::class_<Model>(m, "Model")
        .def_static("create", &Model::create, py::arg("layers"), py::arg("d"),
                    py::arg("heads"), py::arg("vocab_size"), py::arg("max_len"),
                    py::arg("seed"))
        .def_static(
            "load",
            [](const std::string& path, const Vocabulary& vocab) {
                return Model{read_checkpoint(path, vocab)};
            },
            py::arg("path"), py::arg("vocab"))
        .def(
            "save",
            [](const Model& model, const std::string& path, const Vocabulary& vocab) {
                write_checkpoint(path, model.params, vocab);
            },
            py::arg("path"), py::arg("vocab"))
        .def("forward", &Model::forward, py::arg("tokens"))
        .def("inpaint", &Model::inpaint_tokens, py::arg("partial"), py::arg("vocab"),
             py::arg("steps") = 16, py::arg("temperature") = 0.0, py::arg("seed") = 0)
        .def("respond", &Model::respond, py::arg("task"), py::arg("prompt"), py::arg("world"),
             py::arg("vocab"), py::arg("steps") = 16, py::arg("temperature") = 0.0,
             py::arg("seed") = 0);
}

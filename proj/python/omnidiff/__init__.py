"""Mask-based multimodal discrete diffusion over toy token worlds."""

from ._omnidiff import (  # noqa: F401
    IdRange,
    Modality,
    Model,
    OmnidiffError,
    PairedSample,
    SegmentSpec,
    SpeechTask,
    Task,
    ToyWorld,
    Vocabulary,
    adaptive_init_length,
    assemble_sequence,
    build_vocabulary,
    corrupt,
    make_dataset,
    mask_ratio,
    parse_sequence,
    render_image_toy,
    speech_to_text,
)

__all__ = [
    "IdRange",
    "Modality",
    "Model",
    "OmnidiffError",
    "PairedSample",
    "SegmentSpec",
    "SpeechTask",
    "Task",
    "ToyWorld",
    "Vocabulary",
    "adaptive_init_length",
    "assemble_sequence",
    "build_vocabulary",
    "corrupt",
    "make_dataset",
    "mask_ratio",
    "parse_sequence",
    "render_image_toy",
    "speech_to_text",
]

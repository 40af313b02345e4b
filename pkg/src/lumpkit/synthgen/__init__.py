from lumpkit.synthgen.dataset import SynthConfig, SynthResult, generate_reference_corpus
from lumpkit.synthgen.models import InstanceModel, Part, categories, make_instance
from lumpkit.synthgen.render import RenderConfig, render_view, rotation_matrix

__all__ = [
    "SynthConfig",
    "SynthResult",
    "generate_reference_corpus",
    "InstanceModel",
    "Part",
    "categories",
    "make_instance",
    "RenderConfig",
    "render_view",
    "rotation_matrix",
]

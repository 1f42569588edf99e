"""stitchwork: embroidery preview engine.

Two translation methods behind one API: per-color-region style transfer and a
cycle-consistent adversarial translator with an embedding channel.  Exposed as
a library (sklearn-style estimators in :mod:`stitchwork.estimators`), a CLI
(``stitchwork``), and an HTTP preview service.
"""

from .tensor import GraphError, ShapeError, Tensor, no_grad
from .nn import conv2d, conv2d_transpose, instance_norm, sigmoid, tanh_act
from .spectral import SpectralState, spectral_normalize
from .optim import AdamState, adam_step
from .gradcheck import grad_check
from .weights import load_weights, save_weights

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "GraphError",
    "ShapeError",
    "SpectralState",
    "Tensor",
    "adam_step",
    "conv2d",
    "conv2d_transpose",
    "grad_check",
    "instance_norm",
    "load_weights",
    "no_grad",
    "save_weights",
    "sigmoid",
    "spectral_normalize",
    "tanh_act",
]

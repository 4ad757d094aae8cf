"""Python surface of the sensekit WSD toolkit's core operations."""

from ._core import (
    __version__,
    attention,
    cosine,
    glu,
    layer_norm,
    layer_weighted,
    matmul,
    softmax,
)

__all__ = [
    "__version__",
    "attention",
    "cosine",
    "glu",
    "layer_norm",
    "layer_weighted",
    "matmul",
    "softmax",
]

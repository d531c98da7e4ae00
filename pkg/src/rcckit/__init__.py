"""rcckit: learning causal direction by classifying distribution embeddings.

Samples of variable pairs are featurized with random-Fourier-feature mean
embeddings, a tree ensemble is trained on synthetic labeled pairs, and its
class probabilities yield an antisymmetric causation score. The same recipe
with three-variable contexts reconstructs small causal DAGs. A verification
harness checks the kernel approximation and convergence behavior the
construction relies on.
"""

from . import causal, cli, embedding, forest, model_io, synthgen

__version__ = "0.1.0"

__all__ = ["causal", "cli", "embedding", "forest", "model_io", "synthgen", "__version__"]

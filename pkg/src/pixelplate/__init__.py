"""Inverse design of pixelated capacitive-coupling plates.

147-bit genomes encode mirrored pixel plates; evaluators (closed-form oracle,
trained residual-CNN surrogate, or ingested S-parameter data) score them; and
binary particle swarm optimization searches for a requested frequency/coupling
target. See README.md for the CLI walk-through.
"""

__version__ = "0.1.0"

"""sketchrec: explainable stroke-level sketch recognition.

Strokes are embedded (shape + order + location), fused over a dynamic
stroke graph, softly assigned to learnable semantic-component memory
keys, and classified by a transformer; the assignment makes every
prediction explainable in terms of the components it detected.
"""

__version__ = "0.1.0"

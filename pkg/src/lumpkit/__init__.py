"""Quantify the lumpy similarity structure of image corpora and build training sets with it.

The package has three layers:

* corpus analysis — rank/frequency statistics (`freqstats`), pairwise-distance
  structure (`descriptors`, `distances`, `simstruct`), similarity graphs vs.
  geometric null graphs (`graphs`), and the statistical test battery (`stats`);
* dataset construction — frequency plans and view plans (`sampler`), hill-climbing
  subset selection (`optimizer`), and a deterministic synthetic multi-view image
  generator (`synthgen`);
* harnesses — a linear probe standing in for GPU-scale learners (`probe`), analysis
  pipelines (`pipelines`), and the `lumpkit` CLI (`cli`).
"""

__version__ = "0.1.0"

from lumpkit.errors import LumpkitError

__all__ = ["LumpkitError", "__version__"]

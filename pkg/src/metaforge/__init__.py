"""Guided meta-analysis workbench.

Workflow: scope a research question, register and review documents,
extract evidence and quality judgments through dynamic forms, triage
epistemic concerns into study groups, then pool each group with a
random-effects model and render quantile-dotplot forest plots.
"""

__version__ = "0.1.0"

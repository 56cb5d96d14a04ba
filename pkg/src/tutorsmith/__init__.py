"""tutorsmith: teach a tutoring agent by demonstration and feedback.

The package induces executable, hierarchical model-tracing programs for
step-based tutoring interfaces from worked demonstrations and binary
correctness feedback, estimates its own certainty on unseen steps, and
ships a simulated ideal-tutor harness plus an authoring service for live
teaching.
"""

__version__ = "0.1.0"

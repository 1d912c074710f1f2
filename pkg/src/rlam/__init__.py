"""Forward-mode differentiation and continuity refinement types for a real-valued lambda calculus."""

__version__ = "0.1.0"

"""mfskit: sparse minimizers of norm-regularized fitting problems over
fundamental-solution dictionaries (method of fundamental solutions)."""

__version__ = "0.1.0"

from .backend import BACKEND  # noqa: F401

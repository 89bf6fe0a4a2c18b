"""Solver kernel selection.

The compiled extension ``_ckernels`` is used when it was built; otherwise the
numpy twin in ``_pykernels`` is loaded.
"""

import importlib

from . import _pykernels


def load(name: str):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _pykernels
    if name == "cython":
        return importlib.import_module("possprev._ckernels")
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    try:
        return load("cython"), "cython"
    except ImportError:
        return _pykernels, "python"


impl, BACKEND = _select()

"""Kernel backend selection.

The compiled extension is preferred when importable; set
``BUDGETLAB_KERNEL=python`` (or ``cython``) to force a backend. Both
implement the same draw protocol and produce bit-identical trajectories.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py
from .fitness import FitnessSpec

_FORCED = os.environ.get("BUDGETLAB_KERNEL", "auto").lower()

if _FORCED in ("python", "py"):
    _kernels = _kernels_py
elif _FORCED in ("cython", "c", "compiled"):
    from . import _kernels_cy as _kernels  # raises if the extension is missing
else:
    try:
        from . import _kernels_cy as _kernels
    except ImportError:
        _kernels = _kernels_py

KIND_CODES = {"linear": _kernels_py.LINEAR, "onemax": _kernels_py.ONEMAX,
              "binval": _kernels_py.BINVAL, "leadingones": _kernels_py.LEADINGONES,
              "zigzag": _kernels_py.ZIGZAG}
ALGO_CODES = {"rls": _kernels_py.RLS, "ea": _kernels_py.EA, "sa": _kernels_py.SA}


def kernel_backend() -> str:
    """Name of the active backend: 'cython' or 'python'."""
    return _kernels.BACKEND


def spec_codes(spec: FitnessSpec):
    """(kind code, weight array) for the kernels; weights only where needed."""
    code = KIND_CODES[spec.kind]
    if spec.kind == "linear":
        return code, np.asarray(spec.coefficients, dtype=np.float64)
    if spec.kind == "binval":
        with np.errstate(over="ignore"):
            w = np.power(2.0, np.arange(1, spec.n + 1, dtype=np.float64))
        return code, w
    return code, None


def algo_codes(algo, n: int):
    code = ALGO_CODES[algo.kind]
    if algo.kind == "ea":
        return code, algo.resolved_mutation_rate(n)
    if algo.kind == "sa":
        return code, algo.resolved_temperature(n)
    return code, 0.0


def simulate_path(algo, spec: FitnessSpec, bits0, steps: int, bit_generator,
                  kernels=None):
    """Run one trajectory on the active (or given) kernel backend.

    ``bits0`` may be None for uniform random initialisation drawn from the
    stream itself.
    """
    if algo.kind == "sa" and spec.n < 2:
        raise ValueError("sa needs n >= 2 for its 2-bit neighbourhood")
    kind_code, coeffs = spec_codes(spec)
    algo_code, param = algo_codes(algo, spec.n)
    k = kernels if kernels is not None else _kernels
    return k.run_trajectory(algo_code, param, kind_code, spec.n, coeffs,
                            bits0, steps, bit_generator)

"""Kernel backend selection.

The hot kernels (pairwise path costs, rotation exp/log batches, Sinkhorn
scaling) exist twice: numba-jitted loops in ``_accel_nb`` and vectorized
numpy in ``_accel_np``.  The environment variable ``PATHFLOW_BACKEND``
picks one:

    PATHFLOW_BACKEND=numba   force the jitted kernels (error if numba missing)
    PATHFLOW_BACKEND=numpy   force the pure-numpy fallback
    unset / auto             numba when importable, numpy otherwise

``benchmarks/bench_backends.py`` compares the two directly.
"""

import os

from . import _accel_np

_CHOICE = os.environ.get("PATHFLOW_BACKEND", "auto").strip().lower() or "auto"
if _CHOICE not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"PATHFLOW_BACKEND must be 'numba', 'numpy' or unset, got {_CHOICE!r}"
    )

_impl = None
if _CHOICE in ("auto", "numba"):
    try:
        from . import _accel_nb as _impl
    except ImportError:
        if _CHOICE == "numba":
            raise
        _impl = None
if _impl is None:
    _impl = _accel_np

BACKEND = "numba" if _impl is not _accel_np else "numpy"

wrap_angles = _accel_np.wrap_angles
so3_exp_batch = _impl.so3_exp_batch
so3_log_batch = _impl.so3_log_batch
so3_angle_batch = _impl.so3_angle_batch
torus_cost_matrix = _impl.torus_cost_matrix
so3_cost_matrix = _impl.so3_cost_matrix
sinkhorn_log = _impl.sinkhorn_log


def backend():
    """Name of the active kernel backend, 'numba' or 'numpy'."""
    return BACKEND


def set_worker_cap(threads):
    """Cap the numba thread pool.

    The kernels themselves run single-threaded, so a cap of 1 (the
    default) needs no action; only an explicit higher cap touches the
    numba threading layer."""
    if BACKEND != "numba" or threads is None:
        return
    threads = int(threads)
    if threads <= 1:
        return
    import numba

    numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))

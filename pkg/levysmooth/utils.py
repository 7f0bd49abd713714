from __future__ import annotations

import logging
import math
import multiprocessing
import os
from functools import lru_cache
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from scipy import integrate

from levysmooth.base import LevySmoothError

if TYPE_CHECKING:  # pragma: no cover
    from typing import Any, Callable, List, Optional, Sequence, Tuple, TypeVar

    T = TypeVar("T")

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "LEVYSMOOTH_THREADS"

# Cutoffs in s = log(1/x) for the small-jump integrals, x down to e^{-512}.
DIVERGENCE_CUTOFFS: Tuple[float, ...] = tuple(16.0 * 2**k for k in range(6))
DIVERGENCE_GROWTH = 0.1
DIVERGENCE_SUCCESSIVE = 3
DIVERGENCE_CEILING = 1e12


def default_threads() -> int:
    """Reads the default worker count from ``LEVYSMOOTH_THREADS``.

    Returns:
        The number of workers, 1 if the variable is unset or invalid.
    """
    value = os.environ.get(THREADS_ENV_VAR, "1")
    try:
        threads = int(value)
    except ValueError:
        logger.warning(f"Ignoring invalid {THREADS_ENV_VAR}={value!r}")
        return 1
    return max(threads, 1)


def substream_rng(
    seed: int, substream: int, branch: Optional[int] = None
) -> np.random.Generator:
    """Builds the generator addressed by ``(seed, substream[, branch])``.

    The same address always yields the same stream; different addresses
    yield statistically independent streams, whatever the order in which
    they are created.

    Args:
        seed: Master seed of the experiment.
        substream: Index of the substream (grid point, sample batch...).
        branch: Optional second-level index inside a substream.

    Returns:
        A Philox-backed numpy generator.
    """
    entropy = [int(seed), int(substream)]
    if branch is not None:
        entropy.append(int(branch))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def _call_with_retries(
    method: Callable[..., T], args: Sequence[Any], index: int, max_exception_retries: int
) -> Optional[T]:
    for attempt in range(max_exception_retries + 1):
        try:
            return method(*args)
        except Exception as e:
            logging.error(f"Attempt {attempt + 1} failed for task {index}: {e}")
            logging.exception("Exception occurred")
    return None


def worker_constructor(
    method: Callable[..., T],
    tasks: Sequence[Sequence[Any]],
    max_exception_retries: int = 4,
) -> Callable[[Any, Any], None]:
    """Create a worker target function for processing tasks with retry functionality.

    Only task indices travel through the queues; the worker reads the task
    arguments from ``tasks``, which forked workers inherit.

    Args:
        method: The function to be executed by the worker.
        tasks: Argument tuples, addressed by index.
        max_exception_retries: Maximum number of retries for handling exceptions.

    Returns:
        A worker function that processes task indices from a queue and puts
            ``(index, result)`` pairs in another queue.
    """

    def worker(task_queue: Any, result_queue: Any) -> None:
        while True:
            index = task_queue.get()
            if index is None:
                break
            try:
                result = _call_with_retries(
                    method, tasks[index], index, max_exception_retries
                )
            except Exception as e:  # pragma: no cover
                logging.error(f"Error processing task {index}: {e}")
                logging.exception("Exception ocurred")
                result = None
            result_queue.put((index, result))

    return worker


def run_tasks(
    method: Callable[..., T],
    tasks: Sequence[Sequence[Any]],
    n_workers: Optional[int] = None,
    max_exception_retries: int = 4,
) -> List[T]:
    """Evaluates ``method(*task)`` for every task, possibly in parallel.

    Results are returned in task order, so they never depend on the
    scheduling of the workers. Parallel execution requires the ``fork``
    start method; otherwise tasks run in the calling process.

    Args:
        method: The function to evaluate.
        tasks: Argument tuples.
        n_workers: Number of worker processes. Defaults to ``default_threads()``.
        max_exception_retries: Retries per task before giving up.

    Returns:
        The list of results.

    Raises:
        LevySmoothError: If a task failed on every attempt.
    """
    n_workers = n_workers or default_threads()
    n_workers = min(n_workers, len(tasks))
    results: List[Optional[T]] = [None] * len(tasks)

    if n_workers <= 1 or "fork" not in multiprocessing.get_all_start_methods():
        for index, args in enumerate(tasks):
            results[index] = _call_with_retries(
                method, args, index, max_exception_retries
            )
    else:
        context = multiprocessing.get_context("fork")
        task_queue = context.Queue()
        result_queue = context.Queue()

        for index in range(len(tasks)):
            task_queue.put(index)

        worker_target = worker_constructor(method, tasks, max_exception_retries)
        workers = [
            context.Process(target=worker_target, args=(task_queue, result_queue))
            for _ in range(n_workers)
        ]
        for worker in workers:
            worker.start()

        try:
            for _ in range(len(tasks)):
                index, result = result_queue.get()
                results[index] = result
        finally:
            for _ in workers:
                task_queue.put(None)
            for worker in workers:
                worker.join()

    failed = [i for i, result in enumerate(results) if result is None]
    if failed:
        raise LevySmoothError(f"Tasks {failed} failed after all retries")
    return results  # type: ignore[return-value]


class PartialIntegrals(NamedTuple):
    """Outcome of an integral over ``[0, inf)`` probed at dyadic cutoffs."""

    value: float
    abs_error: float
    finite: bool
    cutoffs: Tuple[float, ...]
    partials: Tuple[float, ...]


def growth_diverges(
    partials: Sequence[float],
    growth: float = DIVERGENCE_GROWTH,
    successive: int = DIVERGENCE_SUCCESSIVE,
    ceiling: float = DIVERGENCE_CEILING,
) -> bool:
    """Divergence heuristic on a sequence of partial integrals.

    A sequence diverges if some partial exceeds ``ceiling`` or if
    ``successive`` consecutive refinements each grow the partial by at
    least ``growth`` (relative).
    """
    values = np.asarray(partials, dtype=float)
    if np.any(~np.isfinite(values)) or np.any(np.abs(values) > ceiling):
        return True
    run = 0
    for previous, current in zip(values[:-1], values[1:]):
        if previous > 0 and current >= (1 + growth) * previous:
            run += 1
            if run >= successive:
                return True
        else:
            run = 0
    return False


def integrate_dyadic_cutoffs(
    integrand: Callable[[float], float],
    cutoffs: Sequence[float] = DIVERGENCE_CUTOFFS,
    growth: float = DIVERGENCE_GROWTH,
    successive: int = DIVERGENCE_SUCCESSIVE,
    ceiling: float = DIVERGENCE_CEILING,
) -> PartialIntegrals:
    """Integrates a nonnegative function over ``[0, inf)`` by growing cutoffs.

    The integral is accumulated on ``[0, S_0], [S_0, S_1], ...`` and the
    partial sums are fed to :func:`growth_diverges`. A divergent integral
    returns ``value = inf``.

    Args:
        integrand: Nonnegative function of one variable.
        cutoffs: Increasing upper limits ``S_k``.
        growth: Relative growth per refinement that counts as divergent.
        successive: Number of consecutive growing refinements required.
        ceiling: Hard ceiling on any partial.

    Returns:
        The partial integrals and the verdict.
    """

    def guarded(s: float) -> float:
        value = integrand(s)
        if not math.isfinite(value):
            return 10 * ceiling
        return value

    partials: List[float] = []
    total = 0.0
    abs_error = 0.0
    lower = 0.0
    for upper in cutoffs:
        piece, err = integrate.quad(guarded, lower, upper, limit=200)
        total += piece
        abs_error += err
        partials.append(total)
        lower = upper
        if total > ceiling:
            break

    finite = not growth_diverges(partials, growth, successive, ceiling)
    if not finite:
        logger.warning(
            f"Integral declared divergent, partials {[f'{p:.4g}' for p in partials]}"
        )
        return PartialIntegrals(
            math.inf, 0.0, False, tuple(cutoffs[: len(partials)]), tuple(partials)
        )

    remainder, err = integrate.quad(guarded, cutoffs[-1], np.inf, limit=200)
    return PartialIntegrals(
        total + remainder,
        abs_error + err,
        True,
        tuple(cutoffs[: len(partials)]),
        tuple(partials),
    )


@lru_cache(maxsize=16)
def _leggauss(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def gauss_legendre(a: float, b: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to ``[a, b]``."""
    nodes, weights = _leggauss(n)
    half = 0.5 * (b - a)
    return 0.5 * (b + a) + half * nodes, half * weights


def dyadic_shells(
    lo_exponent: int, hi_exponent: int, n: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Concatenated Gauss-Legendre rules on ``[2^j, 2^{j+1}]``.

    Args:
        lo_exponent: Exponent of the first shell's left edge.
        hi_exponent: Exponent of the last shell's right edge.
        n: Nodes per shell.

    Returns:
        Nodes and weights covering ``[2^lo_exponent, 2^hi_exponent]``.
    """
    nodes, weights = [], []
    for j in range(lo_exponent, hi_exponent):
        x, w = gauss_legendre(2.0**j, 2.0 ** (j + 1), n)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def log_trapezoid(t: Sequence[float], values: Sequence[float]) -> float:
    """Trapezoid rule for ``int values dt/t`` on a positive grid."""
    t = np.asarray(t, dtype=float)
    order = np.argsort(t)
    return float(
        integrate.trapezoid(np.asarray(values, dtype=float)[order], np.log(t[order]))
    )

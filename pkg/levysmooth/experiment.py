"""Experiment configurations and their artefacts.

An experiment is a JSON object naming one operation, the specs it acts on,
its numeric parameters and a mandatory seed:

.. code-block:: json

    {
        "name": "psi-cauchy",
        "operation": "psi",
        "seed": 7,
        "process": {"variant": "stable", "beta": 1.0, "c": 1.0},
        "function": {"variant": "indicator", "K": 0.0},
        "parameters": {"n": 100000, "t_grid": [0.0, 0.5, 0.75]},
        "output": "results"
    }

:func:`run` writes ``<output>/<name>.json`` and ``<output>/<name>.csv`` once
the operation has finished, so a failing configuration leaves no partial
output.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from levysmooth.base import (
    BaseReport,
    BaseTableWriter,
    InsufficientDataError,
    LevySmoothError,
    SpecValidationError,
    jsonable,
)
from levysmooth.function_space import (
    displacement_energy,
    evaluate,
    function_from_dict,
    norms,
)
from levysmooth.interpolation import (
    SequenceElement,
    default_holder_grid,
    default_sequence_grid,
    geiss_hujo_check,
    interp_norm_holder,
    k_functional_holder,
    seq_interp_norm,
    seq_k_functional,
)
from levysmooth.levy_model import (
    bg_index,
    hartman_wintner_liminf,
    measure_from_dict,
    moment,
    tail_mass,
)
from levysmooth.malliavin import d12_norm_sq
from levysmooth.smoothness import (
    default_t_grid,
    fit_exponent,
    membership_statistic,
    psi_curve,
    small_time_exceedance,
)
from levysmooth.stable_process import (
    CompoundPoissonProcess,
    make_process,
    process_from_dict,
)
from levysmooth.utils import default_threads
from levysmooth.verify import verify

if TYPE_CHECKING:  # pragma: no cover
    from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Type

    from levysmooth.function_space import FunctionSpec
    from levysmooth.levy_model import LevyMeasureSpec
    from levysmooth.stable_process import ProcessSpec

logger = logging.getLogger(__name__)

OPERATIONS = (
    "moments",
    "bg-index",
    "sample",
    "density",
    "d12",
    "psi",
    "fit-theta",
    "probe",
    "kfunc",
    "fn",
    "verify",
)
FN_ACTIONS = ("eval", "norms", "displacement")
COUPLES = ("holder", "sequence")

EXIT_OK = 0
EXIT_FAILED_CHECKS = 1
EXIT_VALIDATION = 2
EXIT_DIVERGENT = 3
EXIT_COMPUTATION = 4

_MISSING = object()


def parse_json(text: str, path: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecValidationError(path, f"malformed JSON ({e.msg} at line {e.lineno}, column {e.colno})")


def load_json_argument(value: Any, path: str) -> Any:
    """Parses inline JSON, or reads it from ``value`` when that names a ``.json`` file."""
    if not isinstance(value, str):
        return value
    if value.endswith(".json"):
        try:
            return parse_json(Path(value).read_text(encoding="UTF8"), path)
        except OSError as e:
            raise SpecValidationError(path, f"cannot read {value}: {e.strerror}")
    return parse_json(value, path)


class Parameters:
    """Typed access to the ``parameters`` object of a configuration."""

    def __init__(self, values: Mapping[str, Any]):
        self.values = dict(values)

    @staticmethod
    def path(key: str) -> str:
        return f"parameters.{key}"

    def get(self, key: str, default: Any = _MISSING) -> Any:
        value = self.values.get(key)
        if value is None:
            if default is _MISSING:
                raise SpecValidationError(self.path(key), "missing field")
            return default
        return value

    def get_float(self, key: str, default: Any = _MISSING) -> Any:
        value = self.get(key, default)
        if value is default:
            return value
        try:
            return float(value)
        except (TypeError, ValueError):
            raise SpecValidationError(self.path(key), f"expected a number, got {value!r}")

    def get_int(self, key: str, default: Any = _MISSING) -> Any:
        value = self.get(key, default)
        if value is default:
            return value
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise SpecValidationError(self.path(key), f"expected an integer, got {value!r}")
        return int(value)

    def get_floats(self, key: str, default: Any = _MISSING) -> Any:
        value = self.get(key, default)
        if value is default:
            return value
        if not isinstance(value, (list, tuple)):
            raise SpecValidationError(self.path(key), "expected a list of numbers")
        result = []
        for i, item in enumerate(value):
            try:
                result.append(float(item))
            except (TypeError, ValueError):
                raise SpecValidationError(f"{self.path(key)}[{i}]", f"expected a number, got {item!r}")
        return result

    def get_choice(self, key: str, choices: Sequence[str], default: Any = _MISSING) -> Any:
        value = self.get(key, default)
        if value not in choices:
            raise SpecValidationError(
                self.path(key), f"expected one of {', '.join(choices)}, got {value!r}"
            )
        return value

    def get_bool(self, key: str, default: bool = False) -> bool:
        value = self.get(key, default)
        if not isinstance(value, bool):
            raise SpecValidationError(self.path(key), f"expected true or false, got {value!r}")
        return value


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment.

    Attributes:
        name: Stem of the artefact files.
        operation: One of :data:`OPERATIONS`.
        seed: Master seed; there is no wall-clock seeding.
        process: Process spec, for the operations that sample or integrate.
        measure: Lévy measure spec; derived from the process when omitted.
        function: Function spec.
        parameters: Numeric parameters of the operation.
        output: Artefact folder.
        threads: Worker processes, ``LEVYSMOOTH_THREADS`` when None.
        timestamp: Whether CSV files start with a ``# generated`` line.
    """

    name: str
    operation: str
    seed: int
    process: Optional[ProcessSpec] = None
    measure: Optional[LevyMeasureSpec] = None
    function: Optional[FunctionSpec] = None
    parameters: Dict[str, Any] = field(default_factory=dict)
    output: Path = Path(".")
    threads: Optional[int] = None
    timestamp: bool = True

    @classmethod
    def from_dict(cls, data: Any) -> ExperimentConfig:
        """Validates a JSON object into a configuration.

        Raises:
            SpecValidationError: With the JSON path of the first invalid field.
        """
        if not isinstance(data, dict):
            raise SpecValidationError("$", "expected a JSON object")

        operation = data.get("operation")
        if operation not in OPERATIONS:
            raise SpecValidationError("operation", f"unknown operation {operation!r}")

        if "seed" not in data:
            raise SpecValidationError("seed", "missing field, a seed is mandatory")
        seed = data["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise SpecValidationError("seed", f"expected an integer >= 0, got {seed!r}")

        name = data.get("name", operation)
        if not isinstance(name, str) or not name or "/" in name:
            raise SpecValidationError("name", f"expected a file stem, got {name!r}")

        threads = data.get("threads")
        if threads is not None and (
            isinstance(threads, bool) or not isinstance(threads, int) or threads < 1
        ):
            raise SpecValidationError("threads", f"expected an integer >= 1, got {threads!r}")

        parameters = data.get("parameters", {})
        if not isinstance(parameters, dict):
            raise SpecValidationError("parameters", "expected a JSON object")

        output = data.get("output", ".")
        if not isinstance(output, str):
            raise SpecValidationError("output", f"expected a folder path, got {output!r}")

        timestamp = data.get("timestamp", True)
        if not isinstance(timestamp, bool):
            raise SpecValidationError("timestamp", f"expected true or false, got {timestamp!r}")

        specs = {}
        for key, parse in (
            ("process", process_from_dict),
            ("measure", measure_from_dict),
            ("function", function_from_dict),
        ):
            spec = load_json_argument(data.get(key), key)
            specs[key] = parse(spec, key) if spec else None

        return cls(
            name=name,
            operation=operation,
            seed=seed,
            **specs,
            parameters=parameters,
            output=Path(output),
            threads=threads,
            timestamp=timestamp,
        )

    @classmethod
    def from_file(cls, path: Path | str) -> ExperimentConfig:
        path = Path(path)
        try:
            text = path.read_text(encoding="UTF8")
        except OSError as e:
            raise SpecValidationError("$", f"cannot read {path}: {e.strerror}")
        return cls.from_dict(parse_json(text, "$"))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "operation": self.operation,
            "seed": self.seed,
            "process": self.process.to_dict() if self.process else None,
            "measure": self.measure.to_dict() if self.measure else None,
            "function": self.function.to_dict() if self.function else None,
            "parameters": self.parameters,
        }

    @property
    def n_workers(self) -> int:
        return self.threads or default_threads()

    @property
    def params(self) -> Parameters:
        return Parameters(self.parameters)

    def require(self, spec: str) -> Any:
        value = getattr(self, spec)
        if value is None:
            raise SpecValidationError(spec, f"missing field, required by {self.operation}")
        return value

    def levy_measure(self) -> LevyMeasureSpec:
        if self.measure is not None:
            return self.measure
        if self.process is not None:
            return self.process.levy_measure()
        raise SpecValidationError("measure", f"missing field, required by {self.operation}")


# Tables


class MomentTable(BaseTableWriter):
    dtypes = {"xi": float, "value": float, "finite": bool, "abs_error": float, "method": str}
    sort_fields = ["xi"]
    filename = "moments.csv"


class HartmanWintnerTable(BaseTableWriter):
    dtypes = {"u": float, "ratio": float}
    sort_fields = ["u"]
    filename = "hartman_wintner.csv"


class SampleTable(BaseTableWriter):
    dtypes = {"index": int, "value": float}
    sort_fields = ["index"]
    filename = "sample.csv"


class DensityTable(BaseTableWriter):
    dtypes = {"x": float, "p": float}
    sort_fields = ["x"]
    filename = "density.csv"


class DisplacementTable(BaseTableWriter):
    dtypes = {"x": float, "g": float, "error": float}
    sort_fields = ["x"]
    filename = "displacement.csv"


class PsiTable(BaseTableWriter):
    dtypes = {"t": float, "psi": float, "stderr": float, "n": int}
    sort_fields = ["t"]
    filename = "psi.csv"


class ExceedanceTable(BaseTableWriter):
    dtypes = {"t": float, "probability": float}
    sort_fields = ["t"]
    filename = "exceedance.csv"


class KFunctionalTable(BaseTableWriter):
    dtypes = {"t": float, "lower": float, "upper": float}
    sort_fields = ["t"]
    filename = "kfunc.csv"


class FunctionValueTable(BaseTableWriter):
    dtypes = {"x": float, "value": float}
    sort_fields = ["x"]
    filename = "function.csv"


class NormTable(BaseTableWriter):
    dtypes = {"norm": str, "value": float, "method": str, "upper_bound": float}
    sort_fields: List[str] = []
    filename = "norms.csv"


class VerifyTable(BaseTableWriter):
    dtypes = {"check_id": str, "passed": bool, "relation": str}
    sort_fields: List[str] = []
    filename = "verify.csv"


class OperationResult(NamedTuple):
    result: Dict[str, Any]
    table: Type[BaseTableWriter]
    rows: List[Dict[str, Any]]
    divergent: bool = False
    failed: bool = False


@dataclass(frozen=True)
class ExperimentReport(BaseReport):
    name: str
    operation: str
    seed: int
    config: Dict[str, Any]
    result: Dict[str, Any]
    divergent: bool


# Operations


def _moments(config: ExperimentConfig) -> OperationResult:
    measure = config.levy_measure()
    xis = config.params.get_floats("xi", [0.5, 1.0, 1.5, 2.0])
    values = [moment(measure, xi) for xi in xis]
    rows = [
        {"xi": v.xi, "value": v.value, "finite": v.finite, "abs_error": v.abs_error, "method": v.method}
        for v in values
    ]
    result = {"measure": measure.to_dict(), "moments": rows, "tail_mass": tail_mass(measure)}
    return OperationResult(result, MomentTable, rows, divergent=not all(v.finite for v in values))


def _bg_index(config: ExperimentConfig) -> OperationResult:
    measure = config.levy_measure()
    index = bg_index(measure)
    u_grid = config.params.get_floats("u_grid", None)
    criterion = hartman_wintner_liminf(measure, u_grid)
    rows = [{"u": u, "ratio": r} for u, r in zip(criterion.u, criterion.ratio)]
    result = {
        "measure": measure.to_dict(),
        "bg_index": jsonable(index),
        "hartman_wintner_liminf": criterion.liminf,
        "bounded_density_criterion": criterion.bounded_density_criterion,
    }
    return OperationResult(result, HartmanWintnerTable, rows)


def _sample(config: ExperimentConfig) -> OperationResult:
    process = make_process(config.require("process"))
    t = config.params.get_float("t", 1.0)
    n = config.params.get_int("n", 1000)
    batch = process.sample(t, n, config.seed, 0)
    rows = [{"index": i, "value": v} for i, v in enumerate(batch.values)]
    quartiles = np.quantile(batch.values, [0.25, 0.5, 0.75])
    result = {
        "process": process.params.to_dict(),
        "t": t,
        "n": n,
        "quartiles": quartiles,
    }
    return OperationResult(result, SampleTable, rows)


def _density(config: ExperimentConfig) -> OperationResult:
    process = make_process(config.require("process"))
    t = config.params.get_float("t", 1.0)
    if isinstance(process, CompoundPoissonProcess):
        support, probs = process.law(t)
        rows = [{"x": x, "p": p} for x, p in zip(support, probs)]
        kind = "probability"
    else:
        x = config.params.get_floats("x", list(np.linspace(-5.0, 5.0, 101)))
        rows = [{"x": xi, "p": v} for xi, v in zip(x, process.pdf(np.asarray(x), t))]
        kind = "density"
    return OperationResult({"process": process.params.to_dict(), "t": t, "kind": kind}, DensityTable, rows)


def _d12(config: ExperimentConfig) -> OperationResult:
    report = d12_norm_sq(
        config.require("function"),
        make_process(config.require("process")),
        config.measure,
        mode=config.params.get_choice("mode", ("density", "mc"), "density"),
        samples=config.params.get_int("samples", None),
        seed=config.seed,
        n_workers=config.n_workers,
    )
    rows = [{"x": x, "g": g, "error": e} for x, g, e in report.g_curve]
    return OperationResult(report.to_dict(), DisplacementTable, rows, divergent=not report.finite)


def _curve(config: ExperimentConfig):
    return psi_curve(
        config.require("function"),
        make_process(config.require("process")),
        config.params.get_floats("t_grid", list(default_t_grid())),
        config.params.get_int("n", 10**6),
        config.seed,
        config.n_workers,
    )


def _psi_rows(curve) -> List[Dict[str, Any]]:
    return [
        {"t": t, "psi": value, "stderr": error, "n": n}
        for t, value, error, n in curve.rows()
    ]


def _psi(config: ExperimentConfig) -> OperationResult:
    curve = _curve(config)
    return OperationResult(curve.to_dict(), PsiTable, _psi_rows(curve))


def _fit_theta(config: ExperimentConfig) -> OperationResult:
    curve = _curve(config)
    fit = fit_exponent(curve, log_correction=config.params.get_bool("log_correction"))
    result = {"curve": curve.to_dict(), "fit": fit.to_dict()}
    growing = False
    theta = config.params.get_float("theta", None)
    if theta is not None:
        membership = membership_statistic(curve, theta)
        result["membership"] = membership.to_dict()
        growing = membership.verdict == "growing"
    return OperationResult(result, PsiTable, _psi_rows(curve), divergent=growing)


def _probe(config: ExperimentConfig) -> OperationResult:
    report = small_time_exceedance(
        make_process(config.require("process")),
        config.params.get_float("beta_prime"),
        c=config.params.get_float("c", 1.0),
        t0=config.params.get_float("t0", 1.0),
    )
    rows = [{"t": t, "probability": p} for t, p in zip(report.grid, report.probabilities)]
    return OperationResult(report.to_dict(), ExceedanceTable, rows, divergent=not report.finite)


def load_sequence(value: Any) -> SequenceElement:
    """Builds a sequence element from a list of ``c_n``, ``{"c": [...]}`` or a JSON file."""
    path = Parameters.path("input")
    data = load_json_argument(value, path)
    if isinstance(data, dict):
        data = data.get("c")
    if not isinstance(data, list):
        raise SpecValidationError(path, "expected a list of squared norms c_n")
    try:
        return SequenceElement.from_list(data)
    except SpecValidationError as e:
        raise SpecValidationError(f"{path}{e.path[1:]}", e.message)
    except (TypeError, ValueError):
        raise SpecValidationError(path, "expected a list of numbers")


def _kfunc(config: ExperimentConfig) -> OperationResult:
    params = config.params
    couple = params.get_choice("couple", COUPLES)
    theta = params.get_float("theta")
    grid = params.get_floats("t_grid", None)
    if couple == "holder":
        f = config.require("function")
        t = default_holder_grid() if grid is None else np.asarray(grid)
        estimates = [k_functional_holder(f, s) for s in t]
        bracket = interp_norm_holder(f, theta, t)
        result = {"couple": couple, "function": f.to_dict(), "norm": bracket.to_dict()}
    else:
        a = load_sequence(params.get("input"))
        q = params.get_float("q", math.inf)
        t = default_sequence_grid() if grid is None else np.sort(np.asarray(grid))
        estimates = [seq_k_functional(a, s) for s in t]
        bracket = seq_interp_norm(a, theta, q, t)
        result = {"couple": couple, "c": list(a.c), "norm": bracket.to_dict()}
        ratio = geiss_hujo_check(a, theta, q)
        if ratio is not None:
            result["geiss_hujo"] = ratio.to_dict()
    rows = [{"t": e.t, "lower": e.lower, "upper": e.upper} for e in estimates]
    return OperationResult(result, KFunctionalTable, rows)


def _fn(config: ExperimentConfig) -> OperationResult:
    f = config.require("function")
    params = config.params
    action = params.get_choice("action", FN_ACTIONS)
    description = f.to_dict()
    if action == "eval":
        x = params.get_floats("x")
        rows = [{"x": xi, "value": evaluate(f, xi)} for xi in x]
        return OperationResult({"function": description, "action": action}, FunctionValueTable, rows)

    if action == "norms":
        report = norms(f, params.get_float("alpha", None), params.get_int("max_points", None))
        rows = []
        for name, value in (
            ("sup", report.sup_norm),
            ("holder_seminorm", report.holder_seminorm),
            ("bv", report.bv_norm),
        ):
            if value is not None:
                bound = math.nan if value.upper_bound is None else value.upper_bound
                rows.append({"norm": name, "value": value.value, "method": value.method, "upper_bound": bound})
        result = {"action": action, **report.to_dict(), "holder_norm": report.holder_norm}
        return OperationResult(result, NormTable, rows)

    interval = params.get_floats("interval", [0.0, 1.0])
    if len(interval) != 2:
        raise SpecValidationError(Parameters.path("interval"), "expected [a, b]")
    x = params.get_floats("x")
    rows = [
        {"x": xi, "g": displacement_energy(f, tuple(interval), xi), "error": 0.0} for xi in x
    ]
    result = {"function": description, "action": action, "interval": interval}
    return OperationResult(result, DisplacementTable, rows)


def _verify(config: ExperimentConfig) -> OperationResult:
    suite = config.parameters.get("suite")
    if suite is not None and not isinstance(suite, list):
        raise SpecValidationError(Parameters.path("suite"), "expected a list of check ids")
    try:
        report = verify(suite, config.seed, config.n_workers)
    except SpecValidationError as e:
        raise SpecValidationError(f"parameters.{e.path}", e.message)
    rows = [
        {"check_id": c.check_id, "passed": c.passed, "relation": c.relation} for c in report.checks
    ]
    result = {**report.to_dict(), "passed": report.passed, "failed": report.failed}
    return OperationResult(result, VerifyTable, rows, failed=not report.passed)


HANDLERS: Dict[str, Callable[[ExperimentConfig], OperationResult]] = {
    "moments": _moments,
    "bg-index": _bg_index,
    "sample": _sample,
    "density": _density,
    "d12": _d12,
    "psi": _psi,
    "fit-theta": _fit_theta,
    "probe": _probe,
    "kfunc": _kfunc,
    "fn": _fn,
    "verify": _verify,
}


CONFIG_FIELDS = ("$", "name", "operation", "seed", "process", "measure", "function", "parameters", "threads", "timestamp")


def config_path(path: str) -> str:
    """Maps the path of a library error onto the configuration object."""
    if path.split(".")[0].split("[")[0] in CONFIG_FIELDS:
        return path
    return Parameters.path(path)


def run(config: ExperimentConfig) -> int:
    """Runs an experiment and writes its artefacts.

    Returns:
        ``0`` on success, ``1`` when acceptance checks failed, ``2`` on a
        validation error (nothing is written), ``3`` when the result is a
        numeric-divergence verdict (artefacts are still written) and
        ``4`` when the computation itself failed (nothing is written).
    """
    logger.info(f"Running {config.operation} experiment '{config.name}' with seed {config.seed}")
    try:
        outcome = HANDLERS[config.operation](config)
    except SpecValidationError as e:
        logger.error(f"Invalid configuration at {config_path(e.path)}: {e.message}")
        return EXIT_VALIDATION
    except InsufficientDataError as e:
        logger.error(f"{config.operation} failed: {e}")
        return EXIT_VALIDATION
    except LevySmoothError as e:
        logger.error(f"Experiment '{config.name}' failed during {config.operation}\nError: {e}")
        return EXIT_COMPUTATION

    report = ExperimentReport(
        name=config.name,
        operation=config.operation,
        seed=config.seed,
        config=config.to_dict(),
        result=outcome.result,
        divergent=outcome.divergent,
    )
    report.write(config.output, f"{config.name}.json")
    table = outcome.table(config.output, filename=f"{config.name}.csv", timestamp=config.timestamp)
    table.add_rows(outcome.rows)
    table.write()

    if outcome.divergent:
        logger.warning(f"Experiment '{config.name}' ended with a divergence verdict")
        return EXIT_DIVERGENT
    if outcome.failed:
        logger.warning(f"Experiment '{config.name}' has failed checks")
        return EXIT_FAILED_CHECKS
    return EXIT_OK


def _run_validated(load: Callable[[], ExperimentConfig], overrides: Dict[str, Any]) -> int:
    try:
        config = load()
    except SpecValidationError as e:
        logger.error(f"Invalid configuration at {e.path}: {e.message}")
        return EXIT_VALIDATION
    return run(replace(config, **{k: v for k, v in overrides.items() if v is not None}))


def run_dict(data: Any, **overrides: Any) -> int:
    """Validates ``data`` into a configuration, applies ``overrides`` and runs it.

    Overrides set to None are ignored.
    """
    return _run_validated(lambda: ExperimentConfig.from_dict(data), overrides)


def run_file(path: Path | str, **overrides: Any) -> int:
    """Loads a JSON configuration file and runs it; see :func:`run_dict`."""
    return _run_validated(lambda: ExperimentConfig.from_file(path), overrides)

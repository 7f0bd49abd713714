"""Base modules for levysmooth

This module defines the exception hierarchy shared by the numerical
modules, and the BaseTableWriter and BaseReport classes, meant to be
inherited by the CSV and JSON artefacts produced by experiments.
"""

from __future__ import annotations

import json
import logging
import math
from abc import ABC
from dataclasses import asdict, is_dataclass
from datetime import datetime
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd

if TYPE_CHECKING:  # pragma: no cover
    from typing import Any, Dict, Iterable, List, Mapping, Optional

logger = logging.getLogger(__name__)


class LevySmoothError(Exception):
    """Root of the levysmooth exception hierarchy."""


class SpecValidationError(LevySmoothError, ValueError):
    """Raised when a JSON spec or a parameter is out of its valid range.

    Attributes:
        path: Dotted JSON path of the offending field.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


class QuadratureError(LevySmoothError, RuntimeError):
    """Raised when a quadrature exceeds its error ceiling.

    Attributes:
        abs_error: Absolute error estimate reported by the integrator.
        interval: Integration interval that failed.
    """

    def __init__(
        self, message: str, abs_error: float, interval: tuple[float, float]
    ):
        self.abs_error = abs_error
        self.interval = interval
        super().__init__(
            f"{message} (abs error {abs_error:.3e} on [{interval[0]}, {interval[1]}])"
        )


class InsufficientDataError(LevySmoothError, ValueError):
    """Raised when a fit has fewer usable points than required."""


def jsonable(value: Any) -> Any:
    """Converts a value into something ``json.dumps`` accepts.

    Non-finite floats are written as the strings ``"inf"``, ``"-inf"`` and
    ``"nan"`` so that reports stay valid JSON.
    """
    if is_dataclass(value) and not isinstance(value, type):
        return jsonable(asdict(value))
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


class BaseReport:
    """Mixin for dataclass reports that are written as JSON artefacts."""

    def to_dict(self) -> Dict[str, Any]:
        return jsonable(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write(self, folder: Path | str, filename: str) -> Path:
        """Writes the report as ``folder/filename``.

        Args:
            folder: Output folder, created if missing.
            filename: Name of the JSON file.

        Returns:
            The path of the written file.
        """
        folder = Path(folder)
        folder.mkdir(parents=True, exist_ok=True)
        path = folder / filename
        path.write_text(self.to_json() + "\n", encoding="UTF8")
        logger.info(f"Report written to:\n\t{path}")
        return path


class BaseTableWriter(ABC):
    """Base class for CSV artefacts associated with a typed table.

    This class provides the basic functionality to collect rows into a typed
    pandas DataFrame, sort them deterministically, and write them to a CSV
    file preceded by an optional generation-timestamp comment line.

    Attributes:
        dtypes: A dictionary mapping column names to their data types.
        sort_fields: A list of column names used for sorting the data.
        data_folder: The folder where the CSV file is stored.
        filename: The name of the CSV file. This should be defined in subclasses.
        timestamp: Whether to write the ``# generated`` header line.
        data: A pandas DataFrame that holds the rows to write.
    """

    dtypes: Dict[str, Any]
    sort_fields: List[str]
    data_folder: Path
    filename: str
    timestamp: bool = True

    def __init__(
        self,
        data_folder: Path | str,
        filename: Optional[str] = None,
        timestamp: Optional[bool] = None,
    ):
        """Initializes the writer with the specified data folder.

        Args:
            data_folder: The folder where the CSV file will be created.
            filename: Overrides the class-level file name.
            timestamp: Overrides the class-level timestamp flag.
        """
        self.data_folder = Path(data_folder)
        self.filename = filename or self.filename
        if timestamp is not None:
            self.timestamp = timestamp
        self.data_file: Path = self.data_folder / self.filename
        self.data = pd.DataFrame(
            {col: pd.Series(dtype=dtype) for col, dtype in self.dtypes.items()}
        )

    def check_data_folder(self) -> None:
        """Creates the output folder if it does not exist yet."""
        if not self.data_folder.is_dir():
            self.data_folder.mkdir(parents=True)
            logger.info(f"Using new folder:\n\t{self.data_folder}")
        else:
            logger.info(f"Using existing folder:\n\t{self.data_folder}")

    def add_rows(self, rows: Iterable[Mapping[str, Any]] | pd.DataFrame) -> None:
        """Appends rows to the table, casting them to the declared dtypes."""
        new = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows))
        if new.empty:
            return
        new = new[list(self.dtypes.keys())].astype(self.dtypes)
        if self.data.empty:
            self.data = new.reset_index(drop=True)
        else:
            self.data = pd.concat([self.data, new], ignore_index=True)

    def write(self) -> Path:
        """Sorts the table by ``sort_fields`` and writes it to disk.

        Returns:
            The path of the written file.
        """
        self.check_data_folder()
        data = self.data
        if self.sort_fields and not data.empty:
            data = data.sort_values(by=self.sort_fields, kind="mergesort")
        data = data.reset_index(drop=True)

        with open(self.data_file, "w", newline="", encoding="UTF8") as f:
            if self.timestamp:
                f.write(f"# generated {datetime.now().isoformat()}\n")
            data.to_csv(f, index=False, float_format="%.17g")

        logger.info(f"Table written to:\n\t{self.data_file}")
        return self.data_file

    def load_data(self) -> pd.DataFrame:
        """Loads the table back from the CSV file, skipping comment lines."""
        self.data = pd.read_csv(self.data_file, dtype=self.dtypes, comment="#")
        return self.data

"""Plain-text readers and writers for transform data and run outputs.

Every file is comma-separated with a one-line header, or ``key=value``
lines for the report and manifest.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .inversion import InversionReport, Reconstruction

__all__ = [
    "TransformFileError",
    "SampledTransform",
    "load_transform",
    "transform_value",
    "write_terms",
    "read_terms",
    "write_samples",
    "write_report",
    "write_keyvalue",
    "read_keyvalue",
    "fmt",
]


class TransformFileError(ValueError):
    def __init__(self, path, lineno: int | None, message: str):
        self.path = str(path)
        self.lineno = lineno
        where = f"{path}:{lineno}" if lineno is not None else str(path)
        super().__init__(f"{where}: {message}")


def fmt(x) -> str:
    """Shortest round-trip text for a number."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


@dataclass(frozen=True)
class SampledTransform:
    """Transform samples ``(p_i, F(p_i))`` with ``p_0 = 0``, interpolated
    piecewise linearly.

    Interpolation error adds to the declared noise level; queries outside
    ``[0, p_max]`` are rejected.
    """

    p: np.ndarray
    F: np.ndarray
    delta: float = 0.0

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        F = np.array(self.F, dtype=float)
        if p.ndim != 1 or p.shape != F.shape:
            raise ValueError("p and F must be 1-d arrays of equal length")
        if p.size < 3:
            raise ValueError("need at least 3 points")
        if p[0] != 0:
            raise ValueError("first p must be 0")
        if np.any(np.diff(p) <= 0):
            raise ValueError("p must be strictly increasing")
        p.setflags(write=False)
        F.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "F", F)

    @property
    def d(self) -> float:
        return float(self.p[-1])

    def value(self, p: float) -> float:
        return transform_value(self, p)


def transform_value(src: SampledTransform, p: float) -> float:
    if not 0 <= p <= src.d:
        raise ValueError(f"p={p!r} outside the data range [0, {src.d!r}]")
    i = int(np.searchsorted(src.p, p, side="right")) - 1
    if src.p[i] == p or i == src.p.size - 1:
        return float(src.F[i])
    x0, x1 = src.p[i], src.p[i + 1]
    y0, y1 = src.F[i], src.F[i + 1]
    return float(y0 + (y1 - y0) * (p - x0) / (x1 - x0))


def load_transform(path, delta: float = 0.0) -> SampledTransform:
    """Read a ``p,F`` file into a :class:`SampledTransform`.

    Raises
    ------
    TransformFileError
        For a missing file, bad header, malformed row or invalid ordering;
        the message carries the line number.
    """
    path = Path(path)
    if not path.is_file():
        raise TransformFileError(path, None, "file not found")
    ps: list[float] = []
    Fs: list[float] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["p", "F"]:
            raise TransformFileError(path, 1, 'expected header "p,F"')
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise TransformFileError(
                    path, lineno, f"expected 2 columns, got {len(row)}")
            try:
                p, F = float(row[0]), float(row[1])
            except ValueError:
                raise TransformFileError(
                    path, lineno, f"malformed row {row!r}") from None
            if not (np.isfinite(p) and np.isfinite(F)):
                raise TransformFileError(path, lineno, "non-finite value")
            if not ps and p != 0:
                raise TransformFileError(path, lineno, "first p must be 0")
            if ps and p <= ps[-1]:
                raise TransformFileError(
                    path, lineno, "p values must be strictly increasing")
            ps.append(p)
            Fs.append(F)
    if len(ps) < 3:
        raise TransformFileError(path, None, "need at least 3 points")
    return SampledTransform(np.array(ps), np.array(Fs), float(delta))


def _write_csv(path, header: Iterable[str], rows) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(x) for x in row])


def write_terms(path, recon: Reconstruction) -> None:
    _write_csv(path, ["amplitude", "rate"],
               zip(recon.amplitudes, recon.rates))


def read_terms(path) -> Reconstruction:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Reconstruction(data[:, 0], data[:, 1])


def write_samples(path, ts, values) -> None:
    _write_csv(path, ["t", "f_approx"], zip(ts, values))


def write_keyvalue(path, items: Mapping[str, object]) -> None:
    with Path(path).open("w") as fh:
        for key, value in items.items():
            text = fmt(value) if isinstance(value, (int, float, np.number)) \
                else str(value)
            fh.write(f"{key}={text}\n")


def read_keyvalue(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            out[key] = value
    return out


def write_report(path, report: InversionReport) -> None:
    items: dict[str, object] = {
        "n_delta": report.n_delta,
        "a_final": report.a_final,
        "m_final": report.m_final,
        "G_final": report.G_final,
        "threshold": report.threshold,
        "stop_reason": str(report.stop_reason),
    }
    for rec in report.iterations:
        items[f"iter_{rec.n}"] = ",".join(
            fmt(x) for x in (rec.a, rec.m, rec.G, rec.coeff_norm,
                             rec.solve_residual))
    items["wall_time_ms"] = round(report.wall_time * 1e3, 3)
    write_keyvalue(path, items)

"""Two-port S-parameter sweeps: Touchstone v1 ingestion and resonance extraction.

Externally produced sweeps (EM simulator exports or VNA measurements) enter the
pipeline here. The training label for a plate is the global |S21| maximum: its
frequency (the main resonance) and the |S21| level at that point, both in
GHz / dB.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import TouchstoneError

_UNIT_TO_GHZ = {"hz": 1e-9, "khz": 1e-6, "mhz": 1e-3, "ghz": 1.0}
_FORMATS = ("db", "ma", "ri")
_COLUMNS = 9  # f + four (S11, S21, S12, S22) value pairs


@dataclass(frozen=True, eq=False)
class SParamSweep:
    """Frequency-indexed |S11| / |S21| magnitudes in dB."""

    freqs_ghz: np.ndarray
    s11_db: np.ndarray
    s21_db: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.freqs_ghz, dtype=np.float64)
        s11 = np.asarray(self.s11_db, dtype=np.float64)
        s21 = np.asarray(self.s21_db, dtype=np.float64)
        if not (f.ndim == s11.ndim == s21.ndim == 1) or not (f.size == s11.size == s21.size):
            raise ValueError("freqs, s11 and s21 must be 1-D and the same length")
        if f.size < 2:
            raise ValueError("a sweep needs at least 2 samples")
        if not (np.diff(f) > 0).all():
            raise ValueError("frequencies must be strictly increasing")
        if not (np.isfinite(f).all() and np.isfinite(s11).all() and np.isfinite(s21).all()):
            raise ValueError("sweep values must be finite")
        object.__setattr__(self, "freqs_ghz", f)
        object.__setattr__(self, "s11_db", s11)
        object.__setattr__(self, "s21_db", s21)

    def __len__(self) -> int:
        return int(self.freqs_ghz.size)

    def __eq__(self, other):
        return (
            isinstance(other, SParamSweep)
            and np.array_equal(self.freqs_ghz, other.freqs_ghz)
            and np.array_equal(self.s11_db, other.s11_db)
            and np.array_equal(self.s21_db, other.s21_db)
        )


@dataclass(frozen=True)
class ResonancePoint:
    """Main resonance: frequency of the global |S21| maximum and its level."""

    f_res_ghz: float
    s21_db: float


def _pair_to_db(a: float, b: float, fmt: str, line_no: int) -> float:
    if fmt == "db":
        return a
    mag = abs(a) if fmt == "ma" else float(np.hypot(a, b))
    if fmt == "ma" and a < 0:
        raise TouchstoneError("MA magnitude must be nonnegative", line_no)
    if mag <= 0.0:
        raise TouchstoneError("zero magnitude has no dB representation", line_no)
    return float(20.0 * np.log10(mag))


def parse_touchstone(text) -> SParamSweep:
    """Parse a 2-port Touchstone v1 document into a sweep.

    Accepts str, bytes, or a readable file object. The option line
    ``# <unit> S <DB|MA|RI> R <ref>`` is required; `!` comments are skipped;
    data rows must carry 9 numeric columns in f, S11, S21, S12, S22 order.
    Errors name the offending 1-based line number.
    """
    if isinstance(text, bytes):
        try:
            content = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise TouchstoneError(f"not valid UTF-8 text: {exc}") from exc
    elif isinstance(text, str):
        content = text
    elif hasattr(text, "read"):
        raw = text.read()
        return parse_touchstone(raw)
    else:
        raise TypeError(f"cannot parse a {type(text).__name__}")

    fmt = None
    unit_scale = None
    freqs: list[float] = []
    s11: list[float] = []
    s21: list[float] = []

    for line_no, raw_line in enumerate(io.StringIO(content), start=1):
        line = raw_line.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("#"):
            if fmt is not None:
                raise TouchstoneError("duplicate option line", line_no)
            tokens = line[1:].split()
            if len(tokens) != 5:
                raise TouchstoneError(
                    "option line must read '# <unit> S <DB|MA|RI> R <ref>'", line_no
                )
            unit, param, fmt_token, r_token, ref = (t.lower() for t in tokens)
            if unit not in _UNIT_TO_GHZ:
                raise TouchstoneError(f"unsupported frequency unit {tokens[0]!r}", line_no)
            if param != "s":
                raise TouchstoneError(f"unsupported parameter type {tokens[1]!r}", line_no)
            if fmt_token not in _FORMATS:
                raise TouchstoneError(f"unsupported format token {tokens[2]!r}", line_no)
            if r_token != "r":
                raise TouchstoneError("expected 'R <ref>' after the format token", line_no)
            try:
                float(ref)
            except ValueError:
                raise TouchstoneError(f"reference impedance {tokens[4]!r} is not numeric", line_no)
            fmt = fmt_token
            unit_scale = _UNIT_TO_GHZ[unit]
            continue
        if fmt is None:
            raise TouchstoneError("data before the option line (missing '#' line)", line_no)
        fields = line.split()
        if len(fields) != _COLUMNS:
            raise TouchstoneError(f"expected {_COLUMNS} columns, got {len(fields)}", line_no)
        try:
            values = [float(v) for v in fields]
        except ValueError:
            raise TouchstoneError("malformed numeric value", line_no)
        f_ghz = values[0] * unit_scale
        if freqs and f_ghz <= freqs[-1]:
            raise TouchstoneError("frequencies must be strictly increasing", line_no)
        freqs.append(f_ghz)
        s11.append(_pair_to_db(values[1], values[2], fmt, line_no))
        s21.append(_pair_to_db(values[3], values[4], fmt, line_no))

    if fmt is None:
        raise TouchstoneError("missing option line")
    if len(freqs) < 2:
        raise TouchstoneError(f"need at least 2 data rows, found {len(freqs)}")
    return SParamSweep(np.array(freqs), np.array(s11), np.array(s21))


def write_touchstone(sweep: SParamSweep) -> str:
    """Canonical `.s2p` text: `# GHz S DB R 50`, 9 columns, 6 decimal places.

    The sweep carries magnitudes only, so angles are written as zero and the
    network is emitted as symmetric/reciprocal (S22 = S11, S12 = S21).
    """
    lines = ["# GHz S DB R 50"]
    for f, a, b in zip(sweep.freqs_ghz, sweep.s11_db, sweep.s21_db):
        lines.append(
            f"{f:.6f} {a:.6f} 0.000000 {b:.6f} 0.000000 {b:.6f} 0.000000 {a:.6f} 0.000000"
        )
    return "\n".join(lines) + "\n"


def extract_main_resonance(sweep: SParamSweep) -> ResonancePoint:
    """Sample with the maximum |S21|; ties resolve to the lowest frequency."""
    idx = int(np.argmax(sweep.s21_db))
    return ResonancePoint(float(sweep.freqs_ghz[idx]), float(sweep.s21_db[idx]))


def band_gap_filter(points, gap_lo_ghz: float, gap_hi_ghz: float) -> list[ResonancePoint]:
    """Drop points strictly inside the open interval (gap_lo, gap_hi); keep order."""
    if not gap_lo_ghz < gap_hi_ghz:
        raise ValueError("gap_lo must be below gap_hi")
    return [p for p in points if not (gap_lo_ghz < p.f_res_ghz < gap_hi_ghz)]

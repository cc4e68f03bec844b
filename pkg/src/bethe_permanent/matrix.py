"""Matrix and permutation helpers, seeded generation and text formats.

Matrices are plain ``float64`` numpy arrays of shape ``(n, n)`` with
nonnegative entries; :func:`as_square_matrix` is the single validation
gate used by every other module.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, ParseError, ShapeError

FORMATS = ("dense-text", "csv", "json")

_BIT_GENERATORS = {
    "pcg64": np.random.PCG64,
    "pcg64dxsm": np.random.PCG64DXSM,
    "philox": np.random.Philox,
    "sfc64": np.random.SFC64,
    "mt19937": np.random.MT19937,
}


@dataclass(frozen=True)
class RngSpec:
    """Seed plus bit-generator name; equal specs give equal streams.

    Independent child streams come from :meth:`spawn`, which uses numpy's
    ``SeedSequence`` so parallel workers never share a stream.
    """

    seed: int = 0
    algorithm: str = "pcg64"

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.algorithm.lower() not in _BIT_GENERATORS:
            raise DomainError(
                f"unknown RNG algorithm {self.algorithm!r}; "
                f"choose from {sorted(_BIT_GENERATORS)}"
            )

    def generator(self) -> np.random.Generator:
        bitgen = _BIT_GENERATORS[self.algorithm.lower()]
        return np.random.Generator(bitgen(np.random.SeedSequence(self.seed)))

    def spawn(self, count: int) -> list[RngSpec]:
        children = np.random.SeedSequence(self.seed).spawn(count)
        return [
            RngSpec(int(c.generate_state(2, np.uint64)[0]), self.algorithm)
            for c in children
        ]


RngLike = Union[RngSpec, np.random.Generator, int, None]


def as_generator(rng: RngLike) -> np.random.Generator:
    """Accept an RngSpec, a Generator, an int seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSpec):
        return rng.generator()
    if rng is None:
        return RngSpec().generator()
    return RngSpec(int(rng)).generator()


def as_square_matrix(m) -> np.ndarray:
    """Validate and convert ``m`` to a nonnegative square float64 array."""
    try:
        arr = np.array(m, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ShapeError(f"cannot interpret input as a matrix: {exc}") from exc
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ShapeError(f"expected a nonempty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("matrix entries must be finite")
    if np.any(arr < 0):
        raise DomainError("matrix entries must be nonnegative")
    return arr


def is_permutation(p) -> bool:
    p = np.asarray(p)
    if p.ndim != 1 or not np.issubdtype(p.dtype, np.integer):
        return False
    return np.array_equal(np.sort(p), np.arange(p.size))


def random_uniform_matrix(n: int, lo: float = 0.0, hi: float = 50.0,
                          rng: RngLike = None) -> np.ndarray:
    """n x n matrix with i.i.d. entries uniform on ``[lo, hi]``."""
    if n < 1:
        raise DomainError("n must be positive")
    if lo < 0:
        raise DomainError("lo must be nonnegative")
    if lo > hi:
        raise DomainError("lo must not exceed hi")
    return as_generator(rng).uniform(lo, hi, size=(n, n))


def random_permutation(n: int, rng: RngLike = None) -> np.ndarray:
    """Uniformly random permutation of ``range(n)`` (Fisher-Yates)."""
    if n < 1:
        raise DomainError("n must be positive")
    return as_generator(rng).permutation(n)


def _format_real(x: float) -> str:
    # repr gives the shortest string that round-trips a double exactly
    if x.is_integer() and abs(x) < 2**53 and not (x == 0 and np.signbit(x)):
        return str(int(x))
    return repr(float(x))


def _parse_real(token: str) -> float:
    try:
        return float(token)
    except ValueError as exc:
        raise ParseError(f"not a number: {token!r}") from exc


def serialize_matrix(m, fmt: str = "dense-text") -> bytes:
    m = as_square_matrix(m)
    n = m.shape[0]
    if fmt == "dense-text":
        lines = [str(n)] + [" ".join(_format_real(x) for x in row) for row in m]
        return ("\n".join(lines) + "\n").encode("ascii")
    if fmt == "csv":
        return "".join(",".join(_format_real(x) for x in row) + "\n" for row in m).encode("ascii")
    if fmt == "json":
        rows = [[float(x) for x in row] for row in m]
        return json.dumps({"n": n, "rows": rows}).encode("ascii")
    raise ParseError(f"unknown format {fmt!r}; choose from {FORMATS}")


def parse_matrix(text: Union[bytes, str], fmt: str = "dense-text") -> np.ndarray:
    """Parse a matrix from one of the supported formats.

    Raises ParseError for malformed text, ShapeError for ragged or
    non-square data and DomainError for negative entries.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("input is not valid UTF-8") from exc

    if fmt == "dense-text":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ParseError("empty input")
        try:
            n = int(lines[0].strip())
        except ValueError as exc:
            raise ParseError(f"first line must be an integer size, got {lines[0]!r}") from exc
        if n < 1:
            raise ParseError("matrix size must be positive")
        body = lines[1:]
        if len(body) != n:
            raise ShapeError(f"expected {n} rows, found {len(body)}")
        rows = [[_parse_real(tok) for tok in ln.split()] for ln in body]
    elif fmt == "csv":
        reader = csv.reader(io.StringIO(text))
        rows = [[_parse_real(tok.strip()) for tok in rec] for rec in reader if rec]
        n = len(rows)
        if n == 0:
            raise ParseError("empty input")
    elif fmt == "json":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
        if not isinstance(obj, dict) or "rows" not in obj:
            raise ParseError('expected an object with a "rows" field')
        rows = obj["rows"]
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise ParseError('"rows" must be a list of lists')
        n = obj.get("n", len(rows))
        if not isinstance(n, int) or len(rows) != n:
            raise ShapeError(f'"n" = {n!r} does not match {len(rows)} rows')
        for r in rows:
            for x in r:
                if isinstance(x, bool) or not isinstance(x, (int, float)):
                    raise ParseError(f"not a number: {x!r}")
    else:
        raise ParseError(f"unknown format {fmt!r}; choose from {FORMATS}")

    for r in rows:
        if len(r) != n:
            raise ShapeError(f"row of length {len(r)} in a matrix of size {n}")
    return as_square_matrix(rows)

"""Tableaux of linear forms and their generic-flag Cartan characters"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import sympy as sp

from ..errors import ValidationError
from ..utils import logger, rng_for

SHIPPED = {
    "so2s3": "so2s3.json",
    "d3-conical": "d3_conical.json",
    "z3-case2": "z3_case2.json",
}
RANK_RTOL = 1e-9


@dataclass(frozen=True)
class TableauMatrix:
    """Entries as coefficients: coeffs[row, col, m] is the pi_m coefficient of entry (row, col)."""

    name: str
    coeffs: np.ndarray
    pi_names: tuple[str, ...]
    expected: tuple[int, ...] | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs.shape[0], self.coeffs.shape[1]

    @property
    def columns(self) -> int:
        return self.coeffs.shape[1]


def _rank(rows: np.ndarray) -> int:
    if rows.size == 0:
        return 0
    sv = np.linalg.svd(rows, compute_uv=False)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > RANK_RTOL * sv[0]))


def tableau_rank(t: TableauMatrix) -> int:
    """Dimension of the span of all entries."""
    return _rank(t.coeffs.reshape(-1, t.coeffs.shape[2]))


def parse_tableau(data: dict, name: str = "tableau") -> TableauMatrix:
    """Tableau from its JSON form.

    Keys: "pi" (names of the free forms), "entries" (rows of strings),
    optional "params" (name -> value substituted before extraction),
    "definitions" (name -> expression in the pi's and params, usable in
    entries) and "expected" (characters to compare against).

    Raises:
        ValidationError: On a ragged matrix, unknown symbols or a non-linear entry
    """
    try:
        pi_names = tuple(data["pi"])
        entries = data["entries"]
    except (KeyError, TypeError) as e:
        raise ValidationError(f"{name}: tableau needs 'pi' and 'entries' ({e})") from None
    if not entries or len({len(row) for row in entries}) != 1:
        raise ValidationError(f"{name}: entries must be a non-empty rectangular matrix")

    pis = tuple(sp.Symbol(n, real=True) for n in pi_names)
    params = {str(k): v for k, v in (data.get("params") or {}).items()}
    scope = {n: s for n, s in zip(pi_names, pis)}
    scope.update({k: sp.Symbol(k, real=True) for k in params})
    subs = {scope[k]: sp.nsimplify(v) for k, v in params.items()}
    for key, expr in (data.get("definitions") or {}).items():
        scope[key] = sp.sympify(expr, locals=scope).subs(subs)

    rows, cols = len(entries), len(entries[0])
    coeffs = np.zeros((rows, cols, len(pis)))
    for i, row in enumerate(entries):
        for j, text in enumerate(row):
            expr = sp.expand(sp.sympify(str(text), locals=scope).subs(subs))
            stray = expr.free_symbols - set(pis)
            if stray:
                raise ValidationError(f"{name}: entry ({i}, {j}) has unknown symbols {sorted(map(str, stray))}")
            poly = sp.Poly(expr, *pis) if expr != 0 else None
            if poly is not None and (poly.total_degree() > 1 or poly.coeff_monomial(1) != 0):
                raise ValidationError(f"{name}: entry ({i}, {j}) is not linear in the pi's: {text}")
            for m, p in enumerate(pis):
                coeffs[i, j, m] = float(expr.coeff(p))
    expected = tuple(int(s) for s in data["expected"]) if "expected" in data else None
    return TableauMatrix(data.get("name", name), coeffs, pi_names, expected)


def load_tableau(name_or_path: str | Path) -> TableauMatrix:
    """A shipped tableau by name ("so2s3", "d3-conical", "z3-case2") or a JSON file.

    Raises:
        ValidationError: If the file is missing or malformed
    """
    key = str(name_or_path)
    if key in SHIPPED:
        text = resources.files("umbilic4.data").joinpath(SHIPPED[key]).read_text()
    else:
        path = Path(key)
        if not path.exists():
            raise ValidationError(
                f"Tableau '{key}' is neither a file nor one of {', '.join(SHIPPED)}"
            )
        text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{key}: invalid JSON ({e})") from e
    return parse_tableau(data, key)


@dataclass(frozen=True)
class CharacterResult:
    tableau: str
    characters: tuple[int, ...]
    rank: int
    trials: int
    seed: int
    expected: tuple[int, ...] | None

    @property
    def matches(self) -> bool | None:
        if self.expected is None:
            return None
        return self.characters == self.expected

    def to_json(self) -> dict:
        return {
            "tableau": self.tableau,
            "characters": list(self.characters),
            "rank": self.rank,
            "trials": self.trials,
            "seed": self.seed,
            "expected": list(self.expected) if self.expected else None,
            "matches": self.matches,
        }


def cartan_characters(t: TableauMatrix, trials: int = 32, seed: int = 0) -> CharacterResult:
    """Characters from random flags.

    Each trial mixes the columns by a random matrix; the first k new columns
    span a space of forms of dimension c_k. Taking the largest c_k over all
    trials, s_k = c_k - c_(k-1).

    Raises:
        ValidationError: If trials < 1
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    n = t.columns
    best = [0] * (n + 1)
    for trial in range(trials):
        g = rng_for(seed, trial).standard_normal((n, n))
        mixed = np.einsum("rjm,jk->rkm", t.coeffs, g)
        for k in range(1, n + 1):
            best[k] = max(best[k], _rank(mixed[:, :k, :].reshape(-1, mixed.shape[2])))
    chars = tuple(best[k] - best[k - 1] for k in range(1, n + 1))
    logger.info(f"{t.name}: characters {chars} over {trials} flags")
    return CharacterResult(t.name, chars, tableau_rank(t), trials, seed, t.expected)

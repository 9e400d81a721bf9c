"""Quaternions, the double cover of SO(4), and its finite subgroups

A pair of unit quaternions [l, r] acts on x in H = R^4 by x -> l x conj(r).
Polyhedral groups are built exactly over Q(sqrt2, sqrt5); the cyclic and
dihedral families leave that field and are built in floating point, with
matrix entries rounded to 8 decimals as element identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations

import numpy as np

from .errors import ClosureError, ValidationError
from .field import ONE, ZERO, AlgebraicScalar, is_exact, scalar_to_json
from .utils import logger

UNIT_TOL = 1e-12
ROTATION_TOL = 1e-10
KEY_DECIMALS = 8

Scalar = AlgebraicScalar | float


def _as_scalar(x, exact: bool) -> Scalar:
    if exact:
        return AlgebraicScalar.coerce(x)
    return float(x)


@dataclass(frozen=True)
class Quaternion:
    """w + x i + y j + z k, exact or float components"""

    w: Scalar
    x: Scalar = 0.0
    y: Scalar = 0.0
    z: Scalar = 0.0

    @classmethod
    def exact(cls, w=0, x=0, y=0, z=0) -> Quaternion:
        return cls(*(AlgebraicScalar.coerce(c) for c in (w, x, y, z)))

    @classmethod
    def numeric(cls, w=0.0, x=0.0, y=0.0, z=0.0) -> Quaternion:
        return cls(float(w), float(x), float(y), float(z))

    @property
    def components(self) -> tuple[Scalar, Scalar, Scalar, Scalar]:
        return (self.w, self.x, self.y, self.z)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, AlgebraicScalar) for c in self.components)

    def to_float(self) -> Quaternion:
        return Quaternion.numeric(*(float(c) for c in self.components))

    def __mul__(self, other: Quaternion) -> Quaternion:
        return quat_mul(self, other)

    def __neg__(self) -> Quaternion:
        return Quaternion(*(-c for c in self.components))

    def scale(self, k) -> Quaternion:
        return Quaternion(*(c * k for c in self.components))

    def conj(self) -> Quaternion:
        return quat_conj(self)

    def norm2(self) -> Scalar:
        return quat_norm2(self)

    def is_zero(self) -> bool:
        if self.is_exact:
            return not any(self.components)
        return all(abs(float(c)) < UNIT_TOL for c in self.components)

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.components) + ")"


def _unify(a: Quaternion, b: Quaternion) -> tuple[Quaternion, Quaternion]:
    if a.is_exact and b.is_exact:
        return a, b
    return a.to_float(), b.to_float()


def quat_mul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product with i^2 = j^2 = k^2 = -1, ij = k, jk = i, ki = j."""
    a, b = _unify(a, b)
    a0, a1, a2, a3 = a.components
    b0, b1, b2, b3 = b.components
    return Quaternion(
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    )


def quat_conj(q: Quaternion) -> Quaternion:
    return Quaternion(q.w, -q.x, -q.y, -q.z)


def quat_norm2(q: Quaternion) -> Scalar:
    return q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z


def quat_inverse(q: Quaternion) -> Quaternion:
    n = quat_norm2(q)
    if (isinstance(n, AlgebraicScalar) and not n) or (not isinstance(n, AlgebraicScalar) and n == 0):
        raise ValidationError("zero quaternion has no inverse")
    return quat_conj(q).scale(1 / n)


def quat_pow(q: Quaternion, n: int) -> Quaternion:
    if n < 0:
        return quat_pow(quat_inverse(q), -n)
    result = Quaternion.exact(1) if q.is_exact else Quaternion.numeric(1)
    for _ in range(n):
        result = result * q
    return result


def is_unit(q: Quaternion) -> bool:
    n = quat_norm2(q)
    if isinstance(n, AlgebraicScalar):
        return n == 1
    return abs(n - 1.0) < UNIT_TOL


def plus_automorphism(q: Quaternion) -> Quaternion:
    """Apply sqrt5 -> -sqrt5 to every component (the p -> p+ map)."""
    if not q.is_exact:
        raise ValidationError("the sqrt5 automorphism needs exact components")
    return Quaternion(*(c.conjugate_sqrt5() for c in q.components))


def _first_nonzero_sign(q: Quaternion) -> int:
    for c in q.components:
        if isinstance(c, AlgebraicScalar):
            if c:
                return c.sign()
        elif abs(c) > UNIT_TOL:
            return 1 if c > 0 else -1
    return 0


@dataclass(frozen=True)
class RotationPair:
    """[l, r] = {(l, r), (-l, -r)}, canonicalized so `left` starts positive."""

    left: Quaternion
    right: Quaternion

    def __post_init__(self):
        left, right = _unify(self.left, self.right)
        if _first_nonzero_sign(left) < 0:
            left, right = -left, -right
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    def __mul__(self, other: RotationPair) -> RotationPair:
        return RotationPair(self.left * other.left, self.right * other.right)


I4_KEYS = tuple((i, j) for i in range(4) for j in range(4))


@dataclass(frozen=True)
class SO4Matrix:
    """4x4 rotation matrix, entries row-major, exact or float"""

    entries: tuple

    def __post_init__(self):
        if len(self.entries) != 16:
            raise ValidationError("SO4Matrix needs 16 entries")

    @classmethod
    def from_rows(cls, rows) -> SO4Matrix:
        flat = [rows[i][j] for i, j in I4_KEYS]
        if all(is_exact(x) for x in flat):
            return cls(tuple(AlgebraicScalar.coerce(x) for x in flat))
        return cls(tuple(float(x) for x in flat))

    @classmethod
    def from_numpy(cls, a: np.ndarray) -> SO4Matrix:
        return cls(tuple(float(x) for x in np.asarray(a, dtype=float).reshape(16)))

    @classmethod
    def identity(cls, exact: bool = True) -> SO4Matrix:
        return cls(tuple(_as_scalar(1 if i == j else 0, exact) for i, j in I4_KEYS))

    @property
    def is_exact(self) -> bool:
        return all(isinstance(x, AlgebraicScalar) for x in self.entries)

    def __getitem__(self, ij: tuple[int, int]) -> Scalar:
        i, j = ij
        return self.entries[4 * i + j]

    def to_numpy(self) -> np.ndarray:
        return np.array([float(x) for x in self.entries], dtype=float).reshape(4, 4)

    def to_float(self) -> SO4Matrix:
        return SO4Matrix(tuple(float(x) for x in self.entries))

    def transpose(self) -> SO4Matrix:
        return SO4Matrix(tuple(self[j, i] for i, j in I4_KEYS))

    def __matmul__(self, other: SO4Matrix) -> SO4Matrix:
        if self.is_exact and other.is_exact:
            out = []
            for i, j in I4_KEYS:
                acc = ZERO
                for k in range(4):
                    a = self.entries[4 * i + k]
                    b = other.entries[4 * k + j]
                    if a and b:
                        acc = acc + a * b
                out.append(acc)
            return SO4Matrix(tuple(out))
        return SO4Matrix.from_numpy(self.to_numpy() @ other.to_numpy())

    def __neg__(self) -> SO4Matrix:
        return SO4Matrix(tuple(-x for x in self.entries))

    def key(self) -> tuple:
        """Hashable identity: exact entries, or floats rounded to 8 decimals."""
        if self.is_exact:
            return self.entries
        return tuple(round(float(x), KEY_DECIMALS) + 0.0 for x in self.entries)

    def det(self) -> Scalar:
        if not self.is_exact:
            return float(np.linalg.det(self.to_numpy()))
        total = ZERO
        for perm in permutations(range(4)):
            inversions = sum(1 for a in range(4) for b in range(a + 1, 4) if perm[a] > perm[b])
            term = ONE
            for i in range(4):
                term = term * self[i, perm[i]]
                if not term:
                    break
            if term:
                total = total + (term if inversions % 2 == 0 else -term)
        return total

    def to_json(self) -> list:
        return [scalar_to_json(x) for x in self.entries]


def is_rotation(m: SO4Matrix) -> bool:
    """M^T M = I and det M = 1, exactly or within 1e-10."""
    if m.is_exact:
        return (m.transpose() @ m).key() == SO4Matrix.identity().key() and m.det() == 1
    a = m.to_numpy()
    return bool(
        np.max(np.abs(a.T @ a - np.eye(4))) < ROTATION_TOL
        and abs(np.linalg.det(a) - 1.0) < ROTATION_TOL
    )


def rotation_from_pair(p: RotationPair) -> SO4Matrix:
    """Matrix of x -> l x conj(r) in the basis {1, i, j, k}.

    Raises:
        ValidationError: If either quaternion is not a unit
    """
    if not (is_unit(p.left) and is_unit(p.right)):
        raise ValidationError(f"rotation pair needs unit quaternions, got {p.left}, {p.right}")
    exact = p.left.is_exact
    rbar = quat_conj(p.right)
    columns = []
    for j in range(4):
        e = [_as_scalar(0, exact)] * 4
        e[j] = _as_scalar(1, exact)
        columns.append((p.left * Quaternion(*e) * rbar).components)
    return SO4Matrix(tuple(columns[j][i] for i, j in I4_KEYS))


# -- binary polyhedral groups -------------------------------------------------

_HALF = Fraction(1, 2)


def _q(w=0, x=0, y=0, z=0) -> Quaternion:
    return Quaternion.exact(w, x, y, z)


def omega() -> Quaternion:
    """(1 + i + j + k)/2, order 6."""
    return _q(_HALF, _HALF, _HALF, _HALF)


def octa_generator() -> Quaternion:
    """(1 + i)/sqrt2."""
    h = AlgebraicScalar(0, _HALF)
    return Quaternion(h, h, ZERO, ZERO)


def icosa_generator() -> Quaternion:
    """(tau^-1 + tau i + j)/2, order 5."""
    tau = AlgebraicScalar.tau()
    return Quaternion(tau.inverse() * _HALF, tau * _HALF, AlgebraicScalar(_HALF), ZERO)


def _cyclic_element(n: int, k: int, exact: bool) -> Quaternion:
    """cos(2 pi k/n) + k sin(2 pi k/n), exact when the angle allows."""
    if exact:
        step = Fraction(k % n, n)
        table = {
            Fraction(0): (1, 0), Fraction(1, 4): (0, 1),
            Fraction(1, 2): (-1, 0), Fraction(3, 4): (0, -1),
        }
        if step in table:
            c, s = table[step]
            return _q(c, 0, 0, s)
        h = AlgebraicScalar(0, _HALF)
        eighths = {
            Fraction(1, 8): (h, h), Fraction(3, 8): (-h, h),
            Fraction(5, 8): (-h, -h), Fraction(7, 8): (h, -h),
        }
        c, s = eighths[step]
        return Quaternion(c, ZERO, ZERO, s)
    angle = 2 * math.pi * k / n
    return Quaternion.numeric(math.cos(angle), 0.0, 0.0, math.sin(angle))


def _cyclic(n: int) -> list[Quaternion]:
    exact = n in (1, 2, 4, 8)
    return [_cyclic_element(n, k, exact) for k in range(n)]


def _dedupe(quats: list[Quaternion]) -> list[Quaternion]:
    seen: dict = {}
    for q in quats:
        key = q.components if q.is_exact else tuple(round(float(c), KEY_DECIMALS) + 0.0 for c in q.components)
        seen.setdefault(key, q)
    return list(seen.values())


def build_binary_subgroup(label: str, n: int | None = None) -> list[Quaternion]:
    """Finite subgroup of the unit quaternions.

    C_n is generated by cos(2 pi/n) + k sin(2 pi/n); D_n = C_2n u i C_2n;
    T = D_2 u w D_2 u w^2 D_2 with w = (1+i+j+k)/2; O = T u (1+i)/sqrt2 T;
    I = g^0 T u ... u g^4 T with g = (tau^-1 + tau i + j)/2.

    Raises:
        ValidationError: On an unknown label or n < 1
    """
    label = label.upper()
    if label in ("C", "D"):
        if n is None or n < 1:
            raise ValidationError(f"{label}_n needs n >= 1")
        if label == "C":
            return _cyclic(n)
        base = _cyclic(2 * n)
        i = _q(0, 1) if base[0].is_exact else Quaternion.numeric(0, 1)
        return base + [i * q for q in base]
    d2 = build_binary_subgroup("D", 2)
    if label == "T":
        w = omega()
        return _dedupe(d2 + [w * q for q in d2] + [w * w * q for q in d2])
    if label == "O":
        t = build_binary_subgroup("T")
        g = octa_generator()
        return _dedupe(t + [g * q for q in t])
    if label == "I":
        t = build_binary_subgroup("T")
        g = icosa_generator()
        out = []
        power = _q(1)
        for _ in range(5):
            out.extend(power * q for q in t)
            power = power * g
        return _dedupe(out)
    raise ValidationError(f"Unknown binary subgroup '{label}' (expected C, D, T, O, I)")


# -- SO(4) subgroups -----------------------------------------------------------


@dataclass(frozen=True)
class FiniteGroup:
    """Finite subgroup of SO(4) with its generators"""

    label: str
    elements: tuple[SO4Matrix, ...]
    generators: tuple[SO4Matrix, ...]
    params: dict = field(default_factory=dict)
    exact: bool = True

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def display_label(self) -> str:
        if not self.params:
            return self.label
        inner = ",".join(f"{k}={v}" for k, v in self.params.items())
        suffix = "" if self.exact else ";float"
        return f"{self.label}({inner}{suffix})"

    def contains(self, m: SO4Matrix) -> bool:
        if self.exact and m.is_exact:
            return m.key() in {g.key() for g in self.elements}
        return m.to_float().key() in {g.to_float().key() for g in self.elements}


LABEL_ALIASES = {
    "T": "T", "𝕋": "T",
    "O": "O", "𝕆": "O",
    "O+": "O+", "𝕆⁺": "O+", "𝕆+": "O+",
    "I": "I", "𝕀": "I",
    "I+": "I+", "𝕀⁺": "I+", "𝕀+": "I+",
    "cyclic": "cyclic", "cyclic-family": "cyclic",
    "dihedral": "dihedral", "dihedral-family": "dihedral",
}

ADVERTISED_ORDERS = {"T": 12, "O": 24, "O+": 24, "I": 60, "I+": 60}


def normalize_label(label: str) -> str:
    try:
        return LABEL_ALIASES[label]
    except KeyError:
        raise ValidationError(
            f"Unknown group label '{label}' (expected T, O, O+, I, I+, cyclic, dihedral)"
        ) from None


def _pairs_to_group(label: str, pairs: list[RotationPair], gens: list[RotationPair], params=None) -> FiniteGroup:
    seen: dict = {}
    for p in pairs:
        m = rotation_from_pair(p)
        seen.setdefault(m.key(), m)
    generators = tuple(rotation_from_pair(g) for g in gens)
    exact = all(m.is_exact for m in seen.values())
    return FiniteGroup(label, tuple(seen.values()), generators, dict(params or {}), exact)


def _validate_family(m: int, n: int, r: int, s: int) -> None:
    for name, value in (("m", m), ("n", n)):
        if value < 1 or value % 2 == 0:
            raise ValidationError(f"{name} must be a positive odd integer, got {value}")
    if r < 1:
        raise ValidationError(f"r must be >= 1, got {r}")
    if s % 2 == 0 or math.gcd(s, r) != 1:
        raise ValidationError(f"s must be odd and coprime to r, got s={s}, r={r}")


def _family(label: str, m: int, n: int, r: int, s: int, cap: int) -> FiniteGroup:
    _validate_family(m, n, r, s)
    a = math.pi / (m * r)
    b = math.pi / (n * r)
    p = Quaternion.numeric(math.cos(a), 0, 0, math.sin(a))
    q = Quaternion.numeric(math.cos(b), 0, 0, math.sin(b))
    one = Quaternion.numeric(1)
    gens = [
        RotationPair(p, quat_pow(q, s)),
        RotationPair(quat_pow(p, 2 * r), one),
        RotationPair(one, quat_pow(q, 2 * r)),
    ]
    if label == "dihedral":
        i = Quaternion.numeric(0, 1)
        gens.append(RotationPair(i, i))
    matrices = [rotation_from_pair(g) for g in gens]
    elements = closure(matrices, cap)
    return FiniteGroup(label, tuple(elements), tuple(matrices), {"m": m, "n": n, "r": r, "s": s}, False)


def build_so4_subgroup(label: str, params: dict | None = None, cap: int = 10000) -> FiniteGroup:
    """Finite subgroup of SO(4) without -I.

    Labels: T, O, O+, I, I+ (exact), cyclic / dihedral with params m, n, r, s
    (m, n odd; float). I+ pairs r+ with r, where + flips the sign of sqrt5.

    Raises:
        ValidationError: On unknown labels or invalid family parameters
    """
    label = normalize_label(label)
    params = dict(params or {})
    if label in ("cyclic", "dihedral"):
        try:
            m, n, r, s = (int(params[k]) for k in ("m", "n", "r", "s"))
        except KeyError as e:
            raise ValidationError(f"{label} family needs parameter {e}") from None
        group = _family(label, m, n, r, s, cap)
        logger.info(f"Built {group.display_label}: order {group.order}")
        return group
    if params:
        raise ValidationError(f"{label} takes no parameters")

    i, j, w = _q(0, 1), _q(0, 0, 1), omega()
    base_gens = [RotationPair(i, i), RotationPair(j, j), RotationPair(w, w)]
    if label == "T":
        pairs = [RotationPair(t, t) for t in build_binary_subgroup("T")]
        gens = base_gens
    elif label == "O":
        pairs = [RotationPair(o, o) for o in build_binary_subgroup("O")]
        g = octa_generator()
        gens = base_gens + [RotationPair(g, g)]
    elif label == "O+":
        t = build_binary_subgroup("T")
        tkeys = {q.components for q in t}
        pairs = [RotationPair(q, q) for q in t]
        pairs += [RotationPair(o, -o) for o in build_binary_subgroup("O") if o.components not in tkeys]
        g = octa_generator()
        gens = base_gens + [RotationPair(g, -g)]
    elif label == "I":
        pairs = [RotationPair(q, q) for q in build_binary_subgroup("I")]
        g = icosa_generator()
        gens = base_gens + [RotationPair(g, g)]
    else:
        pairs = [RotationPair(plus_automorphism(q), q) for q in build_binary_subgroup("I")]
        g = icosa_generator()
        gens = base_gens + [RotationPair(plus_automorphism(g), g)]
    group = _pairs_to_group(label, pairs, gens)
    logger.info(f"Built {label}: order {group.order}")
    return group


def closure(generators: list[SO4Matrix], cap: int = 10000) -> list[SO4Matrix]:
    """All products of the generators, in breadth-first discovery order.

    Raises:
        ClosureError: If more than `cap` distinct elements appear
        ValidationError: On an empty generator list
    """
    if not generators:
        raise ValidationError("closure needs at least one generator")
    exact = all(g.is_exact for g in generators)
    gens = generators if exact else [g.to_float() for g in generators]
    seen: dict = {}
    queue = []
    for g in gens:
        if g.key() not in seen:
            seen[g.key()] = g
            queue.append(g)
    head = 0
    while head < len(queue):
        x = queue[head]
        head += 1
        for g in gens:
            y = x @ g
            k = y.key()
            if k not in seen:
                seen[k] = y
                queue.append(y)
                if len(seen) > cap:
                    raise ClosureError(cap)
    return queue


def group_closure_order(elements: list[SO4Matrix], cap: int = 10000) -> int:
    """Order of the group generated by `elements`.

    Raises:
        ClosureError: If the order exceeds `cap` ("not closed at cap")
    """
    return len(closure(elements, cap))


def minus_identity(exact: bool = True) -> SO4Matrix:
    return -SO4Matrix.identity(exact)


def group_to_json(group: FiniteGroup) -> dict:
    return {
        "label": group.display_label,
        "order": group.order,
        "exact": group.exact,
        "params": group.params,
        "elements": [m.to_json() for m in group.elements],
    }

"""Fixed-step Runge-Kutta flows of structure-equation systems along coframe paths"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError
from ..utils import logger
from .systems import FlowSystem


@dataclass(frozen=True)
class Segment:
    """Move `length` along sum_a coeffs[a] E_a"""

    coeffs: tuple[float, ...]
    length: float

    def to_json(self) -> dict:
        return {"coeffs": list(self.coeffs), "length": self.length}


def parse_path(system: FlowSystem, path: list[dict]) -> list[Segment]:
    """Segments from [{"dir": a, "length": L} | {"coeffs": [...], "length": L}, ...].

    Directions are 1-based. Lengths may be negative (flow backwards).

    Raises:
        ValidationError: On a malformed segment or an out-of-range direction
    """
    if not isinstance(path, list):
        raise ValidationError("path must be a list of segments")
    segments = []
    for n, seg in enumerate(path):
        if not isinstance(seg, dict) or "length" not in seg:
            raise ValidationError(f"path segment {n} needs a 'length'")
        if ("dir" in seg) == ("coeffs" in seg):
            raise ValidationError(f"path segment {n} needs exactly one of 'dir' and 'coeffs'")
        if "dir" in seg:
            a = int(seg["dir"])
            if not 1 <= a <= system.directions:
                raise ValidationError(
                    f"path segment {n}: direction {a} out of range 1..{system.directions} for {system.label}"
                )
            coeffs = tuple(1.0 if k == a - 1 else 0.0 for k in range(system.directions))
        else:
            coeffs = tuple(float(c) for c in seg["coeffs"])
            if len(coeffs) != system.directions:
                raise ValidationError(
                    f"path segment {n}: {len(coeffs)} coefficients for {system.directions} directions"
                )
        length = float(seg["length"])
        if not math.isfinite(length):
            raise ValidationError(f"path segment {n}: length must be finite")
        segments.append(Segment(coeffs, length))
    return segments


def unit_path(direction: int = 1, length: float = 1.0) -> list[dict]:
    return [{"dir": direction, "length": length}]


@dataclass(frozen=True)
class BoundaryEvent:
    """Where a flow left its admissible region"""

    arclength: float
    segment: int
    reason: str
    state: dict[str, float]

    def to_json(self) -> dict:
        return {
            "arclength": self.arclength,
            "segment": self.segment,
            "reason": self.reason,
            "state": self.state,
        }


@dataclass
class Trajectory:
    """States along a path; `arclength` is the accumulated |length|"""

    system: str
    state_names: list[str]
    params: dict[str, float]
    arclength: np.ndarray
    states: np.ndarray
    conserved: dict[str, np.ndarray] = field(default_factory=dict)
    boundary: BoundaryEvent | None = None

    @property
    def final(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.state_names, self.states[-1])}

    def to_json(self, every: int = 1) -> dict:
        rows = list(range(0, len(self.arclength), max(1, every)))
        if rows[-1] != len(self.arclength) - 1:
            rows.append(len(self.arclength) - 1)
        return {
            "system": self.system,
            "state_names": self.state_names,
            "params": self.params,
            "steps": len(self.arclength) - 1,
            "final": self.final,
            "boundary": self.boundary.to_json() if self.boundary else None,
            "samples": [
                {
                    "arclength": float(self.arclength[i]),
                    "state": [float(v) for v in self.states[i]],
                    "conserved": {k: float(v[i]) for k, v in self.conserved.items()},
                }
                for i in rows
            ],
        }


def rk4_step(f, y0: np.ndarray, h: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step of dy/dt = f(y)."""
    k1 = f(y0)
    k2 = f(y0 + 0.5 * h * k1)
    k3 = f(y0 + 0.5 * h * k2)
    k4 = f(y0 + h * k3)
    return y0 + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def flow(system: FlowSystem, init: dict, path: list[dict], step: float = 1e-3) -> Trajectory:
    """Integrate the system along a piecewise-linear coframe path.

    Each segment is cut into ceil(|length| / step) equal RK4 steps. After each
    step the admissible region is checked; on leaving it the flow halts and
    the trajectory ends at the last admissible state with a BoundaryEvent.

    Args:
        system: The structure-equation system
        init: Initial state values, plus optional parameter values (default 0)
        path: Segments, see parse_path
        step: Maximal step size

    Raises:
        ValidationError: On a non-positive step or a malformed path
        DomainError: If the initial state is not admissible
    """
    if not step > 0:
        raise ValidationError("step must be positive")
    x, p = system.pack(init)
    system.check_admissible(x, p)
    segments = parse_path(system, path)

    tau = [0.0]
    states = [x.copy()]
    boundary = None
    for n, seg in enumerate(segments):
        if seg.length == 0:
            continue
        count = max(1, math.ceil(abs(seg.length) / step))
        h = seg.length / count
        coeffs = np.array(seg.coeffs)

        def rhs(y, coeffs=coeffs):
            with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
                return system.direction_field(y, p, coeffs)

        for _ in range(count):
            y = rk4_step(rhs, states[-1], h)
            reason = system.boundary(y, p)
            if reason is not None:
                boundary = BoundaryEvent(tau[-1], n, reason, system.unpack(states[-1]))
                logger.warn(f"{system.label}: flow halted at arclength {tau[-1]:.6g} ({reason})")
                break
            states.append(y)
            tau.append(tau[-1] + abs(h))
        if boundary is not None:
            break

    states_arr = np.array(states)
    conserved: dict[str, np.ndarray] = {}
    for row in states_arr:
        for label, value in system.conserved_values(row, p).items():
            conserved.setdefault(label, []).append(value)
    return Trajectory(
        system=system.label,
        state_names=system.state_names,
        params={n: float(v) for n, v in zip(system.param_names, p)},
        arclength=np.array(tau),
        states=states_arr,
        conserved={k: np.array(v) for k, v in conserved.items()},
        boundary=boundary,
    )


def conserved_report(system: FlowSystem, trajectory: Trajectory) -> dict[str, float]:
    """Max drift of each first integral along the trajectory.

    The drift is relative to the initial value, or absolute when that value
    vanishes (for example the first o2-case integral on r = 3v).

    Raises:
        ValidationError: On an empty trajectory
    """
    if len(trajectory.arclength) == 0:
        raise ValidationError("trajectory is empty")
    report = {}
    for q in system.conserved:
        values = trajectory.conserved[q.label]
        q0 = values[0]
        scale = abs(q0) if abs(q0) > 1e-12 else 1.0
        report[q.label] = float(np.max(np.abs(values - q0)) / scale)
    return report


def integrator_order(
    system: FlowSystem,
    init: dict,
    path: list[dict],
    steps: tuple[float, ...] = (0.04, 0.02, 0.01),
) -> dict:
    """Order of the worst conserved-quantity drift under step halving.

    Raises:
        ValidationError: If the system has no first integral or fewer than two steps
    """
    if not system.conserved:
        raise ValidationError(f"{system.label} has no conserved quantity to measure drift with")
    if len(steps) < 2:
        raise ValidationError("integrator_order needs at least two steps")
    drifts = []
    for h in steps:
        report = conserved_report(system, flow(system, init, path, h))
        drifts.append(max(report.values()))
    orders = [
        math.log(d1 / d2) / math.log(h1 / h2) if d1 > 0 and d2 > 0 else math.nan
        for (h1, d1), (h2, d2) in zip(zip(steps, drifts), zip(steps[1:], drifts[1:]))
    ]
    return {"steps": list(steps), "drifts": drifts, "orders": orders, "order": orders[-1]}


@dataclass
class MixedPartialReport:
    """Commutator defects of two-step flows under step halving"""

    system: str
    pair: tuple[int, int] | None
    steps: list[float]
    raw: list[float]
    raw_order: float | None
    corrected: list[float] | None = None
    corrected_order: float | None = None

    def to_json(self) -> dict:
        return {
            "system": self.system,
            "pair": list(self.pair) if self.pair else None,
            "steps": self.steps,
            "raw": self.raw,
            "raw_order": self.raw_order,
            "corrected": self.corrected,
            "corrected_order": self.corrected_order,
        }


def _order(values: list[float], steps: list[float]) -> float | None:
    if values[-2] <= 0 or values[-1] <= 0:
        return None
    return math.log(values[-2] / values[-1]) / math.log(steps[-2] / steps[-1])


def mixed_partial_check(
    system: FlowSystem,
    state: dict,
    pair: tuple[int, int] | None = None,
    steps: tuple[float, ...] = (2e-2, 1e-2, 5e-3),
) -> MixedPartialReport:
    """Flow a then b versus b then a, each for length h, from the same state.

    The raw defect is h^2 [F_a, F_b] + O(h^3). Where the frame brackets are
    known and the system carries no free parameters, the defect is also
    reported after subtracting h^2 times -sum_c dw_c(E_a, E_b) F_c, which
    leaves O(h^3) exactly when the structure equations are compatible.
    A single-direction system has no pair and a zero defect.

    Raises:
        ValidationError: On a bad pair or fewer than two steps
    """
    steps = [float(h) for h in steps]
    if len(steps) < 2:
        raise ValidationError("mixed_partial_check needs at least two steps")
    if system.directions < 2:
        zeros = [0.0] * len(steps)
        return MixedPartialReport(system.label, None, steps, zeros, None)
    a, b = pair or (1, 2)
    if not (1 <= a < b <= system.directions):
        raise ValidationError(f"pair must satisfy 1 <= a < b <= {system.directions}, got ({a}, {b})")

    x0, p = system.pack(state)
    system.check_admissible(x0, p)
    bracket = system.bracket_term(a, b, x0, p) if system.closed else None

    raw, corrected = [], []
    for h in steps:
        ab = flow(system, state, [{"dir": a, "length": h}, {"dir": b, "length": h}], step=h)
        ba = flow(system, state, [{"dir": b, "length": h}, {"dir": a, "length": h}], step=h)
        if ab.boundary or ba.boundary:
            raise ValidationError(f"{system.label}: mixed-partial flows left the admissible region at h={h}")
        delta = ab.states[-1] - ba.states[-1]
        raw.append(float(np.linalg.norm(delta)))
        if bracket is not None:
            corrected.append(float(np.linalg.norm(delta - h * h * bracket)))
    return MixedPartialReport(
        system=system.label,
        pair=(a, b),
        steps=steps,
        raw=raw,
        raw_order=_order(raw, steps),
        corrected=corrected if bracket is not None else None,
        corrected_order=_order(corrected, steps) if bracket is not None else None,
    )

"""Attrition models for moderator-versus-hate-core dynamics.

Three coupled-decay laws over state (H, M), H the hate-side strength and M
the moderation capacity, all parameters positive:

    square law   dH/dt = -m*M        dM/dt = -h*H
    linear law   dH/dt = -m*M*H      dM/dt = -h*H*M
    ambush law   dH/dt = -m*M*H      dM/dt = -h*H

Each law conserves a quantity Q along trajectories:

    square  Q = h*H^2 - m*M^2
    linear  Q = h*H   - m*M
    ambush  Q = H     - (m / 2h) * M^2

The sign of Q at t=0 decides the winner (positive: hate outlasts the
moderators), and |Q| fixes the survivor level of the winning side. The
state space is absorbing at zero: once a side is extinct nothing moves,
which matches all three vector fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    DegenerateScenarioError,
    PastExtinctionError,
    StepTooLargeError,
    UnsupportedLawError,
)


class Law(str, Enum):
    SQUARE = "square"
    LINEAR = "linear"
    AMBUSH = "ambush"


class Winner(str, Enum):
    MODERATORS = "moderators"
    HATE = "hate"
    STALEMATE = "stalemate"


class Outcome(str, Enum):
    HATE_EXTINCT = "hate_extinct"
    MODERATORS_EXTINCT = "moderators_extinct"
    STALEMATE = "stalemate"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class AttritionScenario:
    law: Law
    m: float  # moderation effectiveness
    h: float  # hate-side resilience / counterpressure
    H0: float
    M0: float

    def __post_init__(self) -> None:
        if not (self.m > 0 and self.h > 0):
            raise ValueError("rate constants m and h must be > 0")
        if self.H0 < 0 or self.M0 < 0:
            raise ValueError("initial levels must be >= 0")
        if not all(map(math.isfinite, (self.m, self.h, self.H0, self.M0))):
            raise ValueError("scenario parameters must be finite")


@dataclass(frozen=True)
class OutcomePrediction:
    winner: Winner
    threshold_quantity: float  # conserved quantity at t=0; sign picks the winner
    survivor_level: float  # terminal level of the winning side (0 for stalemate)


@dataclass(frozen=True)
class Trajectory:
    law: Law
    times: np.ndarray
    H: np.ndarray
    M: np.ndarray
    invariant_drift: float
    outcome: Outcome

    @property
    def final(self) -> tuple[float, float, float]:
        return float(self.times[-1]), float(self.H[-1]), float(self.M[-1])


def conserved_quantity(s: AttritionScenario, H: float, M: float) -> float:
    if s.law is Law.SQUARE:
        return s.h * H * H - s.m * M * M
    if s.law is Law.LINEAR:
        return s.h * H - s.m * M
    return H - (s.m / (2.0 * s.h)) * M * M


def _quantity_scale(s: AttritionScenario) -> float:
    """Additive magnitude of the conserved quantity's terms at t=0.

    Used as the denominator for relative drift so near-stalemate scenarios
    (where Q0 is a tiny difference of large terms) stay measurable.
    """
    if s.law is Law.SQUARE:
        return s.h * s.H0 * s.H0 + s.m * s.M0 * s.M0
    if s.law is Law.LINEAR:
        return s.h * s.H0 + s.m * s.M0
    return s.H0 + (s.m / (2.0 * s.h)) * s.M0 * s.M0


def characteristic_time(s: AttritionScenario) -> float:
    """Fastest initial relative timescale of the law; inf when nothing moves.

    dt around 1e-3 of this keeps fourth-order invariant drift far below
    the refusal threshold.
    """
    if s.law is Law.SQUARE:
        return 1.0 / math.sqrt(s.m * s.h)
    if s.law is Law.LINEAR:
        rate = max(s.m * s.M0, s.h * s.H0)
    else:  # ambush: dM = -h*H is absolute, so M's relative rate is h*H0/M0
        rate = max(s.m * s.M0, s.h * s.H0 / s.M0 if s.M0 > 0 else 0.0)
    return 1.0 / rate if rate > 0 else math.inf


def containment_capacity(M0: float, m: float, h: float) -> float:
    """Largest hate-core size a moderation pool M0 can drive extinct
    under the ambush law: (m / 2h) * M0^2."""
    if not (m > 0 and h > 0):
        raise ValueError("rate constants m and h must be > 0")
    if M0 < 0:
        raise ValueError("M0 must be >= 0")
    return (m / (2.0 * h)) * M0 * M0


def predict_outcome(s: AttritionScenario) -> OutcomePrediction:
    """Closed-form winner and survivor level from the conserved quantity.

    Degenerate starts (H0 = 0 or M0 = 0) carry no dynamics and are
    refused; integrate() handles them as frozen states if needed.
    """
    if s.H0 == 0 or s.M0 == 0:
        raise DegenerateScenarioError(
            f"H0={s.H0}, M0={s.M0}: trivially decided without dynamics"
        )
    q0 = conserved_quantity(s, s.H0, s.M0)
    if q0 > 0:
        winner = Winner.HATE
        if s.law is Law.SQUARE:
            survivor = math.sqrt(q0 / s.h)
        elif s.law is Law.LINEAR:
            survivor = q0 / s.h
        else:
            survivor = q0  # ambush Q is already in H units
    elif q0 < 0:
        winner = Winner.MODERATORS
        if s.law is Law.SQUARE:
            survivor = math.sqrt(-q0 / s.m)
        elif s.law is Law.LINEAR:
            survivor = -q0 / s.m
        else:
            survivor = math.sqrt(-q0 * 2.0 * s.h / s.m)
    else:
        winner = Winner.STALEMATE
        survivor = 0.0
    return OutcomePrediction(winner=winner, threshold_quantity=q0, survivor_level=survivor)


# ---------------------------------------------------------------------------
# square-law closed form


def extinction_time(s: AttritionScenario) -> float:
    """Time at which the losing side reaches zero (square law only).

    Stalemates decay forever, giving inf. Degenerate starts are already
    extinct at t=0.
    """
    if s.law is not Law.SQUARE:
        raise UnsupportedLawError(f"extinction_time has closed form for square only, not {s.law.value}")
    if s.H0 == 0 or s.M0 == 0:
        return 0.0
    omega = math.sqrt(s.m * s.h)
    q0 = conserved_quantity(s, s.H0, s.M0)
    if q0 == 0:
        return math.inf
    if q0 < 0:  # H crosses first
        ratio = (s.H0 * math.sqrt(s.h)) / (s.M0 * math.sqrt(s.m))
    else:
        ratio = (s.M0 * math.sqrt(s.m)) / (s.H0 * math.sqrt(s.h))
    return math.atanh(ratio) / omega


def closed_form(s: AttritionScenario, t: float) -> tuple[float, float]:
    """Exact (H, M) at time t for the square law.

    H(t) = H0 cosh(wt) - M0 sqrt(m/h) sinh(wt),
    M(t) = M0 cosh(wt) - H0 sqrt(h/m) sinh(wt),  w = sqrt(m h).

    Valid until the first side hits zero; beyond that the formulas go
    negative while the real system is absorbed, so PastExtinctionError.
    """
    if s.law is not Law.SQUARE:
        raise UnsupportedLawError(f"closed form available for square law only, not {s.law.value}")
    if t < 0:
        raise ValueError("t must be >= 0")
    t_ext = extinction_time(s)
    if t > t_ext:
        raise PastExtinctionError(f"t={t} is beyond extinction at t*={t_ext}")
    omega = math.sqrt(s.m * s.h)
    ch, sh = math.cosh(omega * t), math.sinh(omega * t)
    ratio = math.sqrt(s.m / s.h)
    H = s.H0 * ch - s.M0 * ratio * sh
    M = s.M0 * ch - (s.H0 / ratio) * sh
    # rounding at t = t_ext may leave a negative ulp on the vanishing side
    tol = 1e-12 * max(s.H0, s.M0, 1.0)
    if -tol < H < 0:
        H = 0.0
    if -tol < M < 0:
        M = 0.0
    return H, M


# ---------------------------------------------------------------------------
# numerical integration


def _derivative(law: Law, m: float, h: float):
    if law is Law.SQUARE:
        def f(H: float, M: float) -> tuple[float, float]:
            return -m * M, -h * H
    elif law is Law.LINEAR:
        def f(H: float, M: float) -> tuple[float, float]:
            return -m * M * H, -h * H * M
    else:
        def f(H: float, M: float) -> tuple[float, float]:
            return -m * M * H, -h * H
    return f


def _rk4_step(f, H: float, M: float, dt: float) -> tuple[float, float]:
    k1h, k1m = f(H, M)
    k2h, k2m = f(H + 0.5 * dt * k1h, M + 0.5 * dt * k1m)
    k3h, k3m = f(H + 0.5 * dt * k2h, M + 0.5 * dt * k2m)
    k4h, k4m = f(H + dt * k3h, M + dt * k3m)
    return (
        H + dt * (k1h + 2.0 * k2h + 2.0 * k3h + k4h) / 6.0,
        M + dt * (k1m + 2.0 * k2m + 2.0 * k3m + k4m) / 6.0,
    )


DRIFT_REFUSAL = 1e-3
EXTINCTION_REL = 1e-9


def integrate(
    s: AttritionScenario,
    dt: float | None = None,
    T: float | None = None,
    extinction_rel: float = EXTINCTION_REL,
) -> Trajectory:
    """Classical fourth-order Runge-Kutta with an absorbing zero boundary.

    Steps with fixed dt (default 1e-3 of the characteristic time) until T
    (default 100 characteristic times) or extinction. A step that drives a
    side negative is refined by bisection so the crossing time is located
    to 1e-10 relative, the crossing side is clamped to exactly zero, and
    integration stops: the vector fields freeze once either side is gone.
    Sides that only decay asymptotically (both in the linear law, H in the
    ambush law, both in any stalemate) count as extinct below
    extinction_rel of their starting level.

    invariant_drift is the largest relative deviation of the conserved
    quantity over accepted steps; past DRIFT_REFUSAL (1e-3) the run is
    refused with StepTooLargeError carrying a suggested dt.
    """
    tau = characteristic_time(s)
    if dt is None:
        if not math.isfinite(tau):
            dt = 1.0  # frozen scenario; any step shows nothing moving
        else:
            dt = 1e-3 * tau
    if T is None:
        T = 100.0 * tau if math.isfinite(tau) else 1.0
    if dt <= 0 or T <= 0:
        raise ValueError("dt and T must be > 0")

    law, m, h = s.law, s.m, s.h
    f = _derivative(law, m, h)
    H, M = float(s.H0), float(s.M0)
    times = [0.0]
    hs = [H]
    ms = [M]

    # degenerate starts are fixed points of all three laws
    if H == 0.0 or M == 0.0:
        if H == 0.0 and M == 0.0:
            outcome = Outcome.STALEMATE
        elif H == 0.0:
            outcome = Outcome.HATE_EXTINCT
        else:
            outcome = Outcome.MODERATORS_EXTINCT
        times.append(float(T))
        hs.append(H)
        ms.append(M)
        return Trajectory(law, np.array(times), np.array(hs), np.array(ms), 0.0, outcome)

    q0 = conserved_quantity(s, H, M)
    scale = _quantity_scale(s)
    drift = 0.0
    h_floor = extinction_rel * s.H0
    m_floor = extinction_rel * s.M0
    # sides that approach zero only asymptotically under this law
    h_asymptotic = law in (Law.LINEAR, Law.AMBUSH)
    m_asymptotic = law is Law.LINEAR

    outcome = Outcome.UNDETERMINED
    t = 0.0
    while t < T:
        step = min(dt, T - t)
        if step <= dt * 1e-12:  # float residue at the horizon
            break
        H1, M1 = _rk4_step(f, H, M, step)
        if H1 < 0.0 or M1 < 0.0:
            # bisect the step fraction until the crossing is pinned down
            lo, hi = 0.0, step
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                Hm, Mm = _rk4_step(f, H, M, mid)
                if Hm < 0.0 or Mm < 0.0:
                    hi = mid
                else:
                    lo = mid
                if hi - lo <= 1e-10 * max(step, abs(t)):
                    break
            Hc, Mc = _rk4_step(f, H, M, lo)
            crossed_h = H1 < 0.0
            crossed_m = M1 < 0.0
            if crossed_h and crossed_m:  # pick whichever is closer to zero at the boundary
                crossed_h = Hc <= Mc
                crossed_m = not crossed_h
            H, M = (0.0, max(Mc, 0.0)) if crossed_h else (max(Hc, 0.0), 0.0)
            t += lo
            times.append(t)
            hs.append(H)
            ms.append(M)
            outcome = Outcome.HATE_EXTINCT if crossed_h else Outcome.MODERATORS_EXTINCT
            break
        H, M, t = H1, M1, t + step
        times.append(t)
        hs.append(H)
        ms.append(M)
        q = conserved_quantity(s, H, M)
        dq = abs(q - q0) / scale
        if dq > drift:
            drift = dq
            if drift > DRIFT_REFUSAL:
                raise StepTooLargeError(
                    f"invariant drift {drift:.3e} exceeds {DRIFT_REFUSAL:g} at t={t:.6g}",
                    suggested_dt=min(dt / 10.0, 1e-3 * tau if math.isfinite(tau) else dt / 10.0),
                )
        if H <= h_floor and M <= m_floor:
            outcome = Outcome.STALEMATE
            break
        if h_asymptotic and H <= h_floor:
            outcome = Outcome.HATE_EXTINCT
            break
        if m_asymptotic and M <= m_floor:
            outcome = Outcome.MODERATORS_EXTINCT
            break

    return Trajectory(
        law,
        np.asarray(times, dtype=float),
        np.asarray(hs, dtype=float),
        np.asarray(ms, dtype=float),
        drift,
        outcome,
    )


OUTCOME_TO_WINNER = {
    Outcome.HATE_EXTINCT: Winner.MODERATORS,
    Outcome.MODERATORS_EXTINCT: Winner.HATE,
    Outcome.STALEMATE: Winner.STALEMATE,
}


# ---------------------------------------------------------------------------
# parameter sweeps


@dataclass(frozen=True)
class SweepCell:
    mh_ratio: float
    h0m0_ratio: float
    predicted: Winner
    integrated: Outcome | None
    agrees: bool | None  # None when integration stayed undetermined


@dataclass(frozen=True)
class SweepResult:
    law: Law
    mh_ratios: tuple[float, ...]
    h0m0_ratios: tuple[float, ...]
    cells: tuple[SweepCell, ...]

    @property
    def disagreements(self) -> tuple[SweepCell, ...]:
        return tuple(c for c in self.cells if c.agrees is False)

    def rows(self) -> list[dict]:
        return [
            {
                "mh_ratio": c.mh_ratio,
                "h0m0_ratio": c.h0m0_ratio,
                "predicted": c.predicted.value,
                "integrated": c.integrated.value if c.integrated else "",
                "agrees": "" if c.agrees is None else str(c.agrees).lower(),
            }
            for c in self.cells
        ]


def sweep(
    law: Law,
    mh_ratios: "list[float] | tuple[float, ...] | np.ndarray",
    h0m0_ratios: "list[float] | tuple[float, ...] | np.ndarray",
    h: float = 1.0,
    M0: float = 1.0,
    confirm: bool = True,
    dt_factor: float = 2e-3,
    horizon_factor: float = 100.0,
) -> SweepResult:
    """Predicted winner over a grid of m/h and H0/M0 ratios.

    With confirm=True each cell is also integrated numerically and checked
    against the prediction. Cells sitting on (or numerically near) the
    threshold manifold may stay undetermined within the horizon; they are
    reported unconfirmed rather than as disagreements.
    """
    cells = []
    for a in mh_ratios:
        for r in h0m0_ratios:
            s = AttritionScenario(law=law, m=float(a) * h, h=h, H0=float(r) * M0, M0=M0)
            predicted = predict_outcome(s)
            integrated = None
            agrees = None
            if confirm:
                tau = characteristic_time(s)
                traj = integrate(s, dt=dt_factor * tau, T=horizon_factor * tau)
                integrated = traj.outcome
                if integrated is not Outcome.UNDETERMINED:
                    agrees = OUTCOME_TO_WINNER[integrated] is predicted.winner
            cells.append(SweepCell(float(a), float(r), predicted.winner, integrated, agrees))
    return SweepResult(
        law, tuple(float(a) for a in mh_ratios), tuple(float(r) for r in h0m0_ratios),
        tuple(cells),
    )

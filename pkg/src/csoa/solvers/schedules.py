"""Parameter schedules: the constant-derived choices for both algorithms and
a manual power-law schedule for tuned experiments."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

from ..core import HyperParams, ProblemConstants


class ScheduleWarning(UserWarning):
    pass


def _check_constants(c: ProblemConstants, T):
    if T < 1:
        raise ValueError("T must be >= 1")
    for name in ("B", "D", "slater_sigma"):
        if not getattr(c, name) > 0:
            raise ValueError(f"{name} must be > 0")
    if c.N > 0 and not c.sigma_lambda > 0:
        raise ValueError("sigma_lambda must be > 0 when there are constraints")


@dataclass
class ScheduleT1:
    """CSOA choices ``delta = 4B^2``, ``eta = C1/sqrt(T)``, ``upsilon = C2/sqrt(T)``."""

    P: float
    K1: float
    K2: float
    K: float
    C1: float
    C2: float
    delta: float
    B: float
    C: float
    D: float
    sigma_lambda: float

    def eta(self, T):
        return self.C1 * T ** -0.5

    def upsilon(self, T):
        return self.C2 * T ** -0.5

    def gap_bound(self, T):
        return self.K * T ** -0.5

    def issues(self, T):
        out = []
        if self.eta(T) >= 1.0 / (4.0 * self.B):
            out.append(f"horizon too short: eta(T)={self.eta(T):.4g} >= 1/(4B)={1 / (4 * self.B):.4g}")
        if self.upsilon(T) >= self.sigma_lambda:
            out.append(f"upsilon(T)={self.upsilon(T):.4g} >= sigma_lambda={self.sigma_lambda:.4g}")
        return out

    def hyperparams(self, T, seed=0):
        return HyperParams(eta=self.eta(T), delta=self.delta, upsilon=self.upsilon(T),
                           rho=1.0, T=T, seed=seed)

    def describe(self, T):
        return dict(kind="theorem1", **asdict(self), eta=self.eta(T), upsilon=self.upsilon(T))


def schedule_theorem1(c: ProblemConstants, T: int, warn=True) -> ScheduleT1:
    _check_constants(c, T)
    B, C = c.B, c.C
    # the larger P = 2B^2 + 8N sigma_lambda^2 is the one K1, K2 are built from
    P = 2 * B ** 2 + 8 * c.N * c.sigma_lambda ** 2
    K1 = (c.D ** 2 + 1 + C ** 2) * (1 + C)
    K2 = (P + 4 * B ** 2 * (1 + C ** 2)) * (1 + C)
    s = ScheduleT1(P=P, K1=K1, K2=K2, K=math.sqrt(K1 * K2), C1=math.sqrt(K1 / K2),
                   C2=(K1 + K2) / (2 * (1 + C)) * math.sqrt(K1 / K2),
                   delta=4 * B ** 2, B=B, C=C, D=c.D, sigma_lambda=c.sigma_lambda)
    if warn:
        for msg in s.issues(T):
            warnings.warn(msg, ScheduleWarning, stacklevel=2)
    return s


@dataclass
class ScheduleT2:
    """FW-CSOA choices ``eta = C1_hat T^-3/4``, ``upsilon = C2_hat T^-1/4``,
    ``rho = T^-1/2 / (8B)``."""

    L: float
    A: float
    C1_hat: float
    C2_hat: float
    K_hat: float
    delta: float
    B: float
    C: float
    D: float
    sigma_lambda: float

    def eta(self, T):
        return self.C1_hat * T ** -0.75

    def upsilon(self, T):
        return self.C2_hat * T ** -0.25

    def rho(self, T):
        return min(1.0, T ** -0.5 / (8 * self.B))

    def gap_bound(self, T):
        return self.K_hat * T ** -0.25

    def issues(self, T):
        out = []
        if self.eta(T) > 1:
            out.append(f"eta(T)={self.eta(T):.4g} > 1")
        if self.upsilon(T) >= self.sigma_lambda:
            out.append(f"upsilon(T)={self.upsilon(T):.4g} >= sigma_lambda={self.sigma_lambda:.4g}")
        return out

    def hyperparams(self, T, seed=0):
        return HyperParams(eta=self.eta(T), delta=self.delta, upsilon=self.upsilon(T),
                           rho=self.rho(T), T=T, seed=seed)

    def describe(self, T):
        return dict(kind="theorem2", **asdict(self), eta=self.eta(T),
                    upsilon=self.upsilon(T), rho=self.rho(T))


def schedule_theorem2(c: ProblemConstants, T: int, delta=None, warn=True) -> ScheduleT2:
    """``delta`` defaults to ``18 L^2 D^2``; the derivation's ``9 L^2 D^2`` can be passed."""
    _check_constants(c, T)
    N, D, B, C = c.N, c.D, c.B, c.C
    L = max(c.L_f, c.L_h * math.sqrt(N), 1.0)
    LD = L * D
    A = (LD / 16 * (96 * c.G_f + 24 * c.sigma_f ** 2 + 11)
         + N * c.sigma_lambda ** 2 / (3 * LD) * (17 / 24 + 2 * N * c.sigma_h ** 2)
         + (N * c.G_h ** 2 * D + 4 * D * B) / (3 * L))
    C2_hat = A + 15 * LD / 4 * (1 + C ** 2)
    s = ScheduleT2(L=L, A=A, C1_hat=1 / (6 * LD), C2_hat=C2_hat, K_hat=A + C * C2_hat,
                   delta=18 * LD ** 2 if delta is None else float(delta),
                   B=B, C=C, D=D, sigma_lambda=c.sigma_lambda)
    if warn:
        for msg in s.issues(T):
            warnings.warn(msg, ScheduleWarning, stacklevel=2)
    return s


@dataclass
class ManualSchedule:
    """``eta = eta0 T^-eta_power``, ``upsilon = upsilon0 T^-upsilon_power``,
    ``rho = min(1, rho0 T^-rho_power)``."""

    eta0: float
    delta: float
    upsilon0: float
    rho0: float = 1.0
    eta_power: float = 0.5
    upsilon_power: float = 0.5
    rho_power: float = 0.5

    def eta(self, T):
        return self.eta0 * T ** -self.eta_power

    def upsilon(self, T):
        return self.upsilon0 * T ** -self.upsilon_power

    def rho(self, T):
        return min(1.0, self.rho0 * T ** -self.rho_power)

    def hyperparams(self, T, seed=0):
        T = max(int(T), 1)
        return HyperParams(eta=self.eta(T), delta=self.delta, upsilon=self.upsilon(T),
                           rho=self.rho(T), T=T, seed=seed)

    def describe(self, T):
        T = max(int(T), 1)
        return dict(kind="manual", **asdict(self), eta=self.eta(T), upsilon=self.upsilon(T),
                    rho=self.rho(T))


def lower_bound_q(c: ProblemConstants, schedule, r: float) -> float:
    """Constant ``Q`` of the averaged-gap lower bound for dual radius slack ``r``."""
    if not r > 0:
        raise ValueError("r must be > 0")
    ch = schedule.C1 if isinstance(schedule, ScheduleT1) else schedule.C1_hat
    C, D, delta = c.C, c.D, schedule.delta
    return ((ch ** 2 + 4 * delta) * (C + r) ** 2 + D ** 2 * ch ** 2 + 5 * delta * C ** 2) / (2 * ch * r)


def gap_lower_bound(c: ProblemConstants, schedule, r: float, T: int) -> float:
    """``-C (Q + C2) T^-1/2`` (ScheduleT1) or ``-C (Q + C2_hat) T^-1/4``."""
    Q = lower_bound_q(c, schedule, r)
    if isinstance(schedule, ScheduleT1):
        return -c.C * (Q + schedule.C2) * T ** -0.5
    return -c.C * (Q + schedule.C2_hat) * T ** -0.25

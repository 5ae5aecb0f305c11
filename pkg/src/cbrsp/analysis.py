"""Noisy probabilistic CBRSP: simulation pipeline, closed forms and sweeps.

The pipeline is the reference.  Starting from the pure channel it applies
grouped damping noise to the travel qubits, post-selects the successful
branch with ``U = |q2><q2| x I x |q2'><q2'| x I x |c><c|``, renormalizes by
the trace, traces out S1 S2 C1, applies the receivers' corrections and
evaluates ``F = <T|rho_out|T>`` with ``|T> = target_ab x target_ba``.

The closed-form expressions are kept as independent claims to be compared
against the pipeline, never used to produce it.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .channels import NOISE_STUDY, FiveQubitChannelSpec, make_five_qubit_channel
from .noise import NoiseGrouping, apply_grouped_noise, kraus
from .protocols import ProtocolFailure, TargetState, rsp_basis, table1_correction
from .qmath import (I2, DensityMatrix, ImpossibleOutcome, StateVector, apply_matrix,
                    fidelity_pure_vs_mixed, reduced_matrix, tensor_product)
from .tolerances import ATOL, COMPARE_TOL, PROB_FLOOR

CSV_HEADER = ("model", "eta", "theta1", "theta2", "phi1", "phi2", "F_sim", "F_closed", "abs_diff")


@dataclass(frozen=True)
class NoisyRunConfig:
    target_ab: TargetState
    target_ba: TargetState
    model: str = "ad"
    eta: float = 0.0
    channel: FiveQubitChannelSpec = NOISE_STUDY
    sender_outcomes: tuple[int, int] = (1, 1)  # q2 for both senders
    controller_outcome: int = 1  # |b>
    grouping: NoiseGrouping = field(default_factory=NoiseGrouping.correlated)

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta!r}")
        if self.controller_outcome not in (0, 1) or any(o not in (0, 1) for o in self.sender_outcomes):
            raise ValueError("post-selected outcomes must be basis indices 0 or 1")


@dataclass(frozen=True, eq=False)
class NoisyResult:
    rho_out: DensityMatrix
    fidelity: float
    selection_probability: float  # Tr(U rho_k U^dagger)
    noiseless_selection_probability: float  # same with eta = 0
    noisy_trace: float  # Tr(rho_k), < 1 for correlated groups

    @property
    def rho_unnormalized(self) -> np.ndarray:
        """Reduced post-selected state before division by its trace."""
        return self.rho_out.matrix * self.selection_probability


def target_pair(config: NoisyRunConfig) -> StateVector:
    return config.target_ab.vector().tensor(config.target_ba.vector())


def _selector(config: NoisyRunConfig) -> np.ndarray:
    q_ab = rsp_basis(config.target_ab).projector(config.sender_outcomes[0])
    q_ba = rsp_basis(config.target_ba).projector(config.sender_outcomes[1])
    c = config.channel.charlie.projector(config.controller_outcome)
    return tensor_product(q_ab, I2, q_ba, I2, c)


def noisy_probabilistic_fidelity(config: NoisyRunConfig) -> NoisyResult:
    """Run the noisy post-selected pipeline for one configuration."""
    rho = make_five_qubit_channel(config.channel).to_density()
    rho_k = apply_grouped_noise(rho, kraus(config.model, config.eta), config.grouping)
    u = _selector(config)
    rho_k1 = u @ rho_k.matrix @ u.conj().T
    p_sel = float(np.trace(rho_k1).real)
    if p_sel < PROB_FLOOR:
        raise ImpossibleOutcome(f"post-selected branch has probability {p_sel!r}")
    p_ref = float(np.trace(u @ rho.matrix @ u.conj().T).real)
    rho_k3 = reduced_matrix(rho_k1 / p_sel, [1, 3])

    bell_ab, bell_ba = config.channel.bells(config.controller_outcome)
    try:
        fix = np.kron(table1_correction(bell_ab, config.sender_outcomes[0]).matrix,
                      table1_correction(bell_ba, config.sender_outcomes[1]).matrix)
    except ProtocolFailure as exc:
        raise ProtocolFailure("noisy analysis needs the q2 (success) branch for both senders") from exc
    rho_out = DensityMatrix(apply_matrix(rho_k3, fix, [0, 1]))
    f = fidelity_pure_vs_mixed(target_pair(config), rho_out)
    return NoisyResult(rho_out, f, p_sel, p_ref, rho_k.trace)


# --- closed forms -------------------------------------------------------------

def _ad_denominator(t1: float, t2: float, eta: float) -> float:
    e2 = eta * eta
    return (4 - 8 * eta + 6 * e2 + 2 * e2 * math.cos(2 * t1) + e2 * math.cos(2 * (t1 - t2))
            + 2 * e2 * math.cos(2 * t2) + e2 * math.cos(2 * (t1 + t2)))


def closed_form_F_AD(theta1: float, theta2: float, eta: float) -> float:
    e, e2 = eta, eta * eta
    c = math.cos
    num = (64 - 128 * e + 66 * e2 - 2 * e2 * c(4 * theta1) + e2 * c(4 * (theta1 - theta2))
           - 2 * e2 * c(4 * theta2) + e2 * c(4 * (theta1 + theta2)))
    return num / (16 * _ad_denominator(theta1, theta2, eta))


def closed_form_F_PD(theta1: float, theta2: float, eta: float) -> float:
    e = eta
    c = math.cos
    d, s = theta1 - theta2, theta1 + theta2
    quad = 2 - 4 * e + 3 * e ** 2
    total = (64 - 256 * e + 420 * e ** 2 - 328 * e ** 3 + 118 * e ** 4
             + 6 * e ** 2 * quad * c(4 * theta1) - 16 * e ** 2 * quad * c(2 * d)
             + 2 * e ** 2 * c(4 * d) - 4 * e ** 3 * c(4 * d) + 3 * e ** 4 * c(4 * d)
             + 12 * e ** 2 * c(4 * theta2) - 24 * e ** 3 * c(4 * theta2) + 18 * e ** 4 * c(4 * theta2)
             - 32 * e ** 2 * c(2 * s) + 64 * e ** 3 * c(2 * s) - 48 * e ** 4 * c(2 * s)
             + 2 * e ** 2 * c(4 * s) - 4 * e ** 3 * c(4 * s) + 3 * e ** 4 * c(4 * s))
    return total / 64


def closed_form_F(model: str, theta1: float, theta2: float, eta: float) -> float:
    if model == "ad":
        return closed_form_F_AD(theta1, theta2, eta)
    if model == "pd":
        return closed_form_F_PD(theta1, theta2, eta)
    raise ValueError(f"noise model must be 'ad' or 'pd', got {model!r}")


def _closed_rho_ad(t1, t2, p1, p2, eta) -> np.ndarray:
    s, c, e = math.sin, math.cos, eta
    ph = lambda x: np.exp(1j * x)  # noqa: E731
    s21, s22 = math.sin(2 * t1), math.sin(2 * t2)
    p12, dp = p1 + p2, p1 - p2
    # N_A * rho_A,11 with the (1 - eta)^2 factors cancelled, finite at eta = 1
    top = (2 - 4 * e + 6 * e ** 2 + 2 * (-1 + 2 * e + e ** 2) * c(2 * t1)
           + (1 - 2 * e + 3 * e ** 2) * c(2 * (t1 - t2)) - 2 * c(2 * t2) + 4 * e * c(2 * t2)
           + 2 * e ** 2 * c(2 * t2) + c(2 * (t1 + t2)) - 2 * e * c(2 * (t1 + t2))
           + 3 * e ** 2 * c(2 * (t1 + t2)))
    den = 2 * _ad_denominator(t1, t2, eta)
    n = (1 - e) ** 2 / den
    m = np.array([
        [0, 4 * s(t1) ** 2 * s22 * ph(-p2), 4 * s21 * s(t2) ** 2 * ph(-p1), 2 * s21 * s22 * ph(-p12)],
        [4 * s(t1) ** 2 * s22 * ph(p2), 8 * c(t2) ** 2 * s(t1) ** 2, 2 * s21 * s22 * ph(-dp),
         4 * c(t2) ** 2 * s21 * ph(-p1)],
        [4 * s21 * s(t2) ** 2 * ph(p1), 2 * s21 * s22 * ph(dp), 8 * c(t1) ** 2 * s(t2) ** 2,
         4 * c(t1) ** 2 * s22 * ph(-p2)],
        [2 * s21 * s22 * ph(p12), 4 * c(t2) ** 2 * s21 * ph(p1), 4 * c(t1) ** 2 * s22 * ph(p2),
         8 * c(t1) ** 2 * c(t2) ** 2],
    ], dtype=complex) * n
    m[0, 0] = top / den
    return m


def _closed_rho_pd(t1, t2, p1, p2, eta) -> np.ndarray:
    s, c, e = math.sin, math.cos, eta
    ph = lambda x: np.exp(1j * x)  # noqa: E731
    s21, s22 = math.sin(2 * t1), math.sin(2 * t2)
    p12, dp = p1 + p2, p1 - p2
    pre = (1 - e) ** 4 / 4
    # prefactor times 4(1-2e+2e^2)^2/(1-e)^4, simplified so eta = 1 stays finite
    mid = (1 - 2 * e + 2 * e ** 2) ** 2
    m = pre * np.array([
        [4 * s(t1) ** 2 * s(t2) ** 2, 2 * s(t1) ** 2 * s22 * ph(-p2), 2 * s21 * s(t2) ** 2 * ph(-p1),
         s21 * s22 * ph(-p12)],
        [2 * s(t1) ** 2 * s22 * ph(p2), 0, s21 * s22 * ph(-dp), 2 * c(t2) ** 2 * s21 * ph(-p1)],
        [2 * s21 * s(t2) ** 2 * ph(p1), s21 * s22 * ph(dp), 0, 2 * c(t1) ** 2 * s22 * ph(-p2)],
        [s21 * s22 * ph(p12), 2 * c(t2) ** 2 * s21 * ph(p1), 2 * c(t1) ** 2 * s22 * ph(p2),
         4 * c(t1) ** 2 * c(t2) ** 2],
    ], dtype=complex)
    m[1, 1] = mid * c(t2) ** 2 * s(t1) ** 2
    m[2, 2] = mid * c(t1) ** 2 * s(t2) ** 2
    return m


def closed_form_rho_out(model: str, theta1: float, theta2: float, phi1: float, phi2: float,
                        eta: float) -> DensityMatrix:
    """Closed-form 4x4 output matrices on (R1, R2).

    The phase-damping matrix carries its fixed prefactor only, which does
    not make it unit trace; it is returned flagged as unnormalized.
    """
    if model == "ad":
        return DensityMatrix(_closed_rho_ad(theta1, theta2, phi1, phi2, eta))
    if model == "pd":
        return DensityMatrix(_closed_rho_pd(theta1, theta2, phi1, phi2, eta), normalized=False)
    raise ValueError(f"noise model must be 'ad' or 'pd', got {model!r}")


# --- sweeps and comparison ---------------------------------------------------

@dataclass
class FidelityRecord:
    model: str
    eta: float
    theta1: float
    theta2: float
    phi1: float
    phi2: float
    F_sim: float
    F_closed: float | None
    abs_diff: float | None
    selection_probability: float
    noiseless_selection_probability: float

    @property
    def F_reference_scaled(self) -> float:
        """Simulated fidelity rescaled by the noiseless rather than the actual selection probability."""
        return self.F_sim * self.selection_probability / self.noiseless_selection_probability

    def csv_row(self) -> list:
        return [self.model, self.eta, self.theta1, self.theta2, self.phi1, self.phi2, self.F_sim,
                "" if self.F_closed is None else self.F_closed,
                "" if self.abs_diff is None else self.abs_diff]


def evaluate(model: str, eta: float, theta1: float, theta2: float, phi1: float = 0.0,
             phi2: float = 0.0, channel: FiveQubitChannelSpec = NOISE_STUDY) -> FidelityRecord:
    config = NoisyRunConfig(TargetState(theta1, phi1), TargetState(theta2, phi2), model=model,
                            eta=eta, channel=channel)
    res = noisy_probabilistic_fidelity(config)
    f_closed = None
    if channel == NOISE_STUDY and config.controller_outcome == 1:
        try:
            f_closed = closed_form_F(model, theta1, theta2, eta)
        except ZeroDivisionError:
            f_closed = None
    diff = None if f_closed is None else abs(res.fidelity - f_closed)
    return FidelityRecord(model, float(eta), float(theta1), float(theta2), float(phi1), float(phi2),
                          res.fidelity, f_closed, diff, res.selection_probability,
                          res.noiseless_selection_probability)


def sweep(etas: Iterable[float], theta1s: Iterable[float], theta2s: Iterable[float],
          phi1s: Iterable[float] = (0.0,), phi2s: Iterable[float] = (0.0,),
          models: Sequence[str] = ("ad", "pd")) -> list[FidelityRecord]:
    """One record per grid point, ordered model, eta, theta1, theta2, phi1, phi2."""
    grid = list(itertools.product(models, etas, theta1s, theta2s, phi1s, phi2s))
    if not grid:
        raise ValueError("empty sweep grid")
    return [evaluate(m, e, t1, t2, p1, p2) for m, e, t1, t2, p1, p2 in grid]


@dataclass
class ComparisonReport:
    tolerance: float
    count: int
    max_diff: float
    mean_diff: float
    mismatches: list[FidelityRecord]
    verdict: str
    # worst |F_closed - F_reference_scaled| over the mismatches, 0 when none
    rescaled_max_diff: float = 0.0

    def models(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for r in self.mismatches:
            out[r.model] = out.get(r.model, 0) + 1
        return out

    def summary(self) -> str:
        lines = [f"verdict={self.verdict} points={self.count} max_diff={self.max_diff:.3e} "
                 f"mean_diff={self.mean_diff:.3e} tol={self.tolerance:g}"]
        if self.mismatches:
            lines.append(f"mismatches={len(self.mismatches)} by model {self.models()}; "
                         f"after rescaling by noiseless selection probability: "
                         f"max_diff={self.rescaled_max_diff:.3e}")
            for r in self.mismatches[:10]:
                lines.append(f"  {r.model} eta={r.eta:g} theta=({r.theta1:.6g},{r.theta2:.6g}) "
                             f"phi=({r.phi1:.6g},{r.phi2:.6g}) F_sim={r.F_sim:.12g} "
                             f"F_closed={r.F_closed:.12g} diff={r.abs_diff:.3e}")
        return "\n".join(lines)


def compare_report(records: Sequence[FidelityRecord], tol: float = COMPARE_TOL) -> ComparisonReport:
    """Summarize simulation vs closed form; mismatches are reported, not raised."""
    diffs = [r.abs_diff for r in records if r.abs_diff is not None]
    mismatches = [r for r in records if r.abs_diff is not None and r.abs_diff > tol]
    rescaled = max((abs(r.F_closed - r.F_reference_scaled) for r in mismatches), default=0.0)
    return ComparisonReport(
        tolerance=tol,
        count=len(diffs),
        max_diff=max(diffs, default=0.0),
        mean_diff=float(np.mean(diffs)) if diffs else 0.0,
        mismatches=mismatches,
        verdict="MISMATCH" if mismatches else "MATCH",
        rescaled_max_diff=rescaled,
    )


@dataclass
class EntryMismatch:
    model: str
    point: tuple[float, float, float, float, float]  # theta1, theta2, phi1, phi2, eta
    entry: tuple[int, int]
    simulated: complex
    closed: complex
    residual: float


@dataclass
class RhoComparison:
    tolerance: float
    points: int
    max_residual: dict[str, float]
    mismatches: list[EntryMismatch]
    # max residual against the simulated state scaled by Tr(U rho_k U^dagger)/Tr(U rho U^dagger)
    rescaled_max_residual: dict[str, float]

    @property
    def verdict(self) -> str:
        return "MISMATCH" if self.mismatches else "MATCH"

    def summary(self) -> str:
        lines = [f"verdict={self.verdict} points={self.points} tol={self.tolerance:g} "
                 f"max_residual={ {k: float(f'{v:.3e}') for k, v in self.max_residual.items()} } "
                 f"rescaled={ {k: float(f'{v:.3e}') for k, v in self.rescaled_max_residual.items()} }"]
        for m in self.mismatches[:10]:
            lines.append(f"  {m.model} point={tuple(round(x, 6) for x in m.point)} entry={m.entry} "
                         f"sim={m.simulated:.6g} closed={m.closed:.6g} residual={m.residual:.3e}")
        if len(self.mismatches) > 10:
            lines.append(f"  ... {len(self.mismatches) - 10} more entries")
        return "\n".join(lines)


def compare_rho_out(points: Iterable[tuple[float, float, float, float, float]],
                    models: Sequence[str] = ("ad", "pd"), tol: float = COMPARE_TOL) -> RhoComparison:
    """Elementwise check of the closed-form output matrices against the pipeline."""
    mismatches, worst, worst_scaled, n = [], {m: 0.0 for m in models}, {m: 0.0 for m in models}, 0
    for t1, t2, p1, p2, eta in points:
        n += 1
        for model in models:
            config = NoisyRunConfig(TargetState(t1, p1), TargetState(t2, p2), model=model, eta=eta)
            res = noisy_probabilistic_fidelity(config)
            closed = closed_form_rho_out(model, t1, t2, p1, p2, eta).matrix
            sim = res.rho_out.matrix
            resid = np.abs(sim - closed)
            worst[model] = max(worst[model], float(resid.max()))
            scaled = res.rho_unnormalized / res.noiseless_selection_probability
            worst_scaled[model] = max(worst_scaled[model], float(np.abs(scaled - closed).max()))
            for i, j in zip(*np.nonzero(resid > tol)):
                mismatches.append(EntryMismatch(model, (t1, t2, p1, p2, eta), (int(i), int(j)),
                                                complex(sim[i, j]), complex(closed[i, j]),
                                                float(resid[i, j])))
    return RhoComparison(tol, n, worst, mismatches, worst_scaled)


# --- output -------------------------------------------------------------------

def records_to_csv(records: Sequence[FidelityRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow(r.csv_row())
    return buf.getvalue()


def records_to_json(records: Sequence[FidelityRecord]) -> str:
    return json.dumps([asdict(r) for r in records], indent=2)


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` inclusive of ``stop`` within half a step, or a comma list."""
    text = text.strip()
    if ":" not in text:
        return [float(x) for x in text.split(",") if x.strip()]
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be start:stop:step, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise ValueError(f"grid needs step > 0 and stop >= start, got {text!r}")
    # a stop reached within less than half a step counts; exactly half a step does not
    count = int(math.floor((stop - start) / step + 0.5 - 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def noiseless_fidelity_check(records: Sequence[FidelityRecord]) -> float:
    """Worst ``|F_sim - 1|`` over the records with ``eta = 0``."""
    return max((abs(r.F_sim - 1) for r in records if r.eta == 0), default=0.0)


def is_phase_independent(records: Sequence[FidelityRecord], tol: float = ATOL) -> bool:
    groups: dict[tuple, list[float]] = {}
    for r in records:
        groups.setdefault((r.model, r.eta, r.theta1, r.theta2), []).append(r.F_sim)
    return all(max(v) - min(v) < tol for v in groups.values())

"""End-to-end pipeline: parameter selection, branch dispatch on the inner
point, bisection on the level radius with polytope-in-polytope containment,
candidate extraction from the last failing probe, and the final verdict.

The decision rule is the honest one: the pipeline always produces a
candidate point; the candidate is verified against the problem definition
and acceptance of the candidate IS the feasibility answer.  Failure modes
never raise out of solve(); they land in the verdict and flags.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import innerpoint, lp
from .geometry import (
    BallIntersection,
    DegenerateHyperplaneError,
    build_Q,
    rho_bar,
    rho_delta,
)
from .instance import (
    CandidateVerdict,
    HPolytope,
    RsspInstance,
    build_center,
    build_polytope,
    check_remark_1,
    verify_candidate,
)
from .levelset import levelset_polytope, r_hat, zero_rows

REMARK1_TOL = 1e-5

# flag vocabulary
FLAG_SUSPECTED_FLAT = "SuspectedFlat"
FLAG_RHO_RETRIED = "RhoRetried"
FLAG_RETRIES_EXHAUSTED = "RetriesExhausted"
FLAG_DEGENERATE_HYPERPLANE = "DegenerateHyperplane"
FLAG_EMPTY_POLYTOPE = "EmptyPolytope"
FLAG_EMPTY_REGION = "EmptySearchRegion"
FLAG_BRACKET_INVALID = "BracketInvalid"
FLAG_DEGENERATE_BRACKET = "DegenerateBracket"
FLAG_VACUOUS_CONTAINMENT = "VacuousContainment"
FLAG_ZERO_ROWS = "ZeroCoefficientRows"
FLAG_SEPARATION_PATH = "SeparationPath"
FLAG_SCALING_MISMATCH = "ScalingMismatch"
FLAG_ITERATION_CAP = "IterationCap"


class ConfigError(ValueError):
    """A solver configuration violating its invariants."""


class BracketInvalidError(RuntimeError):
    """Containment already holds at R = 0 (degenerate geometry)."""


@dataclass
class SolverConfig:
    """Tuning knobs; invariants rho_bar < beta/2 < rho, alpha > 1, positive
    tolerances, and beta >= ||S|| are checked against the instance."""

    beta: float
    rho: float
    alpha: float = 2.0
    eps_bisect: float = 1e-7
    eps_feas: float = 1e-6
    seed: int = 0
    max_rho_retries: int = 3
    check_scaling: bool = False
    delta: float = 0.01  # outer-approximation target used by the rho default

    @classmethod
    def defaults(cls, inst: RsspInstance, **overrides) -> "SolverConfig":
        """beta = max(2 rho_bar + 2, ||S||); rho = max(rho_delta(0.01), beta/2 + 1)."""
        delta = overrides.get("delta", 0.01)
        rb = rho_bar(inst)
        beta = overrides.get("beta")
        if beta is None:
            beta = max(2.0 * rb + 2.0, inst.norm)
        rho = overrides.get("rho")
        if rho is None:
            try:
                rho = max(rho_delta(inst, delta), beta / 2.0 + 1.0)
            except DegenerateHyperplaneError:
                rho = beta / 2.0 + 1.0
        clean = {k: v for k, v in overrides.items() if k not in ("beta", "rho")}
        return cls(beta=float(beta), rho=float(rho), **clean)

    def validate(self, inst: RsspInstance) -> None:
        problems = []
        rb = rho_bar(inst)
        if not (rb < self.beta / 2.0):
            problems.append(f"need rho_bar < beta/2 (rho_bar={rb:g}, beta={self.beta:g})")
        if not (self.beta / 2.0 < self.rho):
            problems.append(f"need beta/2 < rho (beta={self.beta:g}, rho={self.rho:g})")
        if self.beta < inst.norm:
            problems.append(f"need beta >= ||S|| = {inst.norm:g}")
        if not self.alpha > 1.0:
            problems.append("need alpha > 1")
        for name in ("eps_bisect", "eps_feas"):
            if getattr(self, name) <= 0:
                problems.append(f"need {name} > 0")
        if self.max_rho_retries < 0:
            problems.append("need max_rho_retries >= 0")
        if problems:
            raise ConfigError("; ".join(problems))


@dataclass
class TraceEntry:
    R: float
    contained: bool
    worst_facet: str | None
    witness: np.ndarray | None
    # maximizers of every violated facet at this probe; extraction material
    violated: list[tuple[str, np.ndarray]] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "R": self.R,
            "contained": self.contained,
            "worst_facet": self.worst_facet,
            "witness": None if self.witness is None else [float(v) for v in self.witness],
        }


@dataclass
class SolveOutcome:
    verdict: str  # Feasible | Infeasible | Inconclusive
    candidate: np.ndarray | None
    candidate_verdict: CandidateVerdict | None
    R_star: float
    R_bar: float
    case: str | None
    distance_check: bool
    iterations: int
    trace: list[TraceEntry] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    rho_used: float = float("nan")
    scaling_check: bool | None = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "candidate": None
            if self.candidate is None
            else [float(v) for v in self.candidate],
            "candidate_verdict": None
            if self.candidate_verdict is None
            else self.candidate_verdict.to_dict(),
            "R_star": self.R_star,
            "R_bar": self.R_bar,
            "case": self.case,
            "distance_check": self.distance_check,
            "iterations": self.iterations,
            "trace": [t.to_dict() for t in self.trace],
            "flags": list(self.flags),
            "rho_used": self.rho_used,
            "scaling_check": self.scaling_check,
        }


def iteration_bound(R_bar: float, eps: float) -> int:
    """Bisection step bound ceil(log2(R_bar / eps)) (0 when the bracket is tight)."""
    if R_bar <= eps:
        return 0
    return int(math.ceil(math.log2(R_bar / eps)))


def _probe(
    Q: BallIntersection,
    C: np.ndarray,
    target: HPolytope,
    R: float,
    inner_point: np.ndarray | None,
) -> tuple[lp.ContainmentReport, TraceEntry]:
    inner = levelset_polytope(Q, C, R)
    rep = lp.polytope_contains(
        target, inner, inner_point=inner_point, keep_witnesses=True
    )
    return rep, TraceEntry(
        R, rep.contained, rep.worst_label, rep.witness, rep.violated_witnesses()
    )


def bisect_R(
    Q: BallIntersection,
    C: np.ndarray,
    target: HPolytope,
    R_bar: float,
    eps: float,
    inner_point: np.ndarray | None = None,
) -> tuple[float, list[TraceEntry], int, list[str]]:
    """Smallest R (within eps) whose level set fits inside the target.

    Bracket: R = 0 must fail (else BracketInvalidError), R = R_bar must hold.
    Returns (R, full probe trace including the bracket probes, number of
    bisection steps, flags).
    """
    flags: list[str] = []
    rep0, t0 = _probe(Q, C, target, 0.0, inner_point)
    if rep0.contained:
        raise BracketInvalidError("level set already contained at R = 0")
    repH, tH = _probe(Q, C, target, R_bar, inner_point)
    if repH.vacuous:
        flags.append(FLAG_VACUOUS_CONTAINMENT)
    if not repH.contained:
        raise BracketInvalidError(
            f"level set not contained at the bracket R_bar = {R_bar:g}"
        )
    trace = [t0, tH]
    lo, hi = 0.0, R_bar
    steps = 0
    while hi - lo > eps:
        mid = 0.5 * (lo + hi)
        rep, entry = _probe(Q, C, target, mid, inner_point)
        trace.append(entry)
        if rep.vacuous and FLAG_VACUOUS_CONTAINMENT not in flags:
            flags.append(FLAG_VACUOUS_CONTAINMENT)
        if rep.contained:
            hi = mid
        else:
            lo = mid
        steps += 1
    return hi, trace, steps, flags


def _support_ascent(
    region: HPolytope,
    C: np.ndarray,
    seeds: list[np.ndarray],
    feasible_point: np.ndarray | None,
    max_steps: int = 40,
) -> tuple[np.ndarray | None, float]:
    """Local maximization of ||x - C|| over the region by iterated support LPs.

    From each seed, repeatedly move to argmax (x_t - C).x; each step cannot
    decrease the distance and ends at a locally farthest basic point.
    Returns the best point over all seeds and its distance.
    """
    best_x, best_d = None, -1.0
    for x0 in seeds:
        x = np.asarray(x0, dtype=float)
        d = float(np.linalg.norm(x - C))
        for _ in range(max_steps):
            direction = x - C
            nrm = float(np.linalg.norm(direction))
            if nrm == 0.0:
                break
            res = lp.lp_solve(direction, region, "max", feasible_point=feasible_point)
            if res.status is not lp.LpStatus.OPTIMAL:
                break
            d_new = float(np.linalg.norm(res.x - C))
            if d_new <= d + 1e-12:
                break
            x, d = res.x, d_new
        if d > best_d:
            best_x, best_d = x, d
    return best_x, best_d


def _sliver(region: HPolytope, target: HPolytope, label: str) -> HPolytope | None:
    """The part of the level set on the violated side of one target facet."""
    if label not in target.labels:
        return None
    i = target.labels.index(label)
    return HPolytope(
        region.labels + [f"viol_{label}"],
        np.vstack([region.A, -target.A[i][None, :]]),
        np.concatenate([region.b, [-target.b[i]]]),
    )


def extract_candidate(
    Q: BallIntersection,
    C: np.ndarray,
    R_star_tilde: float,
    trace: list[TraceEntry],
    target: HPolytope | None = None,
    inner_point: np.ndarray | None = None,
    inst: RsspInstance | None = None,
    eps_feas: float = 1e-6,
) -> tuple[np.ndarray, str | None, bool]:
    """Candidate from the failing probe nearest below the threshold.

    The level set's weight row is exactly parallel to the target's, so near
    the threshold the escaping region is a sliver along whole facets and a
    single most-violated-facet maximizer may sit anywhere on a degenerate
    optimal face.  The last point to enter the target is the point farthest
    from C; each violated facet's maximizer seeds a support-LP ascent of
    ||x - C||, both over the failing level set and restricted to that
    facet's sliver (which pins the facet and contains every solution
    corner).  Among the ascents the first verifying point wins, then the
    farthest.  Returns (point, seeding facet label, used_fallback); the
    fallback is the target's Chebyshev center.
    """
    from .instance import verify_candidate  # deferred to keep module load acyclic

    failing = [t for t in trace if not t.contained and t.witness is not None]
    if not failing:
        if target is not None:
            center, _ = lp.chebyshev_center(target)
            if center is not None:
                return center, None, True
        return 0.5 * np.ones(Q.n), None, True

    probe = max(failing, key=lambda t: t.R)
    region = levelset_polytope(Q, C, probe.R)
    seeds = probe.violated or [(probe.worst_facet, probe.witness)]
    pool: list[tuple[str, np.ndarray]] = []
    for label, w in seeds:
        x_full, _ = _support_ascent(region, C, [w], inner_point)
        if x_full is not None:
            pool.append((label, x_full))
        if target is not None:
            sliver = _sliver(region, target, label)
            if sliver is not None:
                x_sliv, _ = _support_ascent(sliver, C, [w], w)
                if x_sliv is not None:
                    pool.append((label, x_sliv))
    if not pool:
        return probe.witness, probe.worst_facet, False

    best = None
    best_key = (-1, -np.inf)
    for label, x in pool:
        accepted = 0
        if inst is not None:
            accepted = int(verify_candidate(x, inst, eps_feas).accepted)
        key = (accepted, float(np.linalg.norm(x - C)))
        if key > best_key:
            best_key = key
            best = (x, label)
    return best[0], best[1], False


def separation_R(
    Q: BallIntersection,
    C: np.ndarray,
    R_bar: float,
    eps: float,
) -> tuple[float, list[TraceEntry], int, np.ndarray | None]:
    """Smallest R (within eps) whose level set no longer meets the cage.

    Each probe decides emptiness of {level-set rows} & {h_rho <= 0} with a
    cutting-plane feasibility solve.  Returns the radius, a trace (contained
    here means 'intersection empty'), the step count, and the witness of the
    last nonempty probe (the detaching contact point).
    """
    def probe(R: float) -> tuple[bool, np.ndarray | None]:
        rows = levelset_polytope(Q, C, R)
        _, witness, nonempty = innerpoint.min_h_over_polytope(rows, Q)
        return not nonempty, witness

    empty0, w0 = probe(0.0)
    if empty0:
        raise BracketInvalidError("intersection already empty at R = 0")
    emptyH, _ = probe(R_bar)
    if not emptyH:
        raise BracketInvalidError(f"intersection nonempty at the bracket {R_bar:g}")
    trace = [TraceEntry(0.0, False, None, w0), TraceEntry(R_bar, True, None, None)]
    lo, hi = 0.0, R_bar
    last_witness = w0
    steps = 0
    while hi - lo > eps:
        mid = 0.5 * (lo + hi)
        empty, w = probe(mid)
        trace.append(TraceEntry(mid, empty, None, w))
        if empty:
            hi = mid
        else:
            lo = mid
            if w is not None:
                last_witness = w
        steps += 1
    return hi, trace, steps, last_witness


def _degenerate_verdict(inst: RsspInstance, config: SolverConfig) -> SolveOutcome:
    """Sign analysis when the weight hyperplane misses the circumscribed
    sphere (S parallel to the all-ones vector up to tolerance)."""
    flags = [FLAG_DEGENERATE_HYPERPLANE]
    zero = np.nonzero(inst.S == 0.0)[0]
    if zero.size:
        cand = np.zeros(inst.n)
        cand[zero[0]] = 1.0
        cv = verify_candidate(cand, inst, config.eps_feas)
        return SolveOutcome(
            "Feasible", cand, cv, float("nan"), float("nan"), None,
            False, 0, [], flags, config.rho,
        )
    if np.all(inst.S > 0) or np.all(inst.S < 0):
        cand = np.zeros(inst.n)
        cv = verify_candidate(cand, inst, config.eps_feas)
        return SolveOutcome(
            "Infeasible", cand, cv, float("nan"), float("nan"), None,
            False, 0, [], flags, config.rho,
        )
    # unreachable for exactly degenerate S; conservative for near-degenerate
    return SolveOutcome(
        "Inconclusive", None, None, float("nan"), float("nan"), None,
        False, 0, [], flags, config.rho,
    )


def solve(inst: RsspInstance, config: SolverConfig | None = None) -> SolveOutcome:
    """Run the full pipeline and decide feasibility from the candidate."""
    if config is None:
        config = SolverConfig.defaults(inst)
    config.validate(inst)

    P = build_polytope(inst)
    C = build_center(inst, config.beta)
    flags: list[str] = []

    try:
        Q = build_Q(inst, config.rho)
    except DegenerateHyperplaneError:
        return _degenerate_verdict(inst, config)

    feasible, x_feas = lp.polytope_feasible(P)
    if not feasible:
        # every subset-sum solution lies in P, so empty P settles it
        cand = np.zeros(inst.n)
        cv = verify_candidate(cand, inst, config.eps_feas)
        return SolveOutcome(
            "Infeasible", cand, cv, float("nan"), float("nan"), None,
            False, 0, [], [FLAG_EMPTY_POLYTOPE], config.rho,
        )

    rho_used = config.rho
    retries = 0
    result = None
    path = None
    while True:
        try:
            result = innerpoint.minimize_h_minus_f(
                Q, C, seed=config.seed, polytope=P, feasible_point=x_feas
            )
        except innerpoint.EmptySearchRegionError:
            return SolveOutcome(
                "Inconclusive", None, None, float("nan"), float("nan"), None,
                False, 0, [], flags + [FLAG_EMPTY_REGION], rho_used,
            )
        except innerpoint.IterationCapError:
            return SolveOutcome(
                "Inconclusive", None, None, float("nan"), float("nan"), None,
                False, 0, [], flags + [FLAG_ITERATION_CAP], rho_used,
            )
        if result.singleton_confidence == "SuspectedFlat":
            if FLAG_SUSPECTED_FLAT not in flags:
                flags.append(FLAG_SUSPECTED_FLAT)
        if result.case is innerpoint.Case.INTERIOR_NEGATIVE and not result.in_int_P:
            # the paper's remedy for X* in Q \ P: grow rho and retry
            if retries >= config.max_rho_retries:
                flags.append(FLAG_RETRIES_EXHAUSTED)
                return SolveOutcome(
                    "Inconclusive", None, None, float("nan"),
                    float(math.sqrt(max(0.0, -result.value))),
                    result.case.value, False, 0, [], flags, rho_used,
                )
            retries += 1
            rho_used *= 2.0
            if FLAG_RHO_RETRIED not in flags:
                flags.append(FLAG_RHO_RETRIED)
            Q = build_Q(inst, rho_used)
            continue
        if result.case is innerpoint.Case.INTERIOR_NEGATIVE:
            path = "bisect"
        elif result.case is innerpoint.Case.BOUNDARY:
            path = "boundary"
        else:
            path = "separation"
        break

    R_bar = float(math.sqrt(max(0.0, -result.value)))
    trace: list[TraceEntry] = []
    iterations = 0
    candidate: np.ndarray

    ls0 = levelset_polytope(Q, C, 0.0)
    if zero_rows(ls0):
        flags.append(FLAG_ZERO_ROWS)

    if path == "bisect":
        try:
            R_star, trace, iterations, bflags = bisect_R(
                Q, C, P, R_bar, config.eps_bisect, inner_point=result.x_star
            )
            flags.extend(f for f in bflags if f not in flags)
            candidate, _facet, fell_back = extract_candidate(
                Q, C, R_star, trace, P,
                inner_point=result.x_star, inst=inst, eps_feas=config.eps_feas,
            )
            if fell_back:
                flags.append(FLAG_DEGENERATE_BRACKET)
        except BracketInvalidError:
            flags.append(FLAG_BRACKET_INVALID)
            return SolveOutcome(
                "Inconclusive", None, None, float("nan"), R_bar,
                result.case.value, False, 0, trace, flags, rho_used,
            )
    elif path == "boundary":
        # h(x*) = 0: the threshold radius is the minimizer's own distance
        R_star = float(np.linalg.norm(result.x_star - C))
        candidate = result.x_star
    else:
        flags.append(FLAG_SEPARATION_PATH)
        try:
            R_star, trace, iterations, witness = separation_R(
                Q, C, R_bar, config.eps_bisect
            )
        except BracketInvalidError:
            flags.append(FLAG_BRACKET_INVALID)
            return SolveOutcome(
                "Inconclusive", None, None, float("nan"), R_bar,
                result.case.value, False, 0, [], flags, rho_used,
            )
        candidate = witness if witness is not None else result.x_star

    cv = verify_candidate(candidate, inst, config.eps_feas)
    verdict = "Feasible" if cv.accepted else "Infeasible"
    distance_check = check_remark_1(candidate, C, REMARK1_TOL)

    scaling_check = None
    if config.check_scaling and path == "bisect":
        scaling_check = _scaling_diagnostic(
            inst, config, rho_used, R_star, R_bar, result.x_star, P
        )
        if scaling_check is False:
            flags.append(FLAG_SCALING_MISMATCH)

    return SolveOutcome(
        verdict=verdict,
        candidate=candidate,
        candidate_verdict=cv,
        R_star=R_star,
        R_bar=R_bar,
        case=result.case.value,
        distance_check=distance_check,
        iterations=iterations,
        trace=trace,
        flags=flags,
        rho_used=rho_used,
        scaling_check=scaling_check,
    )


def _scaling_diagnostic(
    inst: RsspInstance,
    config: SolverConfig,
    rho_used: float,
    R_star: float,
    R_bar: float,
    x_star: np.ndarray,
    P: HPolytope,
) -> bool | None:
    """Re-run the bisection on the alpha-scaled construction and compare the
    threshold against the closed-form radius remap (tolerance 1e-4 on R^2)."""
    from .levelset import scale_construction  # local import to avoid a cycle at load

    try:
        Q_hat, C_hat = scale_construction(inst, rho_used, config.beta, config.alpha)
        expected = r_hat(R_star, config.alpha, config.beta, inst.n)
        bracket = r_hat(max(R_bar, R_star + 1.0), config.alpha, config.beta, inst.n)
        got, _, _, _ = bisect_R(
            Q_hat, C_hat, P, bracket, config.eps_bisect, inner_point=x_star
        )
        return bool(abs(got**2 - expected**2) <= 1e-4)
    except (BracketInvalidError, ValueError):
        return None


__all__ = [
    "BracketInvalidError",
    "ConfigError",
    "SolveOutcome",
    "SolverConfig",
    "TraceEntry",
    "bisect_R",
    "extract_candidate",
    "iteration_bound",
    "separation_R",
    "solve",
]

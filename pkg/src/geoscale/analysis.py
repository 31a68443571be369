"""Jump-size bounds, band tables, predicted step counts and theorem checks.

For the generalized divisor ``alpha`` with ``beta = ceil(alpha)``, two jump
counts are exposed:

``omega_paper``
    number of ``t >= 1`` with ``alpha*beta*(1 - beta**-t)/t > 1``, i.e. the
    inequality exactly as it is usually quoted.
``omega_corrected``
    number of ``t >= 1`` with ``alpha*beta*(1 - beta**-t) > (beta - 1)*t``,
    which follows from the true ratio on the geometric simplex,
    ``(beta**(n-i+1) - beta**(n-j+1)) / ((beta - 1)(j - i))``.

They agree whenever ``beta == 2``.  All comparisons are done on integers.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .model import (Instance, format_rational, objective_geometric,
                    objective_linear, simplex_instance)
from .oracles import MAX_GAIN, Policy, mra_argmax
from .scaling import EngineConfig, StepKind, Trace, Variant, run

__all__ = [
    "OmegaReport",
    "Band",
    "TheoremReport",
    "AlphaRefused",
    "omega_paper",
    "omega_corrected",
    "omega_report",
    "omega_bands",
    "breakpoint",
    "audit_printed_bands",
    "PRINTED_BANDS",
    "predicted_halvings",
    "verify_theorem",
    "max_jump_empirical",
    "sweep",
    "approximation_audit",
    "CSV_COLUMNS",
    "reports_to_csv",
    "reports_to_table",
    "reports_to_json",
    "bands_to_dict",
    "theorem_id",
    "THEOREMS",
]

PAPER = "paper"
CORRECTED = "corrected"
DEFINITIONS = (PAPER, CORRECTED)

# Band values as commonly printed for the jump count; the last one is what
# the strict inequality disputes.
PRINTED_BANDS = (
    (Fraction(1), Fraction(4, 3), 1),
    (Fraction(4, 3), Fraction(12, 7), 2),
    (Fraction(12, 7), Fraction(2), 3),
    (Fraction(2), Fraction(729, 364), 6),
)


class AlphaRefused(ValueError):
    pass


def _check_alpha(alpha) -> Fraction:
    alpha = Fraction(alpha)
    if alpha <= 1:
        raise ValueError(f"alpha must be greater than 1, got {alpha}")
    return alpha


def _holds(alpha: Fraction, beta: int, t: int, definition: str) -> bool:
    p, q = alpha.numerator, alpha.denominator
    bt = beta ** t
    # alpha*beta*(1 - beta^-t) > k*t, multiplied through by q*beta^t
    k = 1 if definition == PAPER else beta - 1
    return p * beta * (bt - 1) > k * q * t * bt


def _satisfied(alpha: Fraction, definition: str) -> list[int]:
    beta = math.ceil(alpha)
    # the left side decreases in t, so stop at the first failure
    ts = []
    t = 1
    while _holds(alpha, beta, t, definition):
        ts.append(t)
        t += 1
    return ts


def omega_paper(alpha) -> int:
    return len(_satisfied(_check_alpha(alpha), PAPER))


def omega_corrected(alpha) -> int:
    return len(_satisfied(_check_alpha(alpha), CORRECTED))


def _omega(alpha, definition: str) -> int:
    if definition not in DEFINITIONS:
        raise ValueError(f"definition must be one of {DEFINITIONS}")
    return len(_satisfied(_check_alpha(alpha), definition))


def breakpoint(t: int, beta: int, definition: str = PAPER) -> Fraction:
    """The ``alpha`` at which the ``t``-th inequality becomes an equality."""
    val = Fraction(t * beta ** (t - 1), beta ** t - 1)
    return val if definition == PAPER else (beta - 1) * val


@dataclass(frozen=True)
class OmegaReport:
    alpha: Fraction
    beta: int
    omega_paper: int
    omega_corrected: int
    satisfied_t_paper: tuple[int, ...]
    printed: Optional[int] = None

    @property
    def diverges_from_printed(self) -> bool:
        return self.printed is not None and self.printed != self.omega_paper

    def to_dict(self) -> dict:
        return {
            "alpha": format_rational(self.alpha),
            "beta": self.beta,
            "omega_paper": self.omega_paper,
            "omega_corrected": self.omega_corrected,
            "satisfied_t_paper": list(self.satisfied_t_paper),
            "printed": self.printed,
            "diverges_from_printed": self.diverges_from_printed,
        }

    def __str__(self) -> str:
        out = (f"omega_paper={self.omega_paper} "
               f"omega_corrected={self.omega_corrected}")
        if self.diverges_from_printed:
            out += f" (printed table says {self.printed})"
        return out


def _printed_value(alpha: Fraction) -> Optional[int]:
    for lo, hi, val in PRINTED_BANDS:
        if lo < alpha <= hi:
            return val
    return None


def omega_report(alpha) -> OmegaReport:
    alpha = _check_alpha(alpha)
    ts = _satisfied(alpha, PAPER)
    return OmegaReport(alpha, math.ceil(alpha), len(ts),
                       omega_corrected(alpha), tuple(ts), _printed_value(alpha))


@dataclass(frozen=True)
class Band:
    """``omega`` is constant on the half-open interval ``(lo, hi]``."""

    lo: Fraction
    hi: Fraction
    omega: int

    def __str__(self) -> str:
        return f"({format_rational(self.lo)}, {format_rational(self.hi)}] -> {self.omega}"


def omega_bands(definition: str, alpha_max) -> list[Band]:
    """Exact band table of ``omega`` over ``(1, alpha_max]``.

    Interval ends are breakpoints, integers (where the ceiling changes) or
    ``alpha_max`` itself.
    """
    if definition not in DEFINITIONS:
        raise ValueError(f"definition must be one of {DEFINITIONS}")
    alpha_max = _check_alpha(alpha_max)
    bands: list[Band] = []
    for beta in range(2, math.ceil(alpha_max) + 1):
        lo = Fraction(beta - 1)
        hi = min(Fraction(beta), alpha_max)
        cuts = []
        t = 1
        while True:
            b = breakpoint(t, beta, definition)
            if b >= hi:
                break
            if b > lo:
                cuts.append(b)
            t += 1
        edges = [lo] + cuts + [hi]
        for a, b in zip(edges, edges[1:]):
            bands.append(Band(a, b, _omega(b, definition)))
    return bands


def audit_printed_bands(definition: str = PAPER) -> list[dict]:
    """Compare each printed band value with the exact count on that band."""
    rows = []
    for lo, hi, printed in PRINTED_BANDS:
        computed = _omega(hi, definition)
        rows.append({
            "band": f"({format_rational(lo)}, {format_rational(hi)}]",
            "printed": printed,
            "computed": computed,
            "agrees": printed == computed,
        })
    return rows


def predicted_halvings(mu0, alpha, n: int, mode: str = "literal") -> int:
    """Number of divisions before the scale reaches its stopping threshold.

    ``literal``: least ``k`` with ``mu0 / alpha**k < 1/n``.
    ``early_stop``: least ``k`` with ``mu0 / alpha**k <= 1/2``.
    """
    mu, alpha = Fraction(mu0), _check_alpha(alpha)
    if mu <= 0 or n < 1:
        raise ValueError("need mu0 > 0 and n >= 1")
    if mode == "literal":
        done = lambda m: m < Fraction(1, n)  # noqa: E731
    elif mode == "early_stop":
        done = lambda m: m <= Fraction(1, 2)  # noqa: E731
    else:
        raise ValueError(f"unknown mode {mode!r}")
    k = 0
    while not done(mu):
        mu /= alpha
        k += 1
    return k


# --- theorem verification --------------------------------------------------

THEOREMS = ("thm_2_1", "thm_3_1", "thm_4_1", "cor_4_4")
_ALIASES = {"2.1": "thm_2_1", "3.1": "thm_3_1", "4.1": "thm_4_1",
            "4.4": "cor_4_4", "cor_4.4": "cor_4_4"}


def theorem_id(name: str) -> str:
    key = _ALIASES.get(name, name)
    if key not in THEOREMS:
        raise ValueError(f"unknown theorem {name!r} (choose from "
                         f"{', '.join(THEOREMS)} or 2.1/3.1/4.1/4.4)")
    return key


@dataclass
class TheoremReport:
    theorem: str
    n: int
    alpha: Fraction
    policy: str
    mu0: Fraction
    predicted_augment: int
    observed_augment: int
    predicted_halve: int
    observed_halve: int
    lemma_ok: bool
    max_jump: int
    notes: list[str] = field(default_factory=list)
    trace: Optional[Trace] = field(default=None, repr=False, compare=False)

    @property
    def match(self) -> bool:
        return (self.predicted_augment == self.observed_augment
                and self.predicted_halve == self.observed_halve)

    def row(self) -> dict:
        return {
            "theorem": self.theorem,
            "n": self.n,
            "alpha": format_rational(self.alpha),
            "policy": self.policy,
            "mu0": format_rational(self.mu0),
            "predicted_augment": self.predicted_augment,
            "observed_augment": self.observed_augment,
            "predicted_halve": self.predicted_halve,
            "observed_halve": self.observed_halve,
            "match": str(self.match).lower(),
        }

    def to_dict(self) -> dict:
        d = self.row()
        d["match"] = self.match
        d["lemma_ok"] = self.lemma_ok
        d["max_jump"] = self.max_jump
        d["notes"] = list(self.notes)
        return d


def _jumps(trace: Trace) -> list[tuple[int, int, Fraction]]:
    """(from, to, mu) for the augmentations of the scaling loop."""
    return [(s.iterate_before, s.iterate_after, s.mu_before)
            for s in trace.steps
            if s.kind is StepKind.AUGMENT and s.stage == "main"]


def _geometric_hypothesis(c: Sequence[int], n: int, i: int, mu: Fraction,
                          alpha: Fraction) -> bool:
    # mu < c_{n-i} <= alpha*mu, coordinates 1-indexed
    ci = c[n - i - 1]
    return mu < ci <= alpha * mu


def _geometric_run(n: int, alpha: Fraction, policy: Policy, mu0=None,
                   early_stop=False) -> tuple[Instance, EngineConfig, Trace]:
    beta = math.ceil(alpha)
    inst = simplex_instance(n, objective_geometric(n, beta))
    mu0 = Fraction(beta ** (n + 1)) if mu0 is None else Fraction(mu0)
    cfg = EngineConfig(mu0=mu0, variant=Variant.FEASIBILITY, policy=policy,
                       alpha=alpha, early_stop=early_stop)
    return inst, cfg, run(inst, cfg)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def verify_theorem(theorem: str, n: int, *, alpha=None, policy: Optional[Policy] = None,
                   mu0=None, early_stop: bool = False) -> TheoremReport:
    """Run the worst-case construction behind ``theorem`` and compare the
    observed step counts with the predicted ones.

    Defaults per theorem:

    ========  ===========  ======================  ==============  =========
    id        variant      objective               mu0             alpha
    ========  ===========  ======================  ==============  =========
    thm_2_1   MRA          (1, ..., n)             2^bits(n)       2
    thm_3_1   max-gain     (2, ..., 2^n)           2^(n+1)         2
    thm_4_1   max-gain     (b, ..., b^n), b=ceil   b^(n+1)         required
    cor_4_4   max-gain     (2, ..., 2^n)           2^(n+1)         4/3
    ========  ===========  ======================  ==============  =========

    ``thm_4_1`` only accepts ``1 < alpha <= 2``; above 2 the jump inequality
    and the true ratios disagree, so use :func:`sweep` instead.
    """
    theorem = theorem_id(theorem)
    if n < 3:
        raise ValueError(f"theorem checks need n >= 3, got {n}")
    mode = "early_stop" if early_stop else "literal"
    notes: list[str] = []

    if theorem == "thm_2_1":
        alpha = Fraction(2)
        inst = simplex_instance(n, objective_linear(n))
        mu0 = Fraction(1 << n.bit_length()) if mu0 is None else Fraction(mu0)
        cfg = EngineConfig(mu0=mu0, variant=Variant.MRA, alpha=alpha,
                           early_stop=early_stop)
        trace = run(inst, cfg)
        jumps = _jumps(trace)
        lemma_ok = all(j == i + 1 for i, j, _ in jumps)
        notes.append("every augmentation moves x^i -> x^(i+1)" if lemma_ok
                     else "augmentation skipped a simplex vertex")
        pred_aug = n
        policy_name = "mra"
    else:
        if theorem == "thm_3_1":
            alpha = Fraction(2)
        elif theorem == "cor_4_4":
            alpha = Fraction(4, 3)
        else:
            if alpha is None:
                raise ValueError("thm_4_1 needs alpha")
            alpha = _check_alpha(alpha)
            if alpha > 2:
                raise AlphaRefused(
                    f"thm_4_1 is only checked for 1 < alpha <= 2 (got {alpha}): "
                    "for ceil(alpha) >= 3 the jump inequality drops the "
                    "1/(ceil(alpha)-1) factor of the true ratio; use sweep and "
                    "omega_corrected instead")
        policy = policy or MAX_GAIN
        inst, cfg, trace = _geometric_run(n, alpha, policy, mu0, early_stop)
        mu0 = cfg.mu0
        policy_name = policy.name
        beta = math.ceil(alpha)
        jumps = _jumps(trace)
        hyp_ok = all(_geometric_hypothesis(inst.objective, n, i, mu, alpha)
                     for i, _, mu in jumps)
        notes.append("every augmentation starts with mu < c_(n-i) <= alpha*mu"
                     if hyp_ok else "jump hypothesis mu < c_(n-i) <= alpha*mu violated")
        if theorem == "thm_3_1":
            lemma_ok = hyp_ok and all(1 <= j - i <= 3 for i, j, _ in jumps)
            notes.append("every jump lands in x^(i+1..i+3)" if lemma_ok
                         else "a jump left x^(i+1..i+3)")
            pred_aug = _ceil_div(n, 3)
        else:
            w = omega_paper(alpha)
            in_paper = all(_holds(alpha, beta, j - i, PAPER) for i, j, _ in jumps)
            in_corr = all(_holds(alpha, beta, j - i, CORRECTED) for i, j, _ in jumps)
            lemma_ok = hyp_ok and in_paper and in_corr
            notes.append(f"omega={w}; every jump satisfies the jump inequality"
                         if in_paper and in_corr
                         else f"omega={w}; a jump violates the jump inequality")
            pred_aug = n if theorem == "cor_4_4" else _ceil_div(n, w)
            if theorem == "cor_4_4":
                ones = all(j == i + 1 for i, j, _ in jumps)
                lemma_ok = lemma_ok and ones
                notes.append("all jumps have size 1" if ones
                             else "a jump larger than 1 occurred")

    max_jump = max((j - i for i, j, _ in jumps), default=0)
    pred_halve = predicted_halvings(trace.config.mu0, alpha, n, mode)
    bound = (n * inst.c_inf).bit_length()
    notes.append(f"floor(log2(n*||c||_inf))+1 = {bound}")
    return TheoremReport(theorem, n, alpha, policy_name, Fraction(mu0), pred_aug,
                         trace.summary.augment_count, pred_halve,
                         trace.summary.halve_count, lemma_ok, max_jump, notes,
                         trace)


def max_jump_empirical(n: int, alpha, policy: Policy = MAX_GAIN) -> int:
    """Largest simplex-index jump on the geometric-objective run."""
    alpha = _check_alpha(alpha)
    _, _, trace = _geometric_run(n, alpha, policy)
    return max((j - i for i, j, _ in _jumps(trace)), default=0)


def _sweep_one(args) -> TheoremReport:
    alpha, n, policy = args
    alpha = Fraction(alpha)
    inst, cfg, trace = _geometric_run(n, alpha, policy)
    w = omega_corrected(alpha)
    jumps = _jumps(trace)
    beta = math.ceil(alpha)
    ok = all(_holds(alpha, beta, j - i, CORRECTED) for i, j, _ in jumps)
    return TheoremReport(
        "sweep", n, alpha, policy.name, cfg.mu0, _ceil_div(n, w),
        trace.summary.augment_count, predicted_halvings(cfg.mu0, alpha, n),
        trace.summary.halve_count, ok,
        max((j - i for i, j, _ in jumps), default=0),
        [f"omega_corrected={w}", f"omega_paper={omega_paper(alpha)}"])


def sweep(alphas: Iterable, ns: Iterable[int], policy: Policy = MAX_GAIN,
          jobs: int = 1) -> list[TheoremReport]:
    """Geometric-objective runs over an ``alpha`` x ``n`` grid.

    Predictions use ``omega_corrected``.  Results come back sorted by
    ``(alpha, n)`` however many workers run them.
    """
    grid = sorted({(Fraction(a), int(n)) for a in alphas for n in ns})
    for a, _ in grid:
        _check_alpha(a)
    tasks = [(a, n, policy) for a, n in grid]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_one, tasks))
    return [_sweep_one(t) for t in tasks]


def approximation_audit(inst: Instance, trace: Trace) -> list[str]:
    """Check that each main-loop augmentation clears ``mu`` while the best
    available ratio stays within ``alpha*mu`` of it.

    Meant for runs started with ``mu0 > ||c||_inf`` on the geometric simplex,
    where this is the factor-``alpha`` approximation of the maximum ratio.
    """
    alpha = trace.config.alpha
    problems = []
    for s in trace.steps:
        if s.kind is not StepKind.AUGMENT or s.stage != "main":
            continue
        best = mra_argmax(inst, s.iterate_before).ratio
        if not s.chosen_ratio > s.mu_before:
            problems.append(f"step {s.index}: ratio {s.chosen_ratio} does not "
                            f"exceed mu={s.mu_before}")
        if best > alpha * s.mu_before:
            problems.append(f"step {s.index}: max ratio {best} exceeds "
                            f"alpha*mu={alpha * s.mu_before}")
        if best > alpha * s.chosen_ratio:
            problems.append(f"step {s.index}: chosen ratio {s.chosen_ratio} is "
                            f"below 1/alpha of the maximum {best}")
    return problems


# --- output ----------------------------------------------------------------

CSV_COLUMNS = ("theorem", "n", "alpha", "policy", "mu0", "predicted_augment",
               "observed_augment", "predicted_halve", "observed_halve", "match")


def reports_to_csv(reports: Sequence[TheoremReport]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


def reports_to_json(reports: Sequence[TheoremReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2)


def reports_to_table(reports: Sequence[TheoremReport]) -> str:
    rows = [CSV_COLUMNS] + [tuple(str(v) for v in r.row().values())
                            for r in reports]
    widths = [max(len(row[k]) for row in rows) for k in range(len(CSV_COLUMNS))]
    lines = ["  ".join(cell.rjust(wd) for cell, wd in zip(row, widths))
             for row in rows]
    return "\n".join(lines) + "\n"


def bands_to_dict(bands: Sequence[Band]) -> list[dict]:
    return [{"lo": format_rational(b.lo), "hi": format_rational(b.hi),
             "omega": b.omega} for b in bands]


"""Geometric scaling engine with full step traces.

Two variants share one loop:

* ``MRA``: ask for the maximum-ratio vertex, augment when its ratio is at
  least ``mu`` and otherwise divide ``mu`` by ``alpha``.
* ``FEASIBILITY``: ask for any vertex whose ratio strictly exceeds ``mu``
  (the policy picks one), and divide ``mu`` when there is none.

The two therefore disagree on exact ties ``ratio == mu``; that is intended.

The loop stops as soon as ``mu < 1/n`` (literal mode).  ``certify`` adds a
final pass of plain improvement steps so the returned vertex is optimal,
and ``early_stop`` replaces every would-be division once ``mu <= 1/2`` by an
improvement check, ending the run when none exists.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from .model import Instance, format_rational, write_instance
from .oracles import (MAX_RATIO, Policy, brute_force_opt, improve_any,
                      mra_argmax, select)

__all__ = [
    "Variant",
    "StepKind",
    "EngineConfig",
    "ConfigError",
    "StepLimitExceeded",
    "Step",
    "Phase",
    "Summary",
    "Trace",
    "run",
    "summarize",
    "check_invariants",
    "default_mu0",
    "default_step_limit",
    "trace_to_dict",
    "trace_to_json",
]

HALF = Fraction(1, 2)


class Variant(enum.Enum):
    MRA = "mra"
    FEASIBILITY = "feasibility"


class StepKind(enum.Enum):
    AUGMENT = "A"
    HALVE = "H"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    mu0: Fraction
    variant: Variant = Variant.MRA
    policy: Policy = MAX_RATIO
    alpha: Fraction = Fraction(2)
    early_stop: bool = False
    certify: bool = False
    step_limit: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "mu0", Fraction(self.mu0))
        object.__setattr__(self, "alpha", Fraction(self.alpha))

    def validate(self, inst: Instance) -> None:
        if self.mu0 <= inst.c_inf:
            raise ConfigError(
                f"mu0={self.mu0} must exceed ||c||_inf={inst.c_inf}")
        if self.alpha <= 1:
            raise ConfigError(f"alpha={self.alpha} must be greater than 1")
        if self.step_limit is not None and self.step_limit < 1:
            raise ConfigError(f"step_limit={self.step_limit} must be positive")


@dataclass(frozen=True)
class Step:
    index: int
    kind: StepKind
    mu_before: Fraction
    mu_after: Fraction
    iterate_before: int
    iterate_after: int
    objective_after: int
    chosen_ratio: Optional[Fraction] = None
    # "main" for the scaling loop, "early" for early-stop improvements,
    # "certify" for the post-loop optimality pass
    stage: str = "main"


@dataclass(frozen=True)
class Phase:
    kind: StepKind
    first: int
    last: int


@dataclass(frozen=True)
class Summary:
    augment_count: int
    halve_count: int
    total: int
    final_vertex: int
    final_value: int
    certified: bool
    certify_augment_count: int = 0
    aborted: bool = False


@dataclass(frozen=True)
class Trace:
    config: EngineConfig
    instance_digest: str
    n: int
    start: int
    steps: tuple[Step, ...]
    phases: tuple[Phase, ...]
    summary: Summary
    final_vertex_bits: str = ""


class StepLimitExceeded(RuntimeError):
    """The engine ran past its step budget; ``trace`` holds the partial run."""

    def __init__(self, message: str, trace: Trace):
        super().__init__(message)
        self.trace = trace


def default_mu0(inst: Instance) -> Fraction:
    """Smallest power of two strictly above ``||c||_inf``."""
    return Fraction(1 << inst.c_inf.bit_length())


def _divisions_below_one(x: Fraction, alpha: Fraction) -> int:
    k = 0
    while x >= 1:
        x /= alpha
        k += 1
    return k


def default_step_limit(inst: Instance, cfg: EngineConfig) -> int:
    # 10 (n+2) (bits(mu0 n) + 2), with "bits" counted in base alpha so slow
    # divisors still get room for every division they perform
    bits = _divisions_below_one(cfg.mu0 * inst.n, cfg.alpha)
    return 10 * (inst.n + 2) * (bits + 2)


def instance_digest(inst: Instance) -> str:
    return hashlib.sha256(write_instance(inst).encode()).hexdigest()[:16]


def _phases(steps) -> tuple[Phase, ...]:
    out: list[Phase] = []
    for s in steps:
        if out and out[-1].kind is s.kind:
            out[-1] = replace(out[-1], last=s.index)
        else:
            out.append(Phase(s.kind, s.index, s.index))
    return tuple(out)


def summarize(trace: Trace) -> Summary:
    """Recount the summary from the step list."""
    steps = trace.steps
    aug = sum(1 for s in steps if s.kind is StepKind.AUGMENT and s.stage != "certify")
    post = sum(1 for s in steps if s.stage == "certify")
    halve = sum(1 for s in steps if s.kind is StepKind.HALVE)
    final = steps[-1].iterate_after if steps else trace.start
    return Summary(
        augment_count=aug,
        halve_count=halve,
        total=aug + halve,
        final_vertex=final,
        final_value=trace.summary.final_value,
        certified=trace.summary.certified,
        certify_augment_count=post,
        aborted=trace.summary.aborted,
    )


def run(inst: Instance, cfg: EngineConfig) -> Trace:
    """Run geometric scaling on ``inst`` and return the full trace.

    Raises ``ConfigError`` for invalid configurations and
    ``StepLimitExceeded`` (carrying the partial trace) on a runaway loop.
    """
    cfg.validate(inst)
    limit = cfg.step_limit or default_step_limit(inst, cfg)
    n = inst.n
    inv_n = Fraction(1, n)
    alpha = cfg.alpha
    mra = cfg.variant is Variant.MRA

    steps: list[Step] = []
    mu = cfg.mu0
    cur = inst.start
    certified = False

    def finish(aborted=False) -> Trace:
        aug = sum(1 for s in steps if s.kind is StepKind.AUGMENT and s.stage != "certify")
        post = sum(1 for s in steps if s.stage == "certify")
        halve = len(steps) - aug - post
        summary = Summary(aug, halve, aug + halve, cur, inst.values[cur],
                          certified, post, aborted)
        return Trace(cfg, instance_digest(inst), n, inst.start, tuple(steps),
                     _phases(steps), summary, str(inst.vertices[cur]))

    def check_budget():
        if len(steps) >= limit:
            raise StepLimitExceeded(
                f"step limit {limit} exceeded", finish(aborted=True))

    def augment(j: int, r: Fraction, stage: str):
        nonlocal cur
        steps.append(Step(len(steps), StepKind.AUGMENT, mu, mu, cur, j,
                          inst.values[j], r, stage))
        cur = j

    while True:
        check_budget()
        if mra:
            ans = mra_argmax(inst, cur)
            go = ans.index is not None and ans.ratio >= mu
        else:
            ans = select(cfg.policy, inst, cur, mu)
            go = ans.index is not None
        if go:
            augment(ans.index, ans.ratio, "main")
        elif cfg.early_stop and mu <= HALF:
            imp = improve_any(inst, cur)
            if imp.index is None:
                certified = True
                break
            augment(imp.index, imp.ratio, "early")
            continue
        else:
            new_mu = mu / alpha
            steps.append(Step(len(steps), StepKind.HALVE, mu, new_mu, cur, cur,
                              inst.values[cur]))
            mu = new_mu
        if not cfg.early_stop and mu < inv_n:
            break

    if cfg.certify and not certified:
        while True:
            imp = improve_any(inst, cur)
            if imp.index is None:
                break
            check_budget()
            augment(imp.index, imp.ratio, "certify")
        certified = True

    return finish()


def check_invariants(inst: Instance, trace: Trace) -> list[str]:
    """Audit a trace against the instance; an empty list means it is clean.

    Checks strict objective growth across augmentations, the gap bound
    ``opt - c.x <= mu n`` at every division, per-step bookkeeping, and that
    there are at most ``|v(P)| - 1`` augmentations.
    """
    if trace.instance_digest != instance_digest(inst):
        raise ValueError("trace was not produced on this instance")
    problems: list[str] = []
    cfg = trace.config
    n = inst.n
    vals = inst.values
    _, opt = brute_force_opt(inst)

    mu, cur = cfg.mu0, inst.start
    last_obj = vals[cur]
    for k, s in enumerate(trace.steps):
        tag = f"step {k}"
        if s.index != k:
            problems.append(f"{tag}: index {s.index} out of sequence")
        if s.mu_before != mu:
            problems.append(f"{tag}: mu_before {s.mu_before} != running mu {mu}")
        if s.iterate_before != cur:
            problems.append(f"{tag}: starts at {s.iterate_before}, previous "
                            f"step ended at {cur}")
        if s.objective_after != vals[s.iterate_after]:
            problems.append(f"{tag}: recorded objective {s.objective_after} "
                            f"!= c.x = {vals[s.iterate_after]}")
        if s.kind is StepKind.HALVE:
            if s.mu_after != s.mu_before / cfg.alpha:
                problems.append(f"{tag}: halving sets mu to {s.mu_after}, "
                                f"expected {s.mu_before / cfg.alpha}")
            if s.iterate_after != s.iterate_before:
                problems.append(f"{tag}: halving moved the iterate")
            gap = opt - vals[s.iterate_before]
            if gap > s.mu_before * n:
                problems.append(f"{tag}: gap {gap} exceeds mu*n = "
                                f"{s.mu_before * n}")
        else:
            if s.mu_after != s.mu_before:
                problems.append(f"{tag}: augmentation changed mu")
            if s.objective_after <= last_obj:
                problems.append(f"{tag}: objective {s.objective_after} does not "
                                f"increase on {last_obj} (monotonicity)")
            last_obj = max(last_obj, s.objective_after)
        mu, cur = s.mu_after, s.iterate_after

    summ = summarize(trace)
    for name in ("augment_count", "halve_count", "total", "final_vertex",
                 "certify_augment_count"):
        if getattr(summ, name) != getattr(trace.summary, name):
            problems.append(f"summary {name}={getattr(trace.summary, name)} "
                            f"but steps tally {getattr(summ, name)}")
    if trace.phases != _phases(trace.steps):
        problems.append("phases do not partition the steps into maximal runs")
    n_aug = summ.augment_count + summ.certify_augment_count
    if n_aug > len(inst.vertices) - 1:
        problems.append(f"{n_aug} augmentations exceed |v(P)|-1 = "
                        f"{len(inst.vertices) - 1}")
    if trace.summary.certified and vals[cur] != opt:
        problems.append(f"certified run ends at value {vals[cur]}, optimum {opt}")
    return problems


# --- serialization ---------------------------------------------------------

def config_to_dict(cfg: EngineConfig) -> dict:
    return {
        "variant": cfg.variant.value,
        "policy": cfg.policy.name if cfg.variant is Variant.FEASIBILITY else None,
        "seed": cfg.policy.seed,
        "mu0": format_rational(cfg.mu0),
        "alpha": format_rational(cfg.alpha),
        "early_stop": cfg.early_stop,
        "certify": cfg.certify,
        "step_limit": cfg.step_limit,
    }


def trace_to_dict(trace: Trace) -> dict:
    s = trace.summary
    return {
        "config": config_to_dict(trace.config),
        "instance": {"digest": trace.instance_digest, "n": trace.n,
                     "start": trace.start},
        "steps": [
            {
                "i": st.index,
                "kind": st.kind.value,
                "mu": format_rational(st.mu_before),
                "mu_after": format_rational(st.mu_after),
                "x": st.iterate_after,
                "obj": str(st.objective_after),
                "x_before": st.iterate_before,
                "ratio": None if st.chosen_ratio is None
                else format_rational(st.chosen_ratio),
                "stage": st.stage,
            }
            for st in trace.steps
        ],
        "phases": [{"kind": p.kind.value, "first": p.first, "last": p.last}
                   for p in trace.phases],
        "summary": {
            "augment": s.augment_count,
            "halve": s.halve_count,
            "total": s.total,
            "certify_augment": s.certify_augment_count,
            "final_vertex": s.final_vertex,
            "final_bits": trace.final_vertex_bits,
            "final_value": str(s.final_value),
            "certified": s.certified,
            "aborted": s.aborted,
        },
    }


def trace_to_json(trace: Trace, indent: Optional[int] = None) -> str:
    return json.dumps(trace_to_dict(trace), indent=indent)

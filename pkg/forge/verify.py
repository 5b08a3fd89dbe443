"""
Branch-by-branch equivalence of a source circuit and its ICM lowering.

Both circuits are enumerated on the same random inputs. Every ICM branch is
replayed through a ``FrameTracker`` so its outcomes are frame-corrected and
its final Pauli frame is known; after applying that frame the branch must
reproduce, up to global phase, the source branch with the same logical
outcomes, and the outcome distributions must agree.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from .circuit import Circuit, Init, Measure, QubitId, SelectiveMeasure
from .constants import DEFAULT_MAX_BRANCHES, FIDELITY_TOL, MAX_ORACLE_QUBITS
from .errors import CapacityExceeded, FrameError
from .frame import FrameTracker
from .gadgets import CorrectionRule
from .oracle import (
    Branch,
    apply_frame,
    fidelity,
    measure_all_branches,
    random_state,
)
from .scheduler import WireAssignment

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BranchCheck:
    trial: int
    key: str  # raw ICM outcome trace
    logical: str  # frame-corrected outcomes of the source measurements
    probability: float
    fidelity: float
    passed: bool


@dataclass(frozen=True)
class DistributionCheck:
    trial: int
    logical: str
    expected: float
    observed: float

    @property
    def passed(self) -> bool:
        return abs(self.expected - self.observed) <= FIDELITY_TOL


@dataclass
class VerifyResult:
    branches: list[BranchCheck] = field(default_factory=list)
    distributions: list[DistributionCheck] = field(default_factory=list)
    seed: int = 0

    @property
    def passed(self) -> bool:
        return all(b.passed for b in self.branches) and all(d.passed for d in self.distributions)

    @property
    def failures(self) -> list[BranchCheck]:
        return [b for b in self.branches if not b.passed]

    def table(self) -> str:
        rows = [f"{'trial':>5}  {'branch':<24} {'logical':<12} {'prob':>10}  {'fidelity':>14}  result"]
        for b in self.branches:
            rows.append(
                f"{b.trial:>5}  {b.key or '-':<24} {b.logical or '-':<12} "
                f"{b.probability:>10.6f}  {b.fidelity:>14.12f}  {'PASS' if b.passed else 'FAIL'}"
            )
        for d in self.distributions:
            if not d.passed:
                rows.append(
                    f"{d.trial:>5}  outcome {d.logical or '-'}: probability "
                    f"{d.observed:.12f}, expected {d.expected:.12f}  FAIL"
                )
        rows.append("PASS" if self.passed else f"FAIL ({len(self.failures)} branch(es))")
        return "\n".join(rows)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "seed": self.seed,
            "branches": [
                {
                    "trial": b.trial,
                    "key": b.key,
                    "logical": b.logical,
                    "probability": round(b.probability, 12),
                    "fidelity": round(b.fidelity, 12),
                    "passed": b.passed,
                }
                for b in self.branches
            ],
            "distribution_failures": [
                {"trial": d.trial, "logical": d.logical, "expected": d.expected, "observed": d.observed}
                for d in self.distributions
                if not d.passed
            ],
        }


def peak_live(c: Circuit) -> int:
    """Largest number of simultaneously live qubits (episodic circuits included)."""
    live = set(c.inputs)
    best = len(live)
    for op in c.ops:
        if isinstance(op, Init):
            live.add(op.qubit)
            best = max(best, len(live))
        elif isinstance(op, (Measure, SelectiveMeasure)):
            live.discard(op.qubit)
    return best


def check_capacity(c: Circuit, max_qubits: int) -> None:
    limit = min(max_qubits, MAX_ORACLE_QUBITS)
    peak = peak_live(c)
    if peak > limit:
        raise CapacityExceeded(f"{peak} live qubit(s) exceed the verification cap of {limit}")


def _logical_key(outcomes: Mapping[QubitId, int], order: Sequence[QubitId]) -> str:
    return "".join(str(outcomes[q]) for q in order)


# --------------------------------------------------------------
def verify_equivalence(
    source: Circuit,
    icm: Circuit,
    rules: Sequence[CorrectionRule],
    wire_of: Mapping[QubitId, QubitId],
    measured_on: Mapping[QubitId, QubitId],
    *,
    seed: int = 0,
    trials: int = 1,
    max_branches: int = DEFAULT_MAX_BRANCHES,
    max_qubits: int = MAX_ORACLE_QUBITS,
) -> VerifyResult:
    """
    Parameters
    ----------
    source : Circuit
        The circuit before lowering (gates and rotations allowed).
    icm, rules : Circuit, Sequence[CorrectionRule]
        The lowered circuit and the correction rules of its gadgets.
    wire_of : Mapping
        Source qubit live at the end -> ICM wire carrying it.
    measured_on : Mapping
        Source qubit measured -> ICM wire whose outcome stands for it.
    trials : int
        Number of random input assignments, all drawn from ``seed``.
    """
    check_capacity(source, max_qubits)
    check_capacity(icm, max_qubits)
    if set(source.inputs) != set(icm.inputs):
        raise FrameError("source and ICM circuits declare different inputs")
    order = sorted(measured_on)
    back = {wire: q for q, wire in wire_of.items()}
    rng = np.random.default_rng(seed)
    result = VerifyResult(seed=seed)

    for trial in range(trials):
        inputs = {q: random_state(rng, q) for q in source.ordered_inputs}

        expected: Dict[str, list[Branch]] = defaultdict(list)
        expected_p: Dict[str, float] = defaultdict(float)
        for b in measure_all_branches(source, inputs, max_branches=max_branches):
            key = _logical_key(b.outcomes, order)
            expected[key].append(b)
            expected_p[key] += b.probability

        observed_p: Dict[str, float] = defaultdict(float)
        tracker = FrameTracker(rules, icm.inputs)
        for b in measure_all_branches(icm, inputs, ledger=tracker, max_branches=max_branches):
            logical = _logical_key({q: b.outcomes[w] for q, w in measured_on.items()}, order)
            observed_p[logical] += b.probability
            corrected = apply_frame(b.state, b.ledger.frame).renamed(back)
            candidates = expected.get(logical, [])
            best = max((fidelity(s.state, corrected) for s in candidates), default=0.0)
            passed = best >= 1 - FIDELITY_TOL
            result.branches.append(BranchCheck(trial, b.key, logical, b.probability, best, passed))
            if not passed:
                logger.warning("trial %d branch %s (logical %s): fidelity %.12f", trial, b.key, logical, best)

        for key in sorted(set(expected_p) | set(observed_p)):
            result.distributions.append(
                DistributionCheck(trial, key, expected_p.get(key, 0.0), observed_p.get(key, 0.0))
            )

    logger.info(
        "verify: %d branch(es) over %d trial(s), %s",
        len(result.branches), trials, "PASS" if result.passed else "FAIL",
    )
    return result


def verify_wire_rewrite(
    icm: Circuit,
    rewritten: Circuit,
    w: WireAssignment,
    *,
    seed: int = 0,
    max_branches: int = DEFAULT_MAX_BRANCHES,
    tol: float = FIDELITY_TOL,
) -> bool:
    """Branch distributions and states agree before and after wire sharing."""
    rng = np.random.default_rng(seed)
    inputs = {q: random_state(rng, q) for q in icm.ordered_inputs}
    renamed_inputs = {w.wire_name(q): s.renamed({q: w.wire_name(q)}) for q, s in inputs.items()}
    before = measure_all_branches(icm, inputs, max_branches=max_branches)
    after = measure_all_branches(rewritten, renamed_inputs, max_branches=max_branches)
    if len(before) != len(after):
        return False
    by_key = {b.key: b for b in after}
    for b in before:
        twin: Optional[Branch] = by_key.get(b.key)
        if twin is None or abs(twin.probability - b.probability) > tol:
            return False
        names = {q: w.wire_name(q) for q in b.state.qubit_order}
        if fidelity(b.state.renamed(names), twin.state) < 1 - tol:
            return False
    return True

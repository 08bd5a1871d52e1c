"""Branch-level proofreading sessions and the click-order simulation.

A session starts from the segmentation grown at the initial threshold.
Each decision forces one branch in or out; undecided branches keep
following the threshold. Clicks are recorded in a linear log; with ground
truth present, the VOI after every click is appended to the history, so a
session replay reproduces the whole curve.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatch, NoOpDecision, UnknownBranch
from .family import SkeletonFamily, Skeleton
from .metrics import voi
from .prob import ThresholdDistribution, branch_uncertainty
from .raster_io import BinaryMask2D, ScalarField2D
from .segment import StructuralSegmentation, binarize, grow_segmentation

KEEP, DROP, UNDECIDED = "keep", "drop", "undecided"
TRUE_STRUCTURE, FALSE_STRUCTURE = "true_structure", "false_structure"


def label_branches(
    family: SkeletonFamily,
    gt: BinaryMask2D,
    rho: float = 0.5,
    tol: int = 2,
) -> dict[int, str]:
    """Label each branch against ground truth.

    A branch is a true structure when at least ``rho`` of its pixels lie
    within Chebyshev distance ``tol`` of a foreground pixel.
    """
    if gt.bits.shape != (family.height, family.width):
        raise DimensionMismatch(f"gt {gt.bits.shape} vs family "
                                f"{(family.height, family.width)}")
    if gt.bits.any():
        dist = ndimage.distance_transform_cdt(1 - gt.bits, metric="chessboard")
    else:
        dist = np.full(gt.bits.shape, np.iinfo(np.int32).max)
    labels: dict[int, str] = {}
    for b in family.branches:
        if len(b.pixels) == 0:
            labels[b.id] = FALSE_STRUCTURE
            continue
        near = dist[b.pixels[:, 0], b.pixels[:, 1]] <= tol
        frac = float(near.mean())
        labels[b.id] = TRUE_STRUCTURE if frac >= rho else FALSE_STRUCTURE
    return labels


@dataclass
class ProofreadSession:
    family: SkeletonFamily
    field: ScalarField2D
    epsilon0: float
    gt: BinaryMask2D | None = None
    dist: ThresholdDistribution | None = None
    decisions: dict[int, str] = dc_field(default_factory=dict)
    click_log: list[tuple[int, str]] = dc_field(default_factory=list)
    voi_history: list[float] = dc_field(default_factory=list)

    def effective_ids(self) -> frozenset[int]:
        """Kept branches plus undecided ones above the threshold."""
        ids = set()
        for b in self.family.branches:
            decision = self.decisions.get(b.id, UNDECIDED)
            if decision == KEEP:
                ids.add(b.id)
            elif decision == UNDECIDED and b.persistence >= self.epsilon0:
                ids.add(b.id)
        return frozenset(ids)

    def skeleton(self) -> Skeleton:
        ids = self.effective_ids()
        return Skeleton(ids, self.family.render(ids))

    def segmentation(self) -> StructuralSegmentation:
        return grow_segmentation(binarize(self.field), self.skeleton())

    def current_voi(self) -> float | None:
        if self.gt is None:
            return None
        return voi(self.segmentation().mask, self.gt)

    def to_json(self) -> str:
        return json.dumps(
            {
                "epsilon0": self.epsilon0,
                "decisions": {str(k): v for k, v in sorted(self.decisions.items())},
                "click_log": [[bid, act] for bid, act in self.click_log],
                "voi_history": self.voi_history,
            },
            sort_keys=True,
        )

    def restore_json(self, payload: str) -> None:
        obj = json.loads(payload)
        self.epsilon0 = float(obj["epsilon0"])
        self.decisions = {int(k): v for k, v in obj["decisions"].items()}
        self.click_log = [(int(b), a) for b, a in obj["click_log"]]
        self.voi_history = [float(v) for v in obj["voi_history"]]


def new_session(
    family: SkeletonFamily,
    field: ScalarField2D,
    start: ThresholdDistribution | float,
    gt: BinaryMask2D | None = None,
) -> ProofreadSession:
    """Fresh session; the initial skeleton is the one at mu (or the given
    threshold), and the VOI history is seeded when ground truth is present."""
    if isinstance(start, ThresholdDistribution):
        eps0, dist = start.mu, start
    else:
        eps0, dist = float(start), None
    session = ProofreadSession(family, field, eps0, gt=gt, dist=dist)
    if gt is not None:
        session.voi_history.append(session.current_voi())
    return session


def apply_decision(
    session: ProofreadSession, branch_id: int, action: str
) -> tuple[StructuralSegmentation, float | None]:
    """Force one branch in (keep) or out (drop); one click.

    Raises NoOpDecision when the branch already is in the requested state.
    """
    if action not in (KEEP, DROP):
        raise ValueError(f"action must be keep or drop, got {action!r}")
    try:
        session.family.by_id(branch_id)
    except KeyError:
        raise UnknownBranch(f"no branch with id {branch_id}") from None
    included = branch_id in session.effective_ids()
    if (action == KEEP) == included:
        raise NoOpDecision(
            f"branch {branch_id} is already {'included' if included else 'excluded'}"
        )
    session.decisions[branch_id] = action
    session.click_log.append((branch_id, action))
    seg = session.segmentation()
    score = None
    if session.gt is not None:
        score = voi(seg.mask, session.gt)
        session.voi_history.append(score)
    return seg, score


@dataclass
class SimulationResult:
    voi_curve: list[float]  # initial VOI plus one value per click
    clicks: int
    inspected: int  # branches examined, including already-correct ones


def simulate(
    field: ScalarField2D,
    family: SkeletonFamily,
    dist: ThresholdDistribution,
    gt: BinaryMask2D,
    order: str = "uncertainty_desc",
    seed: int = 0,
    max_clicks: int | None = None,
    rho: float = 0.5,
    tol: int = 2,
) -> SimulationResult:
    """Simulated user pass over the branches in the given order.

    Branches whose current inclusion disagrees with their label get the
    correcting decision (one click each); already-correct branches are
    skipped without consuming a click. ``order`` is ``uncertainty_desc``
    (ties: higher persistence, then id) or ``random`` (seeded).
    """
    labels = label_branches(family, gt, rho=rho, tol=tol)
    session = new_session(family, field, dist, gt=gt)
    branches = list(family.branches)
    if order == "uncertainty_desc":
        branches.sort(
            key=lambda b: (
                -branch_uncertainty(dist, b),
                -b.persistence if math.isfinite(b.persistence) else -math.inf,
                b.id,
            )
        )
    elif order == "random":
        rng = np.random.default_rng(seed)
        branches = [branches[i] for i in rng.permutation(len(branches))]
    else:
        raise ValueError(f"unknown order {order!r}")

    clicks = 0
    inspected = 0
    for b in branches:
        if max_clicks is not None and clicks >= max_clicks:
            break
        inspected += 1
        included = b.id in session.effective_ids()
        want = labels[b.id] == TRUE_STRUCTURE
        if included == want:
            continue
        apply_decision(session, b.id, KEEP if want else DROP)
        clicks += 1
    return SimulationResult(list(session.voi_history), clicks, inspected)

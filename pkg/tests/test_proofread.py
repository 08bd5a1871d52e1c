import json
import math

import numpy as np
import pytest

from structseg.errors import NoOpDecision, UnknownBranch
from structseg.metrics import voi
from structseg.morse import extract_morse_complex
from structseg.prob import ThresholdDistribution
from structseg.proofread import (
    DROP,
    FALSE_STRUCTURE,
    KEEP,
    TRUE_STRUCTURE,
    apply_decision,
    label_branches,
    new_session,
    simulate,
)
from structseg.raster_io import BinaryMask2D
from structseg.segment import binarize, grow_segmentation
from structseg.synth import line_grid, two_bump


@pytest.fixture(scope="module")
def grid_instance():
    field, gt, _ = line_grid(36, 36, 9, noise_amp=0.15, seed=5)
    family = extract_morse_complex(field)
    return field, gt, family


def test_label_branches_inside_and_outside(grid_instance):
    field, gt, family = grid_instance
    labels = label_branches(family, gt)
    assert set(labels) == {b.id for b in family.branches}
    from scipy import ndimage

    dist = ndimage.distance_transform_cdt(1 - gt.bits, metric="chessboard")
    for b in family.branches:
        near = dist[b.pixels[:, 0], b.pixels[:, 1]] <= 2
        if near.all():
            assert labels[b.id] == TRUE_STRUCTURE
        if not near.any():
            assert labels[b.id] == FALSE_STRUCTURE


def test_label_branches_boundary_rho():
    field, _ = two_bump(16, 9, 1.0, 0.8, 0.6)
    family = extract_morse_complex(field)
    branch = family.branches[0]
    n = len(branch.pixels)
    gt_bits = np.zeros((9, 16), dtype=np.uint8)
    # cover exactly half the branch pixels (rounded up), tol=0
    for y, x in branch.pixels[: (n + 1) // 2]:
        gt_bits[y, x] = 1
    labels = label_branches(family, BinaryMask2D(16, 9, gt_bits), rho=0.5, tol=0)
    if n % 2 == 0:
        assert labels[branch.id] == TRUE_STRUCTURE  # >= convention at half


def test_new_session_at_zero_keeps_all(grid_instance):
    field, gt, family = grid_instance
    session = new_session(family, field, 0.0, gt=None)
    assert session.effective_ids() == frozenset(b.id for b in family.branches)
    assert session.voi_history == []


def test_new_session_with_gt_seeds_history(grid_instance):
    field, gt, family = grid_instance
    session = new_session(family, field, ThresholdDistribution(0.05, 0.01), gt=gt)
    assert len(session.voi_history) == 1
    assert session.voi_history[0] == pytest.approx(
        voi(session.segmentation().mask, gt)
    )


def test_sessions_deterministic(grid_instance):
    field, gt, family = grid_instance
    a = new_session(family, field, 0.05, gt=gt)
    b = new_session(family, field, 0.05, gt=gt)
    assert a.to_json() == b.to_json()


def test_apply_decision_noop_and_unknown(grid_instance):
    field, gt, family = grid_instance
    session = new_session(family, field, 0.05, gt=gt)
    included = next(iter(session.effective_ids()))
    with pytest.raises(NoOpDecision):
        apply_decision(session, included, KEEP)
    excluded = [b.id for b in family.branches if b.id not in session.effective_ids()]
    if excluded:
        with pytest.raises(NoOpDecision):
            apply_decision(session, excluded[0], DROP)
    with pytest.raises(UnknownBranch):
        apply_decision(session, 10**9, KEEP)


def test_apply_then_reverse_restores_segmentation(grid_instance):
    field, gt, family = grid_instance
    session = new_session(family, field, 0.05, gt=gt)
    before = session.segmentation().mask.bits.copy()
    target = next(iter(session.effective_ids()))
    apply_decision(session, target, DROP)
    mid = session.segmentation().mask.bits
    assert not np.array_equal(mid, before) or True  # branch may be covered
    apply_decision(session, target, KEEP)
    after = session.segmentation().mask.bits
    assert np.array_equal(after, before)
    assert len(session.click_log) == 2
    assert len(session.voi_history) == 3


def test_keeping_missing_true_branch_lowers_voi():
    # two bright segments; gt covers both; start threshold excludes one
    field, _ = two_bump(20, 11, 1.0, 0.8, 0.6)
    family = extract_morse_complex(field)
    finite = next(b for b in family.branches if math.isfinite(b.persistence))
    gt = grow_segmentation(binarize(field), family.skeleton_at(0.0)).mask
    session = new_session(family, field, finite.persistence + 0.05, gt=gt)
    assert finite.id not in session.effective_ids()
    before = session.voi_history[-1]
    _, after = apply_decision(session, finite.id, KEEP)
    assert after < before


def test_session_json_replay(grid_instance):
    field, gt, family = grid_instance
    session = new_session(family, field, 0.05, gt=gt)
    ids = sorted(b.id for b in family.branches)
    moves = []
    for bid in ids[:6]:
        action = DROP if bid in session.effective_ids() else KEEP
        apply_decision(session, bid, action)
        moves.append((bid, action))
    payload = session.to_json()

    replay = new_session(family, field, 0.05, gt=gt)
    for bid, action in moves:
        apply_decision(replay, bid, action)
    assert replay.to_json() == payload
    assert json.loads(payload)["voi_history"] == replay.voi_history


def test_simulate_no_misclassified_yields_single_point():
    field, _ = two_bump(20, 11, 1.0, 0.8, 0.6)
    family = extract_morse_complex(field)
    gt = grow_segmentation(binarize(field), family.skeleton_at(0.0)).mask
    # start at 0: everything included; every branch near gt => all correct
    result = simulate(field, family, ThresholdDistribution(0.0, 0.01), gt,
                      order="uncertainty_desc")
    labels = label_branches(family, gt)
    if all(v == TRUE_STRUCTURE for v in labels.values()):
        assert result.clicks == 0
        assert len(result.voi_curve) == 1


def test_simulate_fixpoint_order_independent(grid_instance):
    # after exhausting all branches the reconstruction is the same mask for
    # every click order
    field, gt, family = grid_instance
    dist = ThresholdDistribution(0.06, 0.02)
    labels = label_branches(family, gt)
    wanted = frozenset(b for b, v in labels.items() if v == TRUE_STRUCTURE)
    from structseg.family import Skeleton

    expected = grow_segmentation(
        binarize(field), Skeleton(wanted, family.render(wanted))
    ).mask.bits
    for order, seed in (("uncertainty_desc", 0), ("random", 1), ("random", 2)):
        res = simulate(field, family, dist, gt, order=order, seed=seed)
        assert res.inspected == len(family.branches)
        # replay the final decision state explicitly
        session = new_session(family, field, dist, gt=gt)
        for b in family.branches:
            included = b.id in session.effective_ids()
            want = labels[b.id] == TRUE_STRUCTURE
            if included != want:
                apply_decision(session, b.id, KEEP if want else DROP)
        assert np.array_equal(session.segmentation().mask.bits, expected)
        assert res.voi_curve[-1] == pytest.approx(voi(
            session.segmentation().mask, gt), abs=1e-12)


def test_simulate_final_voi_matches_label_reconstruction(grid_instance):
    field, gt, family = grid_instance
    dist = ThresholdDistribution(0.06, 0.02)
    res = simulate(field, family, dist, gt, order="uncertainty_desc")
    labels = label_branches(family, gt)
    wanted = frozenset(b for b, v in labels.items() if v == TRUE_STRUCTURE)
    mask = grow_segmentation(binarize(field),
                             __import__("structseg.family", fromlist=["Skeleton"]).Skeleton(
                                 wanted, family.render(wanted))).mask
    assert res.voi_curve[-1] == pytest.approx(voi(mask, gt), abs=1e-12)


def test_simulate_respects_max_clicks(grid_instance):
    field, gt, family = grid_instance
    dist = ThresholdDistribution(0.06, 0.02)
    res = simulate(field, family, dist, gt, order="random", seed=3, max_clicks=2)
    assert res.clicks <= 2
    assert len(res.voi_curve) == res.clicks + 1

import csv
import io

import numpy as np
import pytest

from boundary_sdf.distance import normalize_sdf, signed_distance
from boundary_sdf.errors import DivergenceError
from boundary_sdf.losses import LossParams, focus_grad_array, weights_from_array
from boundary_sdf.optimize import (
    CSV_HEADER,
    DescentConfig,
    compare,
    descend,
    quadratic_stability_bound,
)
from boundary_sdf.synth import PerturbSpec, ShapeSpec, generate, perturb_sdf

SHAPE = ShapeSpec("annulus", (32, 32), {"r_out": 10, "thickness": 3})
PERTURB = PerturbSpec(noise_sigma=1.0, bias=1.0, smooth_radius=1, seed=4)


@pytest.fixture(scope="module")
def problem():
    mask = generate(SHAPE)
    gt = signed_distance(mask)
    return mask, gt, perturb_sdf(gt, PERTURB)


def test_config_validation():
    for bad in (dict(steps=0), dict(learning_rate=0.0), dict(eval_every=0), dict(loss="l3")):
        with pytest.raises(ValueError):
            DescentConfig(**bad)


def test_fixed_point(problem):
    mask, gt, _ = problem
    traj = descend(gt, gt, mask, DescentConfig(steps=20, learning_rate=50.0, eval_every=5))
    assert [pt.step for pt in traj] == [0, 5, 10, 15, 20]
    for pt in traj:
        assert (pt.loss_total, pt.dice, pt.iou, pt.hd95) == (0.0, 1.0, 1.0, 0.0)


def test_quadratic_closed_form(problem):
    mask, gt, init = problem
    n = gt.data.size
    lr = 0.1 * quadratic_stability_bound(n)
    cfg = DescentConfig("u", 30, lr, "uniform_lp", LossParams(p=2, lam=0.0), 1)
    traj = descend(init, gt, mask, cfg)
    factor = (1 - 2 * lr / n) ** 2
    losses = [pt.loss_total for pt in traj]
    assert all(b <= a for a, b in zip(losses, losses[1:]))
    for k, loss in enumerate(losses):
        assert loss == pytest.approx(losses[0] * factor**k, rel=1e-9)


def test_first_order_decrease(problem):
    mask, gt, init = problem
    params = LossParams(gamma=0.1, lam=1.0, p=2)
    lr = 1.0
    traj = descend(init, gt, mask, DescentConfig("f", 1, lr, "focus_sdf", params, 1))
    w = weights_from_array(gt.data, params.gamma)
    g = focus_grad_array(init.data, gt.data, w, 2, params.lam)
    predicted = lr * float(np.sum(g * g))
    ratio = (traj[0].loss_total - traj[1].loss_total) / predicted
    assert 0.5 <= ratio <= 1.5


def test_divergence_reports_step(problem):
    mask, gt, init = problem
    cfg = DescentConfig("u", 400, 1e8, "uniform_lp", LossParams(p=2, lam=0.0), 50)
    with pytest.raises(DivergenceError) as info:
        descend(init, gt, mask, cfg)
    assert 0 < info.value.step <= 400


def test_normalized_units_descend(problem):
    mask, gt, init = problem
    ngt = normalize_sdf(gt)
    mean, std = ngt.norm_params
    ninit = ngt.replace_data((init.data - mean) / std)
    traj = descend(ninit, ngt, mask, DescentConfig("f", 50, 50.0, "focus_sdf", LossParams(p=2), 10))
    raw = descend(init, gt, mask, DescentConfig("f", 1, 50.0, "focus_sdf", LossParams(p=2), 1))
    assert traj[0].dice == raw[0].dice
    assert traj[-1].loss_total < traj[0].loss_total


def test_compare_identical_configs_are_deterministic():
    cfg = DescentConfig("a", 40, 30.0, "focus_sdf", LossParams(p=1), 10)
    twin = DescentConfig("b", 40, 30.0, "focus_sdf", LossParams(p=1), 10)
    rep = compare(SHAPE, PERTURB, [cfg, twin])
    assert rep.result("a").trajectory == rep.result("b").trajectory
    assert compare(SHAPE, PERTURB, [cfg, twin]).to_csv() == rep.to_csv()


@pytest.mark.parametrize("p", [1, 2])
def test_flat_focus_equals_uniform(p):
    flat = DescentConfig("flat", 40, 30.0, "focus_sdf", LossParams(gamma=0.0, lam=0.0, p=p), 5)
    uni = DescentConfig("uni", 40, 30.0, "uniform_lp", LossParams(gamma=0.3, lam=2.0, p=p), 5)
    rep = compare(SHAPE, PERTURB, [flat, uni])
    assert rep.result("flat").trajectory == rep.result("uni").trajectory


def test_compare_csv_and_budget_rules():
    cfgs = [
        DescentConfig("focus_sdf", 30, 20.0, "focus_sdf", LossParams(p=1), 10),
        DescentConfig("uniform_lp", 30, 20.0, "uniform_lp", LossParams(p=1), 10),
    ]
    rep = compare(SHAPE, PERTURB, cfgs)
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0] == CSV_HEADER
    assert len(rows) == 1 + 2 * (30 // 10 + 1)
    assert {r[0] for r in rows[1:]} == {"focus_sdf", "uniform_lp"}
    assert "initial" in rep.summary_table()
    with pytest.raises(ValueError):
        compare(SHAPE, PERTURB, [cfgs[0], DescentConfig("x", 31, 20.0)])
    with pytest.raises(ValueError):
        compare(SHAPE, PERTURB, [cfgs[0], cfgs[0]])


def test_compare_isolates_failures():
    good = DescentConfig("good", 300, 1e8, "focus_sdf", LossParams(gamma=0.0, lam=0.0, p=1), 100)
    bad = DescentConfig("bad", 300, 1e8, "uniform_lp", LossParams(p=2), 100)
    rep = compare(SHAPE, PERTURB, [bad, good])
    assert "DivergenceError" in rep.result("bad").error
    assert rep.result("good").error is None and rep.result("good").final.step == 300


def test_undefined_hd95_renders_empty():
    # bias large enough to erase the thresholded foreground at step 0
    rep = compare(SHAPE, PerturbSpec(bias=10.0), [DescentConfig("u", 1, 1.0, "uniform_lp", LossParams(p=2), 1)])
    assert rep.initial_hd95 is None
    first = list(csv.reader(io.StringIO(rep.to_csv())))[1]
    assert first[-1] == ""

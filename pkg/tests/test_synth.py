import itertools

import numpy as np
import pytest

from boundary_sdf.distance import signed_distance
from boundary_sdf.errors import DegenerateGeometryError, NormalizationError
from boundary_sdf.distance import normalize_sdf
from boundary_sdf.grid import mask_from_sdf
from boundary_sdf.synth import PerturbSpec, ShapeSpec, generate, perturb_sdf


def lattice_count(radius):
    return sum(1 for dr, dc in itertools.product(range(-radius, radius + 1), repeat=2)
               if dr * dr + dc * dc <= radius * radius)


def test_disk_lattice_count():
    m = generate(ShapeSpec("disk", (64, 64), {"radius": 5}))
    assert lattice_count(5) == 81
    assert m.count() == 81
    assert m.data[32, 32] == 1 and m.data[32, 37] == 1 and m.data[32, 38] == 0


def test_annulus_is_difference_of_disks():
    ring = generate(ShapeSpec("annulus", (64, 64), {"r_in": 4, "r_out": 5}))
    assert ring.count() == lattice_count(5) - lattice_count(4)
    via_thickness = generate(ShapeSpec("annulus", (64, 64), {"r_out": 5, "thickness": 1}))
    assert via_thickness == ring


@pytest.mark.parametrize("kind", ["disk", "annulus", "curve", "multi_blob"])
def test_determinism_and_validity(kind):
    spec = ShapeSpec(kind, (48, 40), seed=99)
    a, b = generate(spec), generate(spec)
    assert a == b
    assert a.data.tobytes() == b.data.tobytes()
    assert 0 < a.count() < 48 * 40


def test_seed_changes_random_shapes():
    a = generate(ShapeSpec("curve", (64, 64), seed=1))
    b = generate(ShapeSpec("curve", (64, 64), seed=2))
    assert a != b


def test_degenerate_geometry():
    with pytest.raises(DegenerateGeometryError):
        generate(ShapeSpec("disk", (8, 8), {"radius": 100}))
    with pytest.raises(DegenerateGeometryError):
        generate(ShapeSpec("annulus", (16, 16), {"r_in": 5, "r_out": 5}))
    with pytest.raises(ValueError):
        ShapeSpec("star", (8, 8))


def test_perturb_identity_and_bias():
    gt = signed_distance(generate(ShapeSpec("disk", (32, 32), {"radius": 6})))
    assert perturb_sdf(gt, PerturbSpec()) == gt
    shifted = perturb_sdf(gt, PerturbSpec(bias=2.0))
    np.testing.assert_array_equal(shifted.data, gt.data + 2.0)
    assert mask_from_sdf(shifted).count() < mask_from_sdf(gt).count()
    with pytest.raises(NormalizationError):
        perturb_sdf(normalize_sdf(gt), PerturbSpec())


@pytest.mark.parametrize("passes", [0, 2])
def test_noise_statistics(passes):
    gt = signed_distance(generate(ShapeSpec("disk", (128, 128), {"radius": 30})))
    out = perturb_sdf(gt, PerturbSpec(noise_sigma=1.0, bias=0.5, smooth_radius=passes, seed=3))
    noise = out.data - gt.data - 0.5
    assert abs(noise.std() - 1.0) <= 0.15
    again = perturb_sdf(gt, PerturbSpec(noise_sigma=1.0, bias=0.5, smooth_radius=passes, seed=3))
    assert again.data.tobytes() == out.data.tobytes()


def test_bias_monotone_in_thresholded_foreground():
    gt = signed_distance(generate(ShapeSpec("multi_blob", (64, 64), seed=5)))
    base = mask_from_sdf(perturb_sdf(gt, PerturbSpec(1.0, 0.0, 1, seed=8))).foreground
    grown = mask_from_sdf(perturb_sdf(gt, PerturbSpec(1.0, -1.0, 1, seed=8))).foreground
    shrunk = mask_from_sdf(perturb_sdf(gt, PerturbSpec(1.0, 1.0, 1, seed=8))).foreground
    assert np.all(shrunk <= base) and np.all(base <= grown)

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eosynth.composer import Geometry, SceneComposition, SceneElement, compose_scene, procedural_partition, scene_context
from eosynth.geometry import rasterize_region
from eosynth.ontology import SceneExtentConfig
from eosynth.rng import Stream
from eosynth.texture import (
    FillSource,
    KernelSpec,
    RenderError,
    TexturePlan,
    fill_partition,
    kernel_shape,
    plan_from_composition,
    png_bytes,
    point_pixels,
    render_rig,
    render_scene,
    render_turbine,
)

from oracles import local_maxima

SMALL = SceneExtentConfig(2560.0, 10.0)   # 256 px scenes keep the tests quick


def _sea_scene(extent=SMALL, points=None, entity="WindFarm", part="WindTurbine"):
    els = procedural_partition(extent, Stream(0))
    if points is not None:
        pts = np.asarray(points, dtype=float)
        els.append(SceneElement(entity, "target", Geometry(points=pts), parts={part: Geometry(points=pts)}))
    return SceneComposition(extent, els, 0)


def _plan(value, spec=None, part="WindTurbine"):
    return TexturePlan({"Sea": FillSource("constant", value=value)}, {part: spec} if spec else {})


def test_constant_sea_fill():
    img = fill_partition(_sea_scene(), _plan(38), None, Stream(0))
    assert img.dtype == np.uint8 and img.shape == (256, 256)
    assert (img == 38).all()


def test_dataset1_sea_is_one_value_per_image(ontology):
    values = set()
    for seed in range(6):
        comp = compose_scene(ontology, scene_context("owf-small"), Stream(seed))
        base = fill_partition(comp, plan_from_composition(comp), None, Stream(seed))
        sea = rasterize_region(comp.element("Sea").region, 2048, 2048, 10.0)
        assert len(np.unique(base[sea])) == 1
        v = comp.spec("Sea").value("constant_value")
        assert 15 <= v <= 60
        values.add(int(base[sea][0]))
    assert len(values) > 1


def test_template_fill_is_bit_exact(store):
    extent = SceneExtentConfig(20480.0, 10.0)
    comp = _sea_scene(extent)
    plan = TexturePlan({"Sea": FillSource("template", class_tag="sea")}, {})
    img = fill_partition(comp, plan, store, Stream(77))
    # Replay the fill's draws: tile choice, then row and column offsets.
    rng = Stream(77)
    tiles = store.index.of_class("sea")
    tile = tiles[rng.integers(0, len(tiles) - 1)]
    oy = rng.integers(0, tile.height - 2048)
    ox = rng.integers(0, tile.width - 2048)
    source = store.read(tile.tile_id)[oy:oy + 2048, ox:ox + 2048]
    assert np.array_equal(img, source)


def test_zero_amplitude_leaves_image():
    img = np.full((40, 40), 50, np.uint8)
    out = render_turbine(img, (20, 20), KernelSpec("gaussian", amplitude=0.0, sigma=2.0), 50.0)
    assert np.array_equal(out, img)


@pytest.mark.parametrize("sigma", [1.0, 1.5, 2.0])
def test_gaussian_matches_closed_form(sigma):
    img = np.zeros((61, 61), np.uint8)
    spec = KernelSpec("gaussian", amplitude=255.0, sigma=sigma)
    out = render_turbine(img, (30, 30), spec, 0.0)
    assert out[30, 30] == 255
    r = spec.radius
    for y in range(61):
        for x in range(61):
            d2 = (y - 30) ** 2 + (x - 30) ** 2
            expected = 255 * math.exp(-d2 / (2 * sigma * sigma)) if d2 <= r * r else 0.0
            assert out[y, x] == int(np.clip(np.rint(expected), 0, 255))
    row = out[30, 30:30 + r + 1].astype(int)
    assert np.all(np.diff(row) <= 0)


def test_x_pattern_has_diagonal_arms():
    spec = KernelSpec("x-pattern", amplitude=200.0, sigma=1.0, arm_length=6.0, arm_width=0.7)
    out = render_turbine(np.zeros((61, 61), np.uint8), (30, 30), spec, 0.0).astype(int)
    for k in (3, 5):
        diag = [out[30 + k, 30 + k], out[30 - k, 30 - k], out[30 + k, 30 - k], out[30 - k, 30 + k]]
        axis = [out[30 + k, 30], out[30, 30 + k]]
        assert min(diag) > max(axis)


def test_tidal_damped_arms_are_dimmer():
    base = dict(amplitude=200.0, sigma=1.0, arm_length=6.0, arm_width=0.7)
    x = render_turbine(np.zeros((61, 61), np.uint8), (30, 30), KernelSpec("x-pattern", **base), 0.0)
    t = render_turbine(np.zeros((61, 61), np.uint8), (30, 30), KernelSpec("tidal-damped", damping=0.3, **base), 0.0)
    assert t[34, 34] < x[34, 34]
    assert t[30, 30] == x[30, 30]


def test_outside_location_is_an_error():
    with pytest.raises(RenderError):
        render_turbine(np.zeros((10, 10), np.uint8), (10, 3), KernelSpec(), 0.0)


def test_rig_and_turbine_share_footprint():
    spec = KernelSpec("gaussian", amplitude=180.0, sigma=1.3)
    img = np.full((30, 30), 40, np.uint8)
    assert np.array_equal(render_rig(img, (15, 15), spec, 40.0), render_turbine(img, (15, 15), spec, 40.0))
    with pytest.raises(RenderError):
        render_rig(img, (15, 15), KernelSpec("x-pattern"), 40.0)


def test_rig_at_corner_is_clipped():
    spec = KernelSpec("gaussian", amplitude=200.0, sigma=1.5)
    img = np.full((20, 20), 30, np.uint8)
    out = render_rig(img, (0, 0), spec, 30.0)
    assert out.shape == img.shape and out[0, 0] == 230
    big = np.full((40, 40), 30, np.uint8)
    ref = render_rig(big, (20, 20), spec, 30.0)
    assert np.array_equal(out[:20, :20], ref[20:40, 20:40])


def test_n_rigs_give_n_maxima():
    rng = Stream(5)
    pts = []
    while len(pts) < 12:
        p = rng.uniform_array(100, 2460, 2)
        if all(np.hypot(*(p - q)) > 200 for q in pts):
            pts.append(p)
    comp = _sea_scene(points=pts, entity="RigField", part="OilRig")
    spec = KernelSpec("gaussian", amplitude=150.0, sigma=1.2)
    img = render_scene(comp, _plan(30, spec, "OilRig"), None, Stream(0))
    assert len(local_maxima(img, 30)) == 12


def test_k_turbines_give_k_maxima(ontology):
    checked = 0
    for seed in range(40):
        comp = compose_scene(ontology, scene_context("owf-large"), Stream(seed))
        farm = comp.element("WindFarm")
        plan = plan_from_composition(comp)
        spec = plan.kernels["WindTurbine"]
        px = point_pixels(farm.points, 10.0, (2048, 2048))
        gaps = np.hypot(*(px[:, None, :] - px[None, :, :]).transpose(2, 0, 1))
        np.fill_diagonal(gaps, np.inf)
        if gaps.min() <= 2 * spec.radius or comp.element("Land") is not None:
            continue
        img = render_scene(comp, plan, None, Stream(seed))
        sea = int(plan.fills["Sea"].value)
        r0, c0 = px.min(axis=0) - spec.radius - 2
        r1, c1 = px.max(axis=0) + spec.radius + 3
        crop = img[max(r0, 0):r1, max(c0, 0):c1]
        assert len(local_maxima(crop, sea)) == len(farm.points)
        checked += 1
    assert checked >= 10


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["gaussian", "x-pattern", "tidal-damped"]), st.floats(0, 1e6),
       st.integers(0, 255), st.integers(0, 31), st.integers(0, 31))
def test_saturation_never_wraps(kind, amp, sea, row, col):
    spec = KernelSpec(kind, amplitude=amp, sigma=1.5, arm_length=4.0, arm_width=0.8, damping=0.3)
    img = np.full((32, 32), sea, np.uint8)
    out = render_turbine(img, (row, col), spec, float(sea))
    assert out.dtype == np.uint8
    assert (out >= img).all()
    assert out.max() <= 255


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["gaussian", "x-pattern", "tidal-damped"]), st.floats(1, 255), st.integers(0, 200),
       st.floats(0.8, 2.0), st.floats(3.5, 6), st.floats(0.6, 1.0))
def test_locality_and_continuity(kind, amp, sea, sigma, arm, width):
    spec = KernelSpec(kind, amplitude=amp, sigma=sigma, arm_length=arm, arm_width=width, damping=0.25)
    n = 2 * spec.radius + 21
    c = n // 2
    img = np.full((n, n), sea, np.uint8)
    out = render_turbine(img, (c, c), spec, float(sea)).astype(int)
    yy, xx = np.mgrid[:n, :n]
    d = np.hypot(yy - c, xx - c)
    assert (out[d > spec.radius] == sea).all()
    ring = (d > spec.radius - 1) & (d <= spec.radius + 1)
    assert np.abs(out[ring] - sea).max() <= 1


def test_kernel_radius_and_peak():
    for kind in ("gaussian", "x-pattern", "tidal-damped"):
        spec = KernelSpec(kind, amplitude=255.0, damping=0.2)
        k = kernel_shape(spec)
        assert spec.radius >= 1 and np.isfinite(k).all() and k.max() == 1.0


def test_render_is_deterministic(ontology, store):
    ctx = scene_context("owf-medium", coast=True, template_sea=True)
    comp = compose_scene(ontology, ctx, Stream(12))
    plan = plan_from_composition(comp)
    a = render_scene(comp, plan, store, Stream(1))
    b = render_scene(comp, plan, store, Stream(1))
    assert png_bytes(a) == png_bytes(b)
    assert a.shape == (2048, 2048) and a.dtype == np.uint8


def test_empty_sea_scene_has_no_kernels(store):
    img = render_scene(_sea_scene(), _plan(44), store, Stream(0))
    assert (img == 44).all()

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from shapely.geometry import box as shapely_box

from eosynth.composer import (
    BoundaryPolygon,
    Deformation,
    GenerationError,
    Geometry,
    PartitionError,
    PlacementError,
    ResampleSignal,
    SceneComposition,
    SceneElement,
    apply_deformation,
    check_topology,
    clip_layout,
    compose_scene,
    generate_boundary_polygon,
    generate_grid_layout,
    generate_rig_field,
    generate_windfarm,
    grid_layout,
    noise_shapes,
    partition_from_geojson,
    procedural_partition,
    retain_rigs,
    scene_context,
)
from eosynth.geometry import rasterize_region
from eosynth.noise import SimplexNoise
from eosynth.ontology import SceneExtentConfig, parse_ontology, write_ontology
from eosynth.rng import Stream
from eosynth.texture import kernel_from_spec

from oracles import ray_cast, ring_is_simple, shapely_region, topology_violations

EXTENT = SceneExtentConfig(20480.0, 10.0)


# -- grid layout -------------------------------------------------------------------

def test_grid_count_and_spacing():
    g = grid_layout(4, 3)
    assert len(g.points) == 12
    xs, ys = np.unique(g.points[:, 0]), np.unique(g.points[:, 1])
    assert np.allclose(np.diff(xs), 1 / 3) and np.allclose(np.diff(ys), 1 / 2)
    assert g.points.min() == 0 and g.points.max() == 1


def test_degenerate_bounds_always_nine():
    for seed in range(25):
        assert len(generate_grid_layout(((3, 3), (3, 3)), Stream(seed)).points) == 9


def test_small_farms_are_denser(ontology):
    def lines(key):
        dims = ontology.entity("WindfarmLayout")
        link = [c for c in dims.contexts if c.target_characteristic == "lines_x" and c.key == key][0]
        return (link.dimension.lower, link.dimension.upper)

    small, large = lines("small"), lines("large")
    strict = 0
    for seed in range(200):
        gs = generate_grid_layout((small, small), Stream(seed))
        gl = generate_grid_layout((large, large), Stream(seed))
        assert 1 / (gs.nx - 1) <= 1 / (gl.nx - 1)
        strict += gs.nx > gl.nx
    assert strict > 150


def test_identity_deformation_is_noop():
    g = grid_layout(5, 4)
    out = apply_deformation(g, Deformation())
    assert np.array_equal(out.points, g.points)


def _pairwise(p):
    d = np.hypot(p[:, None, 0] - p[None, :, 0], p[:, None, 1] - p[None, :, 1])
    iu = np.triu_indices(len(p), 1)
    return d[iu]


@settings(max_examples=100, deadline=None)
@given(st.floats(-math.pi / 4, math.pi / 4), st.integers(2, 9), st.integers(2, 9))
def test_rotation_preserves_distance_order(theta, nx, ny):
    g = grid_layout(nx, ny)
    out = apply_deformation(g, Deformation("rotation", {"theta": theta}))
    d0, d1 = _pairwise(g.points), _pairwise(out.points)
    i, j = np.meshgrid(np.arange(len(d0)), np.arange(len(d0)), indexing="ij")
    clearly_less = d0[i] < d0[j] - 1e-9
    assert np.all(d1[i][clearly_less] < d1[j][clearly_less])


def test_shear_is_deterministic():
    d = Deformation("shear", {"k": 0.2})
    a = apply_deformation(grid_layout(6, 6), d).points
    b = apply_deformation(grid_layout(6, 6), d).points
    assert np.array_equal(a, b)


# The declared families written out independently (complex rotation etc.).
def _family(name, params, u, v):
    if name == "rotation":
        z = (u + 1j * v) * complex(math.cos(params["theta"]), math.sin(params["theta"]))
        return z.real, z.imag
    if name == "shear":
        return u + params["k"] * v, v
    if name == "sinusoidal":
        a, f, ph = params["amplitude"], params["frequency"], params["phase"]
        return u + a * np.sin(2 * np.pi * f * v + ph), v + a * np.sin(2 * np.pi * f * u + ph)
    if name == "projective":
        w = 1 + params["p"] * u + params["q"] * v
        return u / w, v / w
    return u, v


_deformations = st.one_of(
    st.floats(-math.pi / 4, math.pi / 4).map(lambda t: Deformation("rotation", {"theta": t})),
    st.floats(-0.35, 0.35).map(lambda k: Deformation("shear", {"k": k})),
    st.tuples(st.floats(0.01, 0.04), st.floats(0.5, 1.5), st.floats(0, 2 * math.pi)).map(
        lambda t: Deformation("sinusoidal", {"amplitude": t[0], "frequency": t[1], "phase": t[2]})),
    st.tuples(st.floats(-0.3, 0.3), st.floats(-0.3, 0.3)).map(
        lambda t: Deformation("projective", {"p": t[0], "q": t[1]})),
)


@settings(max_examples=200, deadline=None)
@given(_deformations, st.integers(2, 10), st.integers(2, 10))
def test_deformation_is_one_parametric_transform(d, nx, ny):
    g = grid_layout(nx, ny)
    out = apply_deformation(g, d)
    assert len(out.points) == nx * ny
    assert out.points.min() >= 0 and out.points.max() <= 1
    x, y = _family(d.name, d.params, g.points[:, 0] - 0.5, g.points[:, 1] - 0.5)
    # Fit uniform scale + shift: out = s * (x, y) + t.
    a = np.zeros((2 * len(x), 3))
    a[0::2, 0], a[0::2, 1] = x, 1
    a[1::2, 0], a[1::2, 2] = y, 1
    rhs = out.points.reshape(-1)
    sol, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    assert np.abs(a @ sol - rhs).max() < 1e-9


# -- boundary polygon ------------------------------------------------------------------

def test_triangle_min_distance():
    for seed in range(50):
        p = generate_boundary_polygon(3, 0.1, Stream(seed))
        assert p.n_vertices == 3
        d = [np.hypot(*(p.vertices[i] - p.vertices[j])) for i in range(3) for j in range(i + 1, 3)]
        assert min(d) >= 0.1


def test_farm_vertex_count_is_four_or_five(ontology):
    dim = ontology.entity("WindfarmBoundary").characteristic("n_vertices").dimension
    assert (dim.lower, dim.upper) == (4, 5)


def test_ten_thousand_polygons_are_simple():
    rng = Stream(2024)
    bad = 0
    for i in range(10_000):
        n = 3 + i % 6
        p = generate_boundary_polygon(n, 0.05, rng)
        bad += not ring_is_simple(p.vertices)
    assert bad == 0


def test_infeasible_distance_suggests_smaller():
    with pytest.raises(GenerationError, match="smaller min vertex distance"):
        generate_boundary_polygon(8, 0.9, Stream(0))


# -- clipping ----------------------------------------------------------------------------

def test_clip_by_enclosing_square_keeps_all():
    g = grid_layout(5, 5)
    square = BoundaryPolygon(np.array([[-0.01, -0.01], [1.01, -0.01], [1.01, 1.01], [-0.01, 1.01]]), 0.0)
    assert np.array_equal(clip_layout(g, square), g.points)


def test_clip_by_exact_unit_square_excludes_boundary():
    # Strict containment: grid points on the square's edges are dropped.
    g = grid_layout(5, 5)
    unit = BoundaryPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]), 0.0)
    kept = clip_layout(g, unit)
    assert len(kept) == 9
    assert ((kept > 0) & (kept < 1)).all()


def test_clip_empty_signals_resample():
    g = grid_layout(3, 3)
    tiny = BoundaryPolygon(np.array([[0.1, 0.1], [0.2, 0.1], [0.15, 0.2]]), 0.0)
    with pytest.raises(ResampleSignal):
        clip_layout(g, tiny)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**40), st.integers(3, 6))
def test_clip_matches_ray_casting(seed, n):
    rng = Stream(seed)
    poly = generate_boundary_polygon(n, 0.05, rng)
    g = grid_layout(4, 3)
    expected = np.array([ray_cast(p, [poly.vertices]) for p in g.points])
    if not expected.any():
        with pytest.raises(ResampleSignal):
            clip_layout(g, poly)
        return
    assert np.array_equal(clip_layout(g, poly), g.points[expected])


# -- wind farms -------------------------------------------------------------------------------

def _sea_only() -> SceneComposition:
    return SceneComposition(EXTENT, procedural_partition(EXTENT, Stream(0)), 0)


def test_large_farm_on_pure_sea(ontology):
    comp = _sea_only()
    for seed in range(20):
        el = generate_windfarm(ontology, comp, Stream(seed), scene_context("owf-large"))
        verts = el.region[0]
        span = verts.max(axis=0) - verts.min(axis=0)
        assert span.max() <= 17000
        assert len(el.points) >= 1


def test_land_everywhere_fails_placement(ontology):
    size = EXTENT.scene_size
    square = np.array([[0.0, 0.0], [size, 0.0], [size, size], [0.0, size]])
    land = SceneElement("Land", "none-target", Geometry((square,)))
    # A 10 m sliver of sea cannot hold any farm.
    sliver = np.array([[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]])
    sea = SceneElement("Sea", "none-target", Geometry((sliver,)))
    comp = SceneComposition(EXTENT, [sea, land], 0)
    with pytest.raises(PlacementError) as exc:
        generate_windfarm(ontology, comp, Stream(1), scene_context("owf-small"), max_attempts=50)
    assert exc.value.attempts == 50
    assert "50 attempts" in str(exc.value)


FARM_CLASSES = ("owf-small", "owf-medium", "owf-large")


def test_thousand_farms_satisfy_topology_oracle(ontology):
    failures = 0
    for i in range(1000):
        ctx = scene_context(FARM_CLASSES[i % 3], coast=i % 2 == 0, template_sea=False)
        comp = compose_scene(ontology, ctx, Stream(10_000 + i))
        failures += bool(topology_violations(comp, comp.relations))
    assert failures == 0


def test_farm_extent_within_size_plus_kernel(ontology):
    for i in range(60):
        ctx = scene_context(FARM_CLASSES[i % 3], coast=True)
        comp = compose_scene(ontology, ctx, Stream(500 + i))
        farm = comp.element("WindFarm")
        size = farm.spec("WindFarm").value("size")
        r = kernel_from_spec(farm.spec("WindTurbine")).radius * comp.extent.sensor_resolution
        span = farm.points.max(axis=0) - farm.points.min(axis=0)
        assert span.max() <= size + r


def test_composition_is_deterministic(ontology):
    ctx = scene_context("owf-medium", coast=True, template_sea=True)
    a = compose_scene(ontology, ctx, Stream(99))
    b = compose_scene(ontology, ctx, Stream(99))
    assert a.dumps() == b.dumps()


# -- rig fields ------------------------------------------------------------------------------

def _with_threshold(ontology, value: float):
    text = write_ontology(ontology)
    start = text.index('<characteristic name="threshold">')
    end = text.index("</characteristic>", start)
    text = (text[:start] + '<characteristic name="threshold">'
            f'<dimension kind="constant" value="{value}"/>' + text[end:])
    return parse_ontology(text)


def test_threshold_above_noise_range_resamples(ontology):
    assert noise_shapes(SimplexNoise(Stream(1)), (0, 0), 1000, 1.5, 2.0) == []
    o = _with_threshold(ontology, 1.5)
    with pytest.raises(ResampleSignal):
        generate_rig_field(o, _sea_only(), Stream(3), scene_context("none-target-rigs"))


def test_threshold_minus_one_keeps_all_candidates():
    shapes = noise_shapes(SimplexNoise(Stream(4)), (100.0, 200.0), 5000.0, -1.0, 3.0)
    assert shapes
    cand = np.column_stack([100 + Stream(5).uniform_array(0, 5000, 300),
                            200 + Stream(6).uniform_array(0, 5000, 300)])
    assert retain_rigs(cand, shapes, []).all()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**40), st.floats(-0.2, 0.35), st.floats(1.5, 4.0))
def test_retained_rigs_match_ray_casting(seed, threshold, frequency):
    rng = Stream(seed)
    shapes = noise_shapes(SimplexNoise(rng), (0.0, 0.0), 4000.0, threshold, frequency)
    cand = np.column_stack([rng.uniform_array(0, 4000, 80), rng.uniform_array(0, 4000, 80)])
    expected = np.array([ray_cast(p, shapes) for p in cand], dtype=bool)
    assert np.array_equal(retain_rigs(cand, shapes, []), expected)


def test_rig_fields_satisfy_topology(ontology):
    for i in range(80):
        comp = compose_scene(ontology, scene_context("none-target-rigs", coast=i % 2 == 0), Stream(7000 + i))
        field = comp.element("RigField")
        d = field.spec("RigField").value("diameter")
        assert 200 <= d <= 20000
        assert len(field.points) >= 1
        assert check_topology(comp) == []
        assert topology_violations(comp, comp.relations) == []


# -- partition ---------------------------------------------------------------------------------

def test_pure_sea_partition():
    els = procedural_partition(EXTENT, Stream(0))
    assert [e.entity for e in els] == ["Sea"]
    assert shapely_region(els[0].region).equals(shapely_box(0, 0, EXTENT.scene_size, EXTENT.scene_size))


def test_land_without_coast_is_two_elements():
    els = procedural_partition(EXTENT, Stream(0), land=True, coverage=0.3)
    assert sorted(e.entity for e in els) == ["Land", "Sea"]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**40), st.sampled_from(["north", "east", "south", "west"]),
       st.one_of(st.none(), st.floats(200, 2000)), st.floats(0.05, 0.8))
def test_partition_covers_extent(seed, side, coast, coverage):
    els = procedural_partition(EXTENT, Stream(seed), land=True, coast_width=coast, coverage=coverage,
                               side=side, roughness=800, wavelength=5000)
    total = sum(shapely_region(e.region).area for e in els)
    pixel = EXTENT.sensor_resolution ** 2
    assert abs(total - EXTENT.scene_size ** 2) <= pixel
    n = 256
    scale = EXTENT.scene_size / n
    counts = sum(rasterize_region(e.region, n, n, scale).astype(int) for e in els)
    assert (counts == 1).all()


def test_geojson_partition_and_degenerate_input():
    size = EXTENT.scene_size
    land = {"type": "Polygon", "coordinates": [[[0, 0], [size, 0], [size, 5000], [0, 5000], [0, 0]]]}
    coast = {"type": "Polygon", "coordinates": [[[0, 4000], [size, 4000], [size, 6000], [0, 6000], [0, 4000]]]}
    doc = {"type": "FeatureCollection", "features": [
        {"type": "Feature", "properties": {"class": "land"}, "geometry": land},
        {"type": "Feature", "properties": {"class": "coast"}, "geometry": coast}]}
    els = partition_from_geojson(doc, EXTENT)
    areas = {e.entity: shapely_region(e.region).area for e in els}
    assert areas["Land"] == pytest.approx(size * 5000)
    assert areas["Coast"] == pytest.approx(size * 1000)
    assert sum(areas.values()) == pytest.approx(size * size)
    flat = {"type": "Polygon", "coordinates": [[[0, 0], [10, 0], [20, 0], [0, 0]]]}
    with pytest.raises(PartitionError):
        partition_from_geojson({"features": [{"properties": {"class": "land"}, "geometry": flat}]}, EXTENT)


# -- topology checks ---------------------------------------------------------------------------

def test_turbine_on_land_is_reported(ontology):
    for seed in range(200):
        comp = compose_scene(ontology, scene_context("owf-small"), Stream(seed))
        if comp.element("Land") is not None:
            break
    land = comp.element("Land")
    farm = comp.element("WindFarm")
    probe = shapely_region(land.region).representative_point()
    moved = np.vstack([farm.points, [[probe.x, probe.y]]])
    farm.geometry = Geometry(farm.region, moved)
    codes = {(v.subject, v.predicate, v.object) for v in check_topology(comp)}
    assert ("WindFarm", "MustNotOverlap", "Land") in codes


def test_check_topology_agrees_with_oracle(ontology):
    classes = ("owf-small", "owf-medium", "owf-large", "none-target-rigs", "none-target-land")
    rng = Stream(31337)
    for i in range(100):
        comp = compose_scene(ontology, scene_context(classes[i % 5], coast=i % 2 == 1), Stream(20_000 + i))
        if i % 2 == 0 and comp.element("WindFarm") is not None:
            # Perturb half the farms so the comparison also sees violations.
            farm = comp.element("WindFarm")
            shift = rng.uniform(-8000, 8000)
            farm.geometry = Geometry(tuple(r + shift for r in farm.region), farm.points + shift)
            farm.parts = {k: Geometry(tuple(r + shift for r in g.region), g.points + shift)
                          for k, g in farm.parts.items()}
        ours = sorted({(v.subject, v.predicate, v.object) for v in check_topology(comp)})
        theirs = sorted(set(topology_violations(comp, comp.relations)))
        assert ours == theirs

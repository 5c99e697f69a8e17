""" Unit tests for devicemodel. """

###########
# Imports #
###########
# Standard library
import json
import math
from types import SimpleNamespace

# Testing
import pytest

# Data Science
import numpy as np
from shapely.geometry import box

# Custom Modules
from exceptions.device_exceptions import TripletError
from exceptions.device_exceptions import TuningError
from models import bandsmodel
from models import devicemodel as dm
from models import elasticitymodel as em
from models import geometrymodel as gm
from models import meshmodel


#########
# Setup #
#########
DIAMOND = gm.Material.from_config(1050, 0.2, 3539, 0.3)
RES = gm.ResonatorSpec.from_um(21, 3.15)
WG_C = gm.WaveguideSpec.from_um(7.6, 2.0, 0.8, 0.76)
# Relative agreement with the reference frequencies, a fraction of the
# narrowest region width
REFERENCE_TOLERANCE = 0.03


def _entry(f, parity):
    return dm.CatalogEntry(SimpleNamespace(frequency=f, residual=0.0), {},
                           parity=parity)


@pytest.fixture(scope='module')
def coarse_catalog():
    return dm.resonator_modes(RES, DIAMOND, (0.8e9, 1.9e9),
                              target_h=RES.side_s / 12)


####################
# Coupling Algebra #
####################
def test_extract_coupling_reference_triplet():
    t = dm.CoupledTriplet.from_frequencies([1.3326e9, 1.3397e9, 1.3468e9])
    est = dm.extract_coupling(t)
    assert abs(est.detuning_delta) <= 0.2e6
    assert est.coupling_g == pytest.approx(5.02e6, abs=0.05e6)
    assert est.coupling_g == pytest.approx(0.0142e9 / math.sqrt(8), rel=1e-9)


def test_extract_coupling_degenerate_triplet():
    t = dm.CoupledTriplet(1.0e9, 1.0e9, 1.0e9)
    est = dm.extract_coupling(t)
    assert est.detuning_delta == 0.0
    assert est.coupling_g == 0.0


def test_three_mode_chain_oracle():
    f0, g0 = 1.0e9, 10e6
    t = dm.coupled_mode_triplet(f0, 0.0, g0)
    assert np.allclose(t.as_list(), [f0 - math.sqrt(2) * g0, f0,
                                     f0 + math.sqrt(2) * g0], rtol=1e-12)
    est = dm.extract_coupling(t)
    assert abs(est.detuning_delta) < 1e-3
    assert est.coupling_g == pytest.approx(g0, rel=1e-9)


def test_coupling_inversion_random():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        f_r = rng.uniform(0.9e9, 1.8e9)
        delta = rng.choice([-1.0, 1.0]) * rng.uniform(1e6, 50e6)
        g = rng.uniform(0.5e6, 20e6)
        est = dm.extract_coupling(dm.coupled_mode_triplet(f_r, delta, g))
        assert est.detuning_delta == pytest.approx(delta, rel=1e-10)
        assert est.coupling_g == pytest.approx(g, rel=1e-10)


def test_unordered_triplet_is_rejected():
    with pytest.raises(TripletError):
        dm.CoupledTriplet(1.2e9, 1.1e9, 1.3e9)


def test_coupling_to_dict_in_mhz():
    est = dm.CouplingEstimate(1e6, 5e6)
    assert est.to_dict() == {'detuning_delta_MHz': 1.0,
                             'coupling_g_MHz': 5.0}


##################
# Mode Families #
##################
def test_mode_spacing_by_parity():
    catalog = dm.ModeCatalog([_entry(1.00e9, 1.0), _entry(1.01e9, -1.0),
                              _entry(1.03e9, 1.0), _entry(1.06e9, 1.0)])
    assert np.allclose(dm.mode_spacing(catalog), [30e6, 30e6])
    assert len(dm.mode_spacing(catalog, 'antisymmetric')) == 0
    assert np.allclose(dm.mode_spacing(catalog, None), [10e6, 20e6, 30e6])


def test_spacing_estimates_from_band_slope():
    c, L = 5000.0, 90e-6
    ks = np.linspace(0.0, np.pi / 4e-6, 41)
    bands = bandsmodel.BandStructure(ks, (c * ks / (2 * math.pi))[:, None],
                                     2.5e9)
    catalog = dm.ModeCatalog([_entry(0.10e9, 1.0), _entry(0.12e9, -1.0),
                              _entry(0.13e9, 1.0), _entry(0.16e9, 1.0)])
    est = dm.spacing_estimates(catalog, bands, L)
    assert len(est) == 2
    assert np.allclose(est, c / (2 * L), rtol=1e-9)
    assert dm.spacing_estimates(dm.ModeCatalog([]), bands, L) == []


@pytest.mark.parametrize("g, spacing, expected", [
    (5e6, 28e6, True), (10e6, 28e6, False), (0.0, 1.0, True)
])
def test_single_mode_check(g, spacing, expected):
    assert dm.single_mode_check(g, spacing) is expected


@pytest.mark.parametrize("fraction, expected", [(0.05, True), (0.1, False),
                                                (0.6, False)])
def test_is_dark(fraction, expected):
    assert dm.is_dark(fraction) is expected


def test_catalog_nearest_and_json():
    catalog = dm.ModeCatalog([_entry(1.0e9, float('nan')),
                              _entry(1.3e9, 1.0)], label='x')
    assert catalog.nearest(1.25e9).frequency == 1.3e9
    assert dm.ModeCatalog([]).nearest(1e9) is None
    data = json.loads(catalog.to_json())
    assert data['modes'][0]['parity'] is None
    assert data['modes'][1]['frequency_GHz'] == pytest.approx(1.3)


#################
# Field Metrics #
#################
@pytest.fixture(scope='module')
def strip_mesh():
    return meshmodel.rectangle_mesh(4.0, 2.0, 8, 4, origin=(0.0, -1.0))


def test_mirror_parity(strip_mesh):
    y = strip_mesh.nodes[:, 1]
    even = np.column_stack([np.ones_like(y), y]).astype(complex)
    odd = np.column_stack([y, np.ones_like(y)]).astype(complex)
    assert dm.mirror_parity(strip_mesh, even) == pytest.approx(1.0)
    assert dm.mirror_parity(strip_mesh, odd) == pytest.approx(-1.0)


def test_energy_fraction_full_and_empty():
    mesh = meshmodel.rectangle_mesh(10e-6, 5e-6, 4, 2)
    ops = em.assemble(mesh, DIAMOND)
    mode = em.eigs(ops, 0.0, 5)[4]
    everything = box(-1e-6, -1e-6, 11e-6, 6e-6)
    nothing = box(20e-6, 20e-6, 30e-6, 30e-6)
    assert dm.energy_fraction(ops, mode, everything) == \
        pytest.approx(1.0, abs=1e-8)
    assert dm.energy_fraction(ops, mode, nothing) == 0.0
    left = box(-1e-6, -1e-6, 5e-6, 6e-6)
    right = box(5e-6, -1e-6, 11e-6, 6e-6)
    total = (dm.dark_mode_fraction(ops, mode, left) +
             dm.dark_mode_fraction(ops, mode, right))
    assert total == pytest.approx(1.0, abs=1e-8)


##############
# Resonator #
##############
def test_resonator_window_without_modes():
    catalog = dm.resonator_modes(RES, DIAMOND, (1e7, 1e8),
                                 target_h=RES.side_s / 12)
    assert len(catalog) == 0


def test_resonator_rigid_modes():
    catalog = dm.resonator_modes(RES, DIAMOND, (0.0, 1e7),
                                 target_h=RES.side_s / 12)
    assert len(catalog) == 3


def test_resonator_signatures_are_threefold(coarse_catalog):
    assert len(coarse_catalog) > 0
    for entry in coarse_catalog:
        sig = entry.signature
        noise = 1e-6 * np.abs(entry.mode.displacement).max()
        assert set(sig) == {'A', 'B', 'C'}
        assert sig['A'] == pytest.approx(sig['C'], rel=1e-6, abs=noise)
        assert sig['B'] == pytest.approx(sig['C'], rel=1e-6, abs=noise)


def test_resonator_degenerate_pairs(coarse_catalog):
    for entry in coarse_catalog:
        assert entry.degeneracy in (1, 2)
    n_pairs = sum(1 for e in coarse_catalog if e.degeneracy == 2)
    assert n_pairs % 2 == 0


def test_resonator_scale_invariance(coarse_catalog):
    big = dm.resonator_modes(RES.scaled(2.0), DIAMOND, (0.4e9, 0.95e9),
                             target_h=2 * RES.side_s / 12)
    assert len(big) == len(coarse_catalog)
    assert np.allclose(big.frequencies * 2, coarse_catalog.frequencies,
                       rtol=1e-4)


##########
# Tuning #
##########
def _analytic_offset(spec, material, length_L, f_target, target_h, tol):
    """ Standing-wave frequency falling as 1/L through the target at
        L = 91.2 um.
    """
    return f_target * 91.2e-6 / length_L - f_target


def test_tune_length_bisects(monkeypatch):
    monkeypatch.setattr(dm, '_symmetric_offset', _analytic_offset)
    L, f = dm.tune_length(WG_C, DIAMOND, 1.3388e9, (80e-6, 100e-6))
    assert abs(f - 1.3388e9) <= 1e6
    assert L == pytest.approx(91.2e-6, rel=1e-3)


def test_tune_length_without_crossing(monkeypatch):
    monkeypatch.setattr(dm, '_symmetric_offset',
                        lambda *args: 50e6)
    with pytest.raises(TuningError):
        dm.tune_length(WG_C, DIAMOND, 1.3388e9, (80e-6, 100e-6))


def test_tune_length_range_check():
    with pytest.raises(ValueError):
        dm.tune_length(WG_C, DIAMOND, 1.3388e9, (90e-6, 95e-6))


def test_finite_waveguide_length_check():
    with pytest.raises(ValueError):
        dm.finite_waveguide_modes(WG_C, 2 * WG_C.period_d, DIAMOND,
                                  (1.3e9, 1.4e9))


def test_triplet_needs_three_modes(monkeypatch):
    monkeypatch.setattr(dm, 'coupled_modes',
                        lambda *args, **kwargs: (None, []))
    with pytest.raises(TripletError):
        dm.coupled_triplet(None, DIAMOND, 1.34e9, 60e6, RES)


########################
# Slow reference runs #
########################
@pytest.mark.slow
def test_resonator_reference_modes():
    catalog = dm.resonator_modes(RES, DIAMOND, (0.8e9, 1.9e9))
    refs = (0.9634e9, 1.1691e9, 1.3388e9, 1.7339e9)
    nearest = [catalog.nearest(f).frequency for f in refs]
    for got, ref in zip(nearest, refs):
        assert abs(got - ref) <= REFERENCE_TOLERANCE * ref
    # Each reference picks its own mode, in the same order
    assert all(a < b for a, b in zip(nearest, nearest[1:]))


@pytest.mark.slow
def test_waveguide_c_spacing():
    bands = bandsmodel.dispersion(WG_C, DIAMOND, n_k=40)
    catalog = dm.finite_waveguide_modes(WG_C, 91.2e-6, DIAMOND,
                                        (1.25e9, 1.45e9), bands=bands)
    spacings = dm.mode_spacing(catalog)
    assert len(spacings) > 0
    assert np.median(spacings) == pytest.approx(28e6, rel=0.3)
    assert len(catalog.expected_spacings) == len(spacings)
    assert np.median(spacings) == pytest.approx(
        np.median(catalog.expected_spacings), rel=0.2)


def _mirrored(mesh, x0):
    """ Mirror image of mesh about x = x0 with counterclockwise elements. """
    nodes = mesh.nodes.copy()
    nodes[:, 0] = 2 * x0 - nodes[:, 0]
    # [c0, c1, c2, m01, m12, m20] -> [c0, c2, c1, m20, m12, m01]
    elements = mesh.elements[:, [0, 2, 1, 5, 4, 3]]
    return meshmodel.Mesh(nodes, elements, mesh.boundary_tags, mesh.target_h)


@pytest.mark.slow
def test_mirrored_assembly_gives_same_triplet():
    L = 91.2e-6
    assembly = gm.subsystem_assembly(RES, WG_C, L, label='C')
    mesh = dm.assembly_mesh(assembly, RES, WG_C)
    D = L + 2 * RES.port_offset
    mirror = _mirrored(mesh, D / 2)
    assert np.all(mirror.element_areas() > 0)
    assert np.isclose(mirror.total_area(), mesh.total_area(), rtol=1e-12)
    t1 = dm.coupled_triplet(assembly, DIAMOND, 1.34e9, 60e6, RES, mesh=mesh)
    t2 = dm.coupled_triplet(assembly, DIAMOND, 1.34e9, 60e6, RES,
                            mesh=mirror)
    assert np.allclose(t1.as_list(), t2.as_list(), rtol=1e-8)


@pytest.mark.slow
def test_reference_triplet_and_dark_mode():
    L = 91.2e-6
    assembly = gm.subsystem_assembly(RES, WG_C, L, label='C')
    reference = dm.resonator_modes(RES, DIAMOND, (1.28e9, 1.40e9)) \
        .nearest(1.3388e9)
    triplet, modes, ops = dm.coupled_triplet(
        assembly, DIAMOND, 1.34e9, 60e6, RES, reference=reference,
        wg_spec=WG_C, return_modes=True)
    got = triplet.as_list()
    for f, ref in zip(got, (1.3326e9, 1.3397e9, 1.3468e9)):
        assert abs(f - ref) <= REFERENCE_TOLERANCE * ref
    assert got[0] < got[1] < got[2]
    # Splitting pattern symmetric to 30 %
    lower, upper = got[1] - got[0], got[2] - got[1]
    assert abs(upper - lower) <= 0.3 * max(upper, lower)
    est = dm.extract_coupling(triplet)
    assert 2.5e6 <= est.coupling_g <= 10.0e6
    waveguide = assembly.parts['waveguide']
    fractions = [dm.dark_mode_fraction(ops, m, waveguide) for m in modes]
    assert fractions[1] < min(fractions[0], fractions[2])

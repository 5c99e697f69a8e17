""" Unit tests for networkmodel. """

###########
# Imports #
###########
# Standard library
import dataclasses
import json
import math

# Testing
import pytest

# Data Science
import numpy as np
from shapely.geometry import LineString

# Custom Modules
from exceptions.mesh_exceptions import UnmeshableRegion
from exceptions.network_exceptions import LayoutError
from exceptions.network_exceptions import NetworkSpecError
from functions.intervals import IntervalSet
from models import bandsmodel
from models import devicemodel
from models import geometrymodel as gm
from models import networkmodel as nm


#########
# Setup #
#########
DIAMOND = gm.Material.from_config(1050, 0.2, 3539, 0.3)
RES = gm.ResonatorSpec.from_um(21, 3.15)
WAVEGUIDES = {
    'A': gm.WaveguideSpec.from_um(6, 3, 1.1, 0.3),
    'B': gm.WaveguideSpec.from_um(4, 3, 1.1, 0.3),
    'C': gm.WaveguideSpec.from_um(7.6, 2.0, 0.8, 0.76),
}


def _spec(rows=1, cols=1, **kwargs):
    values = dict(L_A=86.3e-6, L_B=86.3e-6, L_C=91.2e-6, rows=rows,
                  cols=cols, resonator=RES, waveguides=dict(WAVEGUIDES))
    values.update(kwargs)
    return nm.NetworkSpec(**values)


def _gaps(label, pairs_ghz):
    return bandsmodel.GapSet(IntervalSet.from_list(pairs_ghz, 1e9), label)


@pytest.fixture(scope='module')
def lattice():
    return nm.honeycomb_layout(_spec(2, 2))


#################
# Network Spec #
#################
@pytest.mark.parametrize("kwargs", [
    {'L_B': 80e-6},
    {'rows': -1},
    {'waveguides': {'A': WAVEGUIDES['A'], 'C': WAVEGUIDES['C']}},
    {'L_C': 5e-6},
])
def test_network_spec_invalid(kwargs):
    with pytest.raises(NetworkSpecError):
        _spec(**kwargs).validate()


def test_network_spec_valid():
    spec = _spec()
    assert spec.validate() is spec
    assert spec.length('C') == 91.2e-6


###########
# Layout #
###########
def test_single_cell_layout():
    graph = nm.honeycomb_layout(_spec())
    assert len(graph.resonators) == 2
    assert [e.label for e in graph.edges] == ['C']
    assert [graph.degree(r.id) for r in graph.resonators] == [1, 1]
    a, b = graph.centers()
    D = 91.2e-6 + 2 * RES.port_offset
    assert np.allclose(b - a, [D, 0.0])


def test_lattice_edge_count(lattice):
    assert len(lattice.resonators) == 8
    labels = [e.label for e in lattice.edges]
    assert labels.count('C') == 4
    assert labels.count('A') == 2
    assert labels.count('B') == 2
    # Interior resonators reach full degree, the rest lose boundary edges
    degrees = [lattice.degree(r.id) for r in lattice.resonators]
    assert max(degrees) == 3
    assert sum(degrees) == 2 * len(lattice.edges)
    assert len(lattice.edges) < 3 * len(lattice.resonators) / 2


def test_edges_join_opposite_sublattices(lattice):
    for e in lattice.edges:
        subs = {lattice.resonators[e.a].sublattice,
                lattice.resonators[e.b].sublattice}
        assert subs == {1, 2}
        a, b = lattice.edge_segment(e)
        assert np.isclose(np.linalg.norm(b - a), e.length, rtol=1e-9)


def test_layout_is_planar(lattice):
    segments = [LineString(lattice.edge_segment(e)) for e in lattice.edges]
    for i, first in enumerate(segments):
        for second in segments[i + 1:]:
            crossing = first.intersection(second)
            assert crossing.is_empty


def test_lattice_vectors_span_cells():
    spec = _spec()
    a1, a2 = nm.lattice_vectors(spec)
    assert np.isclose(np.linalg.norm(a1), np.linalg.norm(a2), rtol=1e-12)
    assert abs(a1[0] * a2[1] - a1[1] * a2[0]) > 0


def test_check_overlaps_finds_clash():
    placements = [nm.Placement(0, 1, (0.0, 0.0), 0.0, (0, 0)),
                  nm.Placement(1, 1, (5e-6, 0.0), 0.0, (1, 0))]
    graph = nm.NetworkGraph(_spec(), placements, [])
    assert nm.check_overlaps(graph) == [('resonator_0', 'resonator_1')]


def test_adjacent_components_may_touch(lattice):
    assert nm.check_overlaps(lattice) == []


def test_layout_rejects_overlaps(monkeypatch):
    monkeypatch.setattr(nm, 'check_overlaps',
                        lambda graph: [('resonator_0', 'edge_3_A')])
    with pytest.raises(LayoutError) as info:
        nm.honeycomb_layout(_spec(2, 2))
    assert info.value.components == [('resonator_0', 'edge_3_A')]


def test_empty_layout():
    graph = nm.honeycomb_layout(_spec(0, 0))
    assert graph.resonators == []
    assert graph.edges == []
    assert graph.centers().shape == (0, 2)
    centers, inner = nm.shield_frame(graph, gm.ShieldSpec.from_um(3.8, 3.5,
                                                                  1.0), 5e-6)
    assert len(centers) == 0
    assert inner is None


def test_layout_outlines_and_dict(lattice):
    outlines = nm.layout_outlines(lattice)
    assert len(outlines) == len(lattice.resonators) + len(lattice.edges)
    assert 'resonator_0' in outlines
    data = lattice.to_dict()
    assert len(data['edges']) == len(lattice.edges)
    assert json.dumps(data)


def test_missing_edge(lattice):
    with pytest.raises(NetworkSpecError):
        lattice.edge(999)


def test_shield_frame_clears_lattice(lattice):
    shield = gm.ShieldSpec.from_um(3.8, 3.5, 1.0)
    centers, inner = nm.shield_frame(lattice, shield, 5e-6, layers=2)
    minx, miny, maxx, maxy = inner
    assert len(centers) > 0
    inside = ((centers[:, 0] > minx) & (centers[:, 0] < maxx) &
              (centers[:, 1] > miny) & (centers[:, 1] < maxy))
    assert not inside.any()


###############
# Patch solve #
###############
def test_patch_needs_two_periods():
    graph = nm.honeycomb_layout(_spec())
    with pytest.raises(NetworkSpecError):
        nm.patch_region(graph, 0, 1)


def test_patch_region_area():
    graph = nm.honeycomb_layout(_spec())
    patch = nm.patch_region(graph, 0, 3)
    plain = gm.subsystem_assembly(RES, WAVEGUIDES['C'], 91.2e-6, label='C')
    stubs = sum(2 * gm.waveguide_strip(WAVEGUIDES[k],
                                       3 * WAVEGUIDES[k].period_d).area()
                for k in ('A', 'B'))
    assert np.isclose(patch.area(), plain.area() + stubs, rtol=1e-9)
    for name in ('stub_A_1', 'stub_B_1', 'stub_A_2', 'stub_B_2'):
        assert name in patch.parts


##########
# Report #
##########
def test_patch_entry_confinement_fields():
    entry = nm.PatchEntry('C', 1.34e9, [1.33e9], [0.002])
    assert entry.max_stub_fraction == 0.002
    assert math.isnan(nm.PatchEntry('A', 1e9).max_stub_fraction)
    assert entry.to_dict()['frequencies_GHz'] == [pytest.approx(1.33)]


def test_report_passed_logic():
    ok = nm.AuditEntry('mode_c', 1.3e9, 'III', 'III', passed=True)
    report = nm.AuditReport(entries=[ok], stages={'dispersion': 'ok'})
    assert report.passed
    report.patches.append(nm.PatchEntry('C', 1.3e9, confined=False))
    assert not report.passed
    report.patches[0].confined = True
    report.shield = {'covers': False}
    assert not report.passed
    report.shield = {}
    report.stages['patch'] = 'failed: C'
    assert not report.passed
    assert not nm.AuditReport().passed


def test_audit_json_missing_frequency():
    report = nm.AuditReport(entries=[nm.AuditEntry('mode_a', error='x')])
    data = json.loads(nm.audit_json(report))
    assert data['passed'] is False
    assert data['verdicts'][0]['frequency_GHz'] is None
    assert data['regions'] is None


#########
# Audit #
#########
# One catalog mode per region: 1.73 -> I, 0.96 -> II, 1.34 -> III, 1.17 -> IV
GAPS = {
    'A': [(0.90, 1.00), (1.10, 1.40)],
    'B': [(1.10, 1.40), (1.60, 1.80)],
    'C': [(0.90, 1.20), (1.70, 1.80)],
}


def _fake_dispersion(spec, material, label=None, **kwargs):
    return label


def _fake_detect_gaps(label, min_width=None):
    return _gaps(label, GAPS[label])


class _Mode:
    def __init__(self, frequency):
        self.frequency = frequency
        self.residual = 0.0


def _catalog(frequencies):
    return devicemodel.ModeCatalog(
        [devicemodel.CatalogEntry(_Mode(f), {}) for f in frequencies])


@pytest.fixture
def stubbed(monkeypatch):
    monkeypatch.setattr(bandsmodel, 'dispersion', _fake_dispersion)
    monkeypatch.setattr(bandsmodel, 'detect_gaps', _fake_detect_gaps)
    monkeypatch.setattr(
        devicemodel, 'resonator_modes',
        lambda *args, **kwargs: _catalog([1.73e9, 0.96e9, 1.34e9, 1.17e9]))


TARGETS = {'mode_a': 1.7339e9, 'mode_b': 0.9634e9, 'mode_c': 1.3388e9,
           'mode_d': 1.1691e9}


def test_audit_spectral_stages(stubbed):
    report = nm.closed_subsystem_audit(_spec(0, 0), DIAMOND, TARGETS,
                                       (0.85e9, 1.85e9))
    assert report.stages['patch'] == 'skipped'
    assert report.stages['dispersion'] == 'ok'
    verdicts = {e.name: e for e in report.entries}
    assert verdicts['mode_a'].region == 'I'
    assert verdicts['mode_b'].region == 'II'
    assert verdicts['mode_c'].region == 'III'
    assert verdicts['mode_d'].region == 'IV'
    assert verdicts['mode_c'].propagates == {'A': False, 'B': False,
                                             'C': True}
    assert report.passed


def test_audit_records_stage_failure(stubbed, monkeypatch):
    def broken(*args, **kwargs):
        raise UnmeshableRegion('mesh size too small')

    monkeypatch.setattr(bandsmodel, 'dispersion', broken)
    report = nm.closed_subsystem_audit(_spec(0, 0), DIAMOND, TARGETS,
                                       (0.85e9, 1.85e9))
    assert report.stages['dispersion'].startswith('failed')
    assert report.regions is None
    assert all(e.error == 'missing inputs' for e in report.entries)
    assert not report.passed


def test_audit_patch_failure_is_recorded(stubbed, monkeypatch):
    def no_triplet(*args, **kwargs):
        raise NetworkSpecError('no triplet')

    monkeypatch.setattr(nm, 'localization_check', no_triplet)
    report = nm.closed_subsystem_audit(_spec(), DIAMOND, TARGETS,
                                       (0.85e9, 1.85e9))
    assert report.stages['layout'] == 'ok'
    # Only waveguide C exists in a single cell; the Region IV mode is
    # checked on its subsystem too
    assert [(p.label, p.kind) for p in report.patches] == [
        ('C', 'triplet'), ('C', 'resonator')]
    assert all(p.error for p in report.patches)
    assert report.stages['patch'].startswith('failed')
    assert not report.passed


@pytest.fixture
def subsystem_modes(monkeypatch):
    """ Coupled-mode solvers replaced by fixed modes whose strain energy
        sits in the first resonator with a settable share.
    """
    graph = nm.honeycomb_layout(_spec())
    res1 = nm.patch_region(graph, graph.edges[0].id, 3).parts['resonator_1']
    state = {'share': 1.0}

    def fraction(ops, mode, polygon):
        if polygon.intersection(res1).area > 0.5 * res1.area:
            return state['share']
        return 0.0

    monkeypatch.setattr(
        devicemodel, 'coupled_triplet',
        lambda *args, **kwargs: (None, [_Mode(1.34e9)] * 3, None))
    monkeypatch.setattr(
        devicemodel, 'coupled_modes',
        lambda *args, **kwargs: (None, [(_Mode(1.17e9), 0.9, {}, {})]))
    monkeypatch.setattr(devicemodel, 'energy_fraction', fraction)
    return state


@pytest.mark.parametrize("share, confined", [(0.995, True), (0.98, False)])
def test_audit_checks_region_iv_mode_in_resonators(stubbed, subsystem_modes,
                                                   share, confined):
    subsystem_modes['share'] = share
    report = nm.closed_subsystem_audit(_spec(), DIAMOND, TARGETS,
                                       (0.85e9, 1.85e9))
    assert report.stages['patch'] == 'ok'
    entries = {p.kind: p for p in report.patches}
    assert entries['triplet'].confined
    resonator = entries['resonator']
    assert resonator.label == 'C'
    assert resonator.frequencies == [1.17e9]
    assert resonator.outside_resonator_fractions[0] == pytest.approx(1 - share)
    assert resonator.confined is confined
    assert report.passed is confined


def test_resonator_kind_keeps_best_resonator_mode(monkeypatch):
    graph = nm.honeycomb_layout(_spec())
    patch = nm.patch_region(graph, graph.edges[0].id, 3)
    scored = [(_Mode(1.16e9), 0.4, {}, {}), (_Mode(1.18e9), 0.9, {}, {})]
    monkeypatch.setattr(devicemodel, 'coupled_modes',
                        lambda *args, **kwargs: (None, scored))
    monkeypatch.setattr(devicemodel, 'energy_fraction',
                        lambda ops, mode, polygon: 0.0)
    entry = nm.localization_check(patch, DIAMOND, 1.17e9, RES, 'C', 60e6,
                                  kind='resonator')
    assert entry.kind == 'resonator'
    assert entry.frequencies == [1.18e9]
    assert not entry.confined
    assert entry.to_dict()['kind'] == 'resonator'


def test_audit_rejects_invalid_spec(stubbed):
    with pytest.raises(NetworkSpecError):
        nm.closed_subsystem_audit(_spec(L_B=80e-6), DIAMOND, TARGETS,
                                  (0.85e9, 1.85e9))


def test_entry_dict_is_sorted():
    entry = nm.AuditEntry('mode_c', 1.3e9, 'III', 'III',
                          {'C': True, 'A': False}, True)
    data = entry.to_dict()
    assert list(data['propagates']) == ['A', 'C']
    assert data['frequency_GHz'] == pytest.approx(1.3)
    assert dataclasses.asdict(entry)['passed'] is True

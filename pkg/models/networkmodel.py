""" Honeycomb network layout, local patch solves and the closed
    mechanical subsystem audit.
"""

###########
# Imports #
###########
# Standard library
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

# Third party
import numpy as np
from shapely.ops import unary_union
from shapely.strtree import STRtree

# Custom modules
from exceptions.device_exceptions import TripletError
from exceptions.geometry_exceptions import GeometryError
from exceptions.mesh_exceptions import MeshError
from exceptions.network_exceptions import LayoutError
from exceptions.network_exceptions import NetworkSpecError
from exceptions.solver_exceptions import SolverError
from functions import general
from models import bandsmodel
from models import devicemodel
from models import geometrymodel


#############
# Constants #
#############
CONFINEMENT_THRESHOLD = 0.01
# Resonator mode -> (waveguide it must propagate in, expected region)
MODE_TARGETS = {
    'mode_a': ('A', 'I'),
    'mode_b': ('B', 'II'),
    'mode_c': ('C', 'III'),
    'mode_d': (None, 'IV'),
}
STAGE_ERRORS = (GeometryError, MeshError, SolverError, TripletError,
                NetworkSpecError, LayoutError, ValueError)


#########
# Types #
#########
@dataclass
class NetworkSpec:
    L_A: float
    L_B: float
    L_C: float
    rows: int
    cols: int
    resonator: object
    waveguides: dict

    def length(self, label):
        return {'A': self.L_A, 'B': self.L_B, 'C': self.L_C}[label]


    def validate(self):
        if not math.isclose(self.L_A, self.L_B, rel_tol=1e-12):
            raise NetworkSpecError('waveguides A and B must have the same '
                                   f'length (L_A = {self.L_A * 1e6:.4f} um, '
                                   f'L_B = {self.L_B * 1e6:.4f} um)')
        if self.rows < 0 or self.cols < 0:
            raise NetworkSpecError('rows and cols must be >= 0')
        if set(self.waveguides) != {'A', 'B', 'C'}:
            raise NetworkSpecError('waveguides must be given for A, B and C')
        self.resonator.validate()
        for label, wg in self.waveguides.items():
            wg.validate()
            if self.length(label) < wg.period_d:
                raise NetworkSpecError(f'L_{label} is shorter than one period')
        return self


@dataclass(frozen=True)
class Placement:
    id: int
    sublattice: int
    center: tuple
    theta: float
    cell: tuple


@dataclass(frozen=True)
class Edge:
    id: int
    label: str
    a: int
    b: int
    length: float


@dataclass
class NetworkGraph:
    spec: NetworkSpec
    resonators: list
    edges: list

    def degree(self, rid):
        return sum(1 for e in self.edges if rid in (e.a, e.b))


    def edge(self, eid):
        for e in self.edges:
            if e.id == eid:
                return e
        raise NetworkSpecError(f'no edge with id {eid}')


    def first_edge(self, label):
        for e in self.edges:
            if e.label == label:
                return e
        return None


    def centers(self):
        return np.array([r.center for r in self.resonators]).reshape(-1, 2)


    def edge_segment(self, e):
        """ Port-face to port-face centre line of an edge. """
        p = self.spec.resonator.port_offset
        ca = np.array(self.resonators[e.a].center)
        cb = np.array(self.resonators[e.b].center)
        u = (cb - ca) / np.linalg.norm(cb - ca)
        return ca + p * u, cb - p * u


    def to_dict(self):
        return {
            'resonators': [{'id': r.id, 'sublattice': r.sublattice,
                            'center_um': general.m2um(list(r.center)),
                            'theta_deg': math.degrees(r.theta),
                            'cell': list(r.cell)} for r in self.resonators],
            'edges': [{'id': e.id, 'label': e.label, 'a': e.a, 'b': e.b,
                       'length_um': e.length * 1e6} for e in self.edges],
        }


@dataclass
class AuditEntry:
    name: str
    frequency: float = float('nan')
    region: str = 'none'
    expected_region: str = ''
    propagates: dict = field(default_factory=dict)
    passed: bool = False
    error: str = ''

    def to_dict(self):
        return {
            'name': self.name,
            'frequency_GHz': (None if math.isnan(self.frequency)
                              else self.frequency * 1e-9),
            'region': self.region,
            'expected_region': self.expected_region,
            'propagates': dict(sorted(self.propagates.items())),
            'passed': self.passed,
            'error': self.error,
        }


@dataclass
class PatchEntry:
    label: str
    f_center: float
    frequencies: list = field(default_factory=list)
    stub_fractions: list = field(default_factory=list)
    outside_resonator_fractions: list = field(default_factory=list)
    kind: str = 'triplet'
    confined: bool = False
    error: str = ''

    @property
    def max_stub_fraction(self):
        return max(self.stub_fractions) if self.stub_fractions else float('nan')


    def to_dict(self):
        return {
            'label': self.label,
            'kind': self.kind,
            'f_center_GHz': self.f_center * 1e-9,
            'frequencies_GHz': [f * 1e-9 for f in self.frequencies],
            'stub_energy_fractions': list(self.stub_fractions),
            'outside_resonator_fractions':
                list(self.outside_resonator_fractions),
            'confined': self.confined,
            'error': self.error,
        }


@dataclass
class AuditReport:
    entries: list = field(default_factory=list)
    patches: list = field(default_factory=list)
    stages: dict = field(default_factory=dict)
    gaps: dict = field(default_factory=dict)
    regions: object = None
    shield: dict = field(default_factory=dict)

    @property
    def passed(self):
        if any(s.startswith('failed') for s in self.stages.values()):
            return False
        if not self.entries or not all(e.passed for e in self.entries):
            return False
        if not all(p.confined for p in self.patches):
            return False
        return self.shield.get('covers', True)


    def to_dict(self):
        return {
            'passed': self.passed,
            'stages': dict(self.stages),
            'gaps': {k: v.to_dict() for k, v in sorted(self.gaps.items())},
            'regions': self.regions.to_dict() if self.regions else None,
            'verdicts': [e.to_dict() for e in self.entries],
            'patches': [p.to_dict() for p in self.patches],
            'shield': self.shield,
        }


def audit_json(report):
    return json.dumps(report.to_dict(), sort_keys=True, indent=2)


##########
# Layout #
##########
def _edge_vector(spec, label):
    D = spec.length(label) + 2 * spec.resonator.port_offset
    angle = math.radians(geometrymodel.PORT_ANGLES[label])
    return D * general.unit_vector(angle)


def lattice_vectors(spec):
    """ a1 = e_C - e_A, a2 = e_C - e_B (edge vectors include port offsets). """
    eC = _edge_vector(spec, 'C')
    return eC - _edge_vector(spec, 'A'), eC - _edge_vector(spec, 'B')


def _component_shapes(graph):
    """ (name, polygon, owners) for every resonator and strip. """
    spec = graph.spec
    shapes = []
    for r in graph.resonators:
        poly = geometrymodel.resonator_placed(spec.resonator, r.theta,
                                              r.center).polygon()
        shapes.append((f'resonator_{r.id}', poly, {r.id}))
    for e in graph.edges:
        ra = graph.resonators[e.a]
        label_theta = ra.theta
        strip, _ = geometrymodel.attached_strip(
            spec.resonator, spec.waveguides[e.label], label_theta,
            ra.center, e.label, e.length)
        shapes.append((f'edge_{e.id}_{e.label}', strip.polygon(),
                       {e.a, e.b}))
    return shapes


def check_overlaps(graph, tol=1e-18):
    """ Pairs of non-adjacent components whose interiors overlap. """
    shapes = _component_shapes(graph)
    if not shapes:
        return []
    tree = STRtree([s[1] for s in shapes])
    clashes = []
    for i, (name, poly, owners) in enumerate(shapes):
        for j in tree.query(poly):
            j = int(j)
            if j <= i:
                continue
            other, opoly, oowners = shapes[j]
            if owners & oowners:
                continue
            if poly.intersection(opoly).area > tol:
                clashes.append((name, other))
    return clashes


def honeycomb_layout(spec):
    """ rows x cols cells, each holding a sublattice-1 resonator and the
        sublattice-2 resonator across its C waveguide. A and B waveguides
        join neighbouring cells; edges leaving the extent are dropped.
    """
    spec.validate()
    a1, a2 = lattice_vectors(spec)
    eC = _edge_vector(spec, 'C')
    resonators, index = [], {}
    for j in range(spec.rows):
        for i in range(spec.cols):
            origin = i * a1 + j * a2
            for sub, center, theta in ((1, origin, 0.0),
                                       (2, origin + eC, math.pi)):
                rid = len(resonators)
                index[(i, j, sub)] = rid
                resonators.append(Placement(rid, sub, tuple(center), theta,
                                            (i, j)))
    edges = []

    def add(label, a, b):
        edges.append(Edge(len(edges), label, a, b, spec.length(label)))

    for j in range(spec.rows):
        for i in range(spec.cols):
            add('C', index[(i, j, 1)], index[(i, j, 2)])
            if (i + 1, j, 1) in index:
                add('A', index[(i + 1, j, 1)], index[(i, j, 2)])
            if (i, j + 1, 1) in index:
                add('B', index[(i, j + 1, 1)], index[(i, j, 2)])
    graph = NetworkGraph(spec, resonators, edges)
    clashes = check_overlaps(graph)
    if clashes:
        raise LayoutError(clashes)
    print(f"networkmodel: Layout with {len(resonators)} resonators and "
          f"{len(edges)} waveguides")
    return graph


def layout_outlines(graph):
    """ Exterior loops (um) of every resonator and strip, by name. """
    return {name: [list(general.m2um(p)) for p in poly.exterior.coords]
            for name, poly, _ in _component_shapes(graph)}


def shield_frame(graph, shield, linker, layers=2):
    """ Centres of square shield cells framing the lattice.

        The frame starts linker beyond the bounding box of every resonator
        and strip, and is layers cells thick.
    """
    shapes = _component_shapes(graph)
    if not shapes:
        return np.zeros((0, 2)), None
    minx, miny, maxx, maxy = unary_union([s[1] for s in shapes]).bounds
    h = shield.period_h
    x0, y0 = minx - linker - layers * h, miny - linker - layers * h
    x1, y1 = maxx + linker + layers * h, maxy + linker + layers * h
    nx = int(math.ceil((x1 - x0) / h))
    ny = int(math.ceil((y1 - y0) / h))
    centers = []
    for j in range(ny):
        for i in range(nx):
            c = (x0 + (i + 0.5) * h, y0 + (j + 0.5) * h)
            inner = (minx - linker < c[0] < maxx + linker and
                     miny - linker < c[1] < maxy + linker)
            if not inner:
                centers.append(c)
    return np.array(centers), (minx - linker, miny - linker,
                               maxx + linker, maxy + linker)


#################
# Patch solves #
#################
def patch_region(graph, edge_id, stub_periods, ellipse_segments=64):
    """ The edge's two resonators, its full waveguide, and stub_periods
        periods of every other waveguide attached to them.
    """
    if stub_periods < 2:
        raise NetworkSpecError('stub_periods must be at least 2')
    spec = graph.spec
    e = graph.edge(edge_id)
    stubs = [(k, spec.waveguides[k], stub_periods)
             for k in geometrymodel.PORT_ORDER if k != e.label]
    return geometrymodel.subsystem_assembly(
        spec.resonator, spec.waveguides[e.label], spec.length(e.label),
        stubs, label=e.label, ellipse_segments=ellipse_segments)


def localization_check(patch, material, f_center, res_spec, label,
                       window, kind='triplet', mesh=None, target_h=None,
                       tol=1e-9, wg_spec=None, reference=None):
    """ Energy fractions outside the subsystem for the modes near
        f_center.

        kind='triplet' keeps the three coupled modes; kind='resonator'
        keeps the mode with the largest resonator energy share.
    """
    extent = geometrymodel.subsystem_extent(patch)
    stub_union = unary_union([p for k, p in patch.parts.items()
                              if k.startswith('stub_')])
    res_union = unary_union([patch.parts['resonator_1'],
                             patch.parts['resonator_2']])
    entry = PatchEntry(label, f_center, kind=kind)
    if kind == 'triplet':
        _, chosen, ops = devicemodel.coupled_triplet(
            patch, material, f_center, window, res_spec, label, reference,
            mesh, target_h, tol, wg_spec, return_modes=True)
    else:
        ops, scored = devicemodel.coupled_modes(
            patch, material, f_center, window, res_spec, label, mesh,
            target_h, tol, wg_spec)
        if not scored:
            raise TripletError([])
        chosen = [max(scored, key=lambda s: s[1])[0]]
    for m in chosen:
        entry.frequencies.append(m.frequency)
        if stub_union.is_empty:
            outside = 1.0 - devicemodel.energy_fraction(ops, m, extent)
        else:
            outside = devicemodel.energy_fraction(ops, m, stub_union)
        entry.stub_fractions.append(outside)
        entry.outside_resonator_fractions.append(
            1.0 - devicemodel.energy_fraction(ops, m, res_union))
    if kind == 'triplet':
        entry.confined = entry.max_stub_fraction < CONFINEMENT_THRESHOLD
    else:
        entry.confined = (max(entry.outside_resonator_fractions)
                          < CONFINEMENT_THRESHOLD)
    print(f"networkmodel: Patch {label}: max stub energy fraction "
          f"{entry.max_stub_fraction:.3e}")
    return entry


#########
# Audit #
#########
def _run_stage(report, name, func):
    print(f"\nnetworkmodel: Audit stage '{name}'")
    try:
        result = func()
    except STAGE_ERRORS as exc:
        report.stages[name] = f'failed: {exc}'
        print(f"networkmodel: Stage '{name}' failed: {exc}")
        return None
    report.stages[name] = 'ok'
    return result


def closed_subsystem_audit(spec, material, mode_targets, f_window,
                           solver_opts=None, patch_opts=None, shield=None,
                           threads=1):
    """ Dispersion -> gaps -> regions -> resonator catalog -> verdicts
        -> patch confinement (-> shield coverage).

        mode_targets: {'mode_a': f_Hz, ...} nominal resonator mode
        frequencies; the nearest catalog mode stands in for each.
    """
    solver_opts = dict(solver_opts or {})
    resonator_h = solver_opts.pop('resonator_h', None)
    min_gap_width = solver_opts.pop('min_gap_width',
                                    bandsmodel.MIN_GAP_WIDTH)
    patch_opts = dict(patch_opts or {})
    report = AuditReport()
    spec.validate()

    def spectra():
        def job(label):
            bs = bandsmodel.dispersion(spec.waveguides[label], material,
                                       label=label, **solver_opts)
            return label, bandsmodel.detect_gaps(bs, min_gap_width)
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            return dict(pool.map(job, ('A', 'B', 'C')))

    gaps = _run_stage(report, 'dispersion', spectra)
    if gaps is not None:
        report.gaps = gaps
        report.regions = _run_stage(
            report, 'regions',
            lambda: bandsmodel.classify_regions(gaps['A'], gaps['B'],
                                                gaps['C']))

    catalog = _run_stage(
        report, 'resonator',
        lambda: devicemodel.resonator_modes(
            spec.resonator, material, f_window,
            target_h=resonator_h,
            regions=report.regions))

    picked = {}
    for name, (wg_label, expected) in MODE_TARGETS.items():
        entry = AuditEntry(name, expected_region=expected)
        target = mode_targets.get(name)
        if catalog is None or report.regions is None or target is None:
            entry.error = 'missing inputs'
            report.entries.append(entry)
            continue
        best = catalog.nearest(target)
        if best is None:
            entry.error = 'no resonator mode in window'
            report.entries.append(entry)
            continue
        picked[name] = best
        entry.frequency = best.frequency
        entry.region = bandsmodel.classify_frequency(best.frequency,
                                                     report.regions)
        entry.propagates = {k: not gaps[k].gaps.contains(best.frequency)
                            for k in ('A', 'B', 'C')}
        entry.passed = entry.region == expected
        report.entries.append(entry)

    if spec.rows == 0 or spec.cols == 0:
        report.stages['patch'] = 'skipped'
    else:
        graph = _run_stage(report, 'layout', lambda: honeycomb_layout(spec))
        if graph is not None:
            _audit_patches(report, graph, material, picked, patch_opts)

    if shield is not None:
        _audit_shield(report, shield, material, solver_opts, threads,
                      min_gap_width)
    return report


def _audit_patches(report, graph, material, picked, patch_opts):
    spec = graph.spec
    periods = patch_opts.get('stub_periods', 3)
    window = patch_opts.get('window', 60e6)
    failed = []
    for name, (label, _) in MODE_TARGETS.items():
        if name not in picked:
            continue
        # Modes guided by no waveguide must stay inside the resonators
        # of any edge's subsystem.
        kind = 'triplet' if label is not None else 'resonator'
        if label is None:
            e = graph.edges[0] if graph.edges else None
        else:
            e = graph.first_edge(label)
        if e is None:
            continue
        f0 = picked[name].frequency
        try:
            patch = patch_region(graph, e.id, periods)
            entry = localization_check(
                patch, material, f0, spec.resonator, e.label, window,
                kind=kind, target_h=patch_opts.get('target_h'),
                wg_spec=spec.waveguides[e.label], reference=picked[name])
        except STAGE_ERRORS as exc:
            entry = PatchEntry(e.label, f0, kind=kind, error=str(exc))
            failed.append(f'{name} on {e.label}: {exc}')
        report.patches.append(entry)
    report.stages['patch'] = ('ok' if not failed
                              else 'failed: ' + '; '.join(failed))


def _audit_shield(report, shield, material, solver_opts, threads,
                  min_gap_width=bandsmodel.MIN_GAP_WIDTH):
    opts = {k: v for k, v in solver_opts.items()
            if k in ('f_max', 'tol', 'min_angle', 'n_bands')}

    def run():
        bs = bandsmodel.dispersion_2d(shield, material, threads=threads,
                                      **opts)
        return bandsmodel.detect_gaps(bs, min_gap_width)

    gaps = _run_stage(report, 'shield', run)
    if gaps is None:
        return
    operating = [e.frequency for e in report.entries
                 if not math.isnan(e.frequency)]
    dom = bandsmodel.dominant_gap(gaps)
    covers = dom is not None and all(dom[0] < f < dom[1] for f in operating)
    report.shield = {
        'gaps': gaps.to_dict(),
        'dominant_gap_GHz': None if dom is None else [dom[0] * 1e-9,
                                                      dom[1] * 1e-9],
        'covers': bool(covers),
    }

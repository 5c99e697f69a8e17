""" Band structures, band gaps and Region I-IV classification.

    A BlochSolver meshes and assembles one unit cell, then solves the
    Bloch eigenproblem at any wavevector. Dispersion runs solve their
    k-points on a thread pool and assemble results by index, so output
    does not depend on completion order.
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
import pandas as pd
from scipy.optimize import minimize_scalar

# Custom modules
from exceptions.config_exceptions import ArtifactMismatch
from exceptions.geometry_exceptions import GeometryError
from functions.intervals import IntervalSet
from models import elasticitymodel
from models import geometrymodel
from models import meshmodel


#############
# Constants #
#############
F_MAX = 2.5e9
N_K = 25
# Default minimum reportable gap width (Hz); every positive gap counts
MIN_GAP_WIDTH = 0.0
# Unit cell mesh size as a fraction of the period
CELL_DIVISOR = 12
REGION_LABELS = ('I', 'II', 'III', 'IV')


#########
# Types #
#########
@dataclass
class BandStructure:
    """ bands[i, j] is the j-th lowest frequency (Hz) at k_samples[i].

        For 1D runs k_samples is (n_k,) in rad/m. For 2D paths it is
        (n_k, 2) and path holds the cumulative path parameter.
    """
    k_samples: np.ndarray
    bands: np.ndarray
    f_max: float
    path: np.ndarray = None
    ticks: dict = field(default_factory=dict)
    label: str = ''

    def __post_init__(self):
        self.k_samples = np.asarray(self.k_samples, dtype=float)
        self.bands = np.asarray(self.bands, dtype=float)
        if self.path is None:
            self.path = (self.k_samples if self.k_samples.ndim == 1
                         else np.zeros(len(self.k_samples)))
        self.path = np.asarray(self.path, dtype=float)


    @property
    def n_bands(self):
        return self.bands.shape[1]


    @property
    def n_k(self):
        return self.bands.shape[0]


@dataclass
class GapSet:
    """ Open, disjoint, sorted gap intervals in Hz. """
    gaps: IntervalSet
    label: str = ''

    def __len__(self):
        return len(self.gaps)


    def to_dict(self):
        return {'label': self.label, 'gaps_GHz': self.gaps.to_list(1e-9)}


    @classmethod
    def from_dict(cls, data):
        return cls(IntervalSet.from_list(data['gaps_GHz'], 1e9),
                   data.get('label', ''))


@dataclass
class RegionSet:
    region_I: IntervalSet
    region_II: IntervalSet
    region_III: IntervalSet
    region_IV: IntervalSet

    def items(self):
        return [('I', self.region_I), ('II', self.region_II),
                ('III', self.region_III), ('IV', self.region_IV)]


    def to_dict(self):
        return {f'region_{name}_GHz': s.to_list(1e-9)
                for name, s in self.items()}


    @classmethod
    def from_dict(cls, data):
        return cls(*[IntervalSet.from_list(data[f'region_{n}_GHz'], 1e9)
                     for n in REGION_LABELS])


@dataclass
class SweepPoint:
    param: str
    value: float
    gaps: GapSet = None
    error: str = ''


###############
# BlochSolver #
###############
class BlochSolver:
    """ Mesh, operators and periodic maps of one unit cell. """

    def __init__(self, region, material, target_h, min_angle=25.0,
                 tol=1e-9):
        self.region = region
        self.mesh = meshmodel.triangulate(region, target_h, min_angle)
        self.ops = elasticitymodel.assemble(self.mesh, material)
        self.maps = meshmodel.region_maps(self.mesh)
        self.tol = tol


    def solve(self, k, count):
        ops_k = elasticitymodel.apply_bloch(self.ops, self.maps, k)
        count = min(count, ops_k.n_unknowns)
        return elasticitymodel.eigs(ops_k, 0.0, count, self.tol)


    def frequencies(self, k, f_max, start=8):
        """ Ascending frequencies at k, complete up to f_max: the mode
            count grows until one frequency lies above f_max.
        """
        count = start
        while True:
            modes = self.solve(k, count)
            freqs = np.array([m.frequency for m in modes])
            if freqs[-1] > f_max or len(freqs) < count:
                return freqs
            count = int(math.ceil(count * 1.5)) + 2


    def band_value(self, k, j):
        return self.solve(k, j + 1)[j].frequency


def _solve_all(solver, ks, f_max, n_bands, threads):
    """ Frequencies for every k, made rectangular and complete. """
    def job(k):
        return solver.frequencies(k, f_max, start=max(n_bands, 8))

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(job, ks))
    need = max(n_bands, max(int(np.sum(r <= f_max)) for r in results) + 1)
    for i, r in enumerate(results):
        if len(r) < need:
            results[i] = solver.frequencies(ks[i], f_max, start=need)
    need = min(need, min(len(r) for r in results))
    return np.array([r[:need] for r in results])


def cell_solver(spec, material, target_h=None, min_angle=25.0, tol=1e-9,
                ellipse_segments=64):
    if target_h is None:
        target_h = spec.period_d / CELL_DIVISOR
    region = geometrymodel.waveguide_cell(spec, ellipse_segments)
    return BlochSolver(region, material, target_h, min_angle, tol)


##############
# Operations #
##############
def dispersion(spec, material, n_k=N_K, n_bands=8, f_max=F_MAX,
               target_h=None, min_angle=25.0, tol=1e-9, threads=1,
               ellipse_segments=64, solver=None, label=''):
    """ Bands over k in [0, pi/d] at n_k points, complete below f_max. """
    if n_k < 8:
        raise ValueError("bandsmodel: n_k must be at least 8")
    if not f_max > 0:
        raise ValueError("bandsmodel: f_max must be positive")
    print(f"\nbandsmodel: Dispersion of waveguide {label or ''} "
          f"(d = {spec.period_d * 1e6:.4g} um) at {n_k} k-points")
    if solver is None:
        solver = cell_solver(spec, material, target_h, min_angle, tol,
                             ellipse_segments)
    ks = np.linspace(0.0, math.pi / spec.period_d, n_k)
    bands = _solve_all(solver, list(ks), f_max, n_bands, threads)
    print(f"bandsmodel: Done ({bands.shape[1]} bands)")
    return BandStructure(ks, bands, f_max, label=label)


def detect_gaps(bs, min_width=MIN_GAP_WIDTH):
    """ Gap j is (max of band j, min of band j+1) when positive and
        below f_max.
    """
    gaps = IntervalSet()
    for j in range(bs.n_bands - 1):
        lo = float(bs.bands[:, j].max())
        hi = float(bs.bands[:, j + 1].min())
        if hi - lo > min_width and hi <= bs.f_max:
            gaps.add((lo, hi))
    return GapSet(gaps, bs.label)


def classify_regions(gaps_A, gaps_B, gaps_C):
    """ I = (B & C) - A, II = (A & C) - B, III = (A & B) - C,
        IV = A & B & C.
    """
    A, B, C = gaps_A.gaps, gaps_B.gaps, gaps_C.gaps
    return RegionSet(
        region_I=B.intersection(C).difference(A),
        region_II=A.intersection(C).difference(B),
        region_III=A.intersection(B).difference(C),
        region_IV=A.intersection(B).intersection(C),
    )


def classify_frequency(f, regions):
    """ Label of the region holding f, or 'none'. """
    for name, intervals in regions.items():
        if intervals.contains(f):
            return name
    return 'none'


def sweep_values(base, delta_range, n_steps):
    if delta_range == 0 or n_steps <= 1:
        return [base]
    return list(np.linspace(base - delta_range, base + delta_range, n_steps))


def robustness_sweep(spec, material, param, delta_range, n_steps=9,
                     min_gap_width=MIN_GAP_WIDTH, **kwargs):
    """ Gap sets over spec.param in [base - delta, base + delta].
        Invalid steps are recorded and skipped.
    """
    names = {'d': 'period_d', 'w': 'width_w', 'a': 'semi_major_a',
             'b': 'semi_minor_b'}
    if param not in names:
        raise ValueError(f"bandsmodel: Unknown sweep parameter '{param}'")
    base = getattr(spec, names[param])
    points = []
    values = sweep_values(base, delta_range, n_steps)
    for i, value in enumerate(values):
        print(f"\nbandsmodel: Sweep step {i + 1} of {len(values)}: "
              f"{param} = {value * 1e6:.4f} um")
        step = spec.replace(param, value)
        try:
            step.validate()
            bs = dispersion(step, material, **kwargs)
        except GeometryError as exc:
            print(f"bandsmodel: Step skipped: {exc}")
            points.append(SweepPoint(param, value, None, str(exc)))
            continue
        points.append(SweepPoint(param, value,
                                 detect_gaps(bs, min_gap_width)))
    return points


def gap_edge_spread(points, gap_index):
    """ (lower-edge spread, upper-edge spread) of one gap over a sweep,
        counting only steps where the gap exists.
    """
    lows, highs = [], []
    for p in points:
        if p.gaps is None or len(p.gaps) <= gap_index:
            continue
        lo, hi = p.gaps.gaps.intervals[gap_index]
        lows.append(lo)
        highs.append(hi)
    if not lows:
        return float('nan'), float('nan')
    return max(lows) - min(lows), max(highs) - min(highs)


def square_lattice_path(h, n_per_leg):
    """ Gamma -> X -> M -> Gamma wavevectors and path parameter. """
    G = np.array([0.0, 0.0])
    X = np.array([math.pi / h, 0.0])
    M = np.array([math.pi / h, math.pi / h])
    ks = []
    for a, b in ((G, X), (X, M), (M, G)):
        t = np.linspace(0.0, 1.0, n_per_leg + 1)[:-1]
        ks += [a + s * (b - a) for s in t]
    ks.append(G)
    ks = np.array(ks)
    steps = np.linalg.norm(np.diff(ks, axis=0), axis=1)
    path = np.concatenate([[0.0], np.cumsum(steps)])
    ticks = {'G': 0.0, 'X': path[n_per_leg], 'M': path[2 * n_per_leg],
             'G_end': path[-1]}
    return ks, path, ticks


def shield_solver(spec, material, target_h=None, min_angle=25.0, tol=1e-9):
    if target_h is None:
        target_h = spec.period_h / CELL_DIVISOR
    region = geometrymodel.shield_cell(spec)
    return BlochSolver(region, material, target_h, min_angle, tol)


def dispersion_2d(spec, material, n_per_leg=10, n_bands=8, f_max=F_MAX,
                  target_h=None, min_angle=25.0, tol=1e-9, threads=1,
                  solver=None, label='shield'):
    """ Bands of a square shield cell along Gamma-X-M-Gamma. """
    print(f"\nbandsmodel: Shield dispersion (h = {spec.period_h * 1e6:.4g} "
          f"um), {n_per_leg} points per leg")
    if solver is None:
        solver = shield_solver(spec, material, target_h, min_angle, tol)
    ks, path, ticks = square_lattice_path(spec.period_h, n_per_leg)
    bands = _solve_all(solver, list(ks), f_max, n_bands, threads)
    return BandStructure(ks, bands, f_max, path, ticks, label)


def dominant_gap(gaps):
    """ Widest gap of a set, or None. """
    best = None
    for lo, hi in gaps.gaps:
        if best is None or hi - lo > best[1] - best[0]:
            best = (lo, hi)
    return best


def finite_difference_slopes(bs):
    """ d(omega)/dk per band (m/s), central differences along the path. """
    x = bs.path if bs.k_samples.ndim > 1 else bs.k_samples
    return np.gradient(2 * math.pi * bs.bands, x, axis=0)


def slope_at_frequency(bs, f, band=None):
    """ Group velocity estimate |d(omega)/dk| at the sample whose band
        frequency lies nearest f.
    """
    slopes = finite_difference_slopes(bs)
    dist = np.abs(bs.bands - f)
    if band is not None:
        i = int(np.argmin(dist[:, band]))
        return abs(float(slopes[i, band]))
    i, j = np.unravel_index(np.argmin(dist), dist.shape)
    return abs(float(slopes[i, j]))


def refine_gap_edges(solver, bs, gaps, tol_hz=1e6):
    """ Sharpen gap edges by searching k between samples around the
        extremal band points. Only 1D band structures are refined.
    """
    ks = bs.k_samples
    refined = IntervalSet()
    for lo, hi in gaps.gaps:
        j = int(np.argmin(np.abs(bs.bands.max(axis=0) - lo)))
        edges = []
        for band, sign in ((j, -1.0), (j + 1, 1.0)):
            i = int(np.argmax(-sign * bs.bands[:, band]))
            a = ks[max(i - 1, 0)]
            b = ks[min(i + 1, len(ks) - 1)]
            best = bs.bands[i, band]
            if b > a:
                res = minimize_scalar(
                    lambda k: sign * solver.band_value(k, band),
                    bounds=(a, b), method='bounded',
                    options={'xatol': (b - a) * 1e-3})
                value = sign * res.fun
                if sign * (value - best) < 0 and abs(value - best) > 0:
                    best = value
            edges.append(best)
        if edges[1] - edges[0] > tol_hz:
            refined.add((edges[0], edges[1]))
    return GapSet(refined, gaps.label)


###########
# Exports #
###########
def band_frame(bs):
    """ DataFrame with the k columns then band frequencies in GHz. """
    data = {}
    if bs.k_samples.ndim == 1:
        data['k_rad_per_m'] = bs.k_samples
    else:
        data['path_rad_per_m'] = bs.path
        data['kx_rad_per_m'] = bs.k_samples[:, 0]
        data['ky_rad_per_m'] = bs.k_samples[:, 1]
    for j in range(bs.n_bands):
        data[f'band_{j}_GHz'] = bs.bands[:, j] * 1e-9
    return pd.DataFrame(data)


def write_band_csv(bs, path):
    band_frame(bs).to_csv(path, index=False, float_format='%.12g')


def read_band_csv(path, f_max=F_MAX):
    try:
        df = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError,
            UnicodeDecodeError):
        raise ArtifactMismatch('band-diagram', str(path))
    band_cols = [c for c in df.columns if c.startswith('band_')]
    if not band_cols or not ({'k_rad_per_m', 'kx_rad_per_m'}
                             & set(df.columns)):
        raise ArtifactMismatch('band-diagram', str(path))
    bands = df[band_cols].to_numpy() * 1e9
    if 'k_rad_per_m' in df.columns:
        return BandStructure(df['k_rad_per_m'].to_numpy(), bands, f_max)
    ks = df[['kx_rad_per_m', 'ky_rad_per_m']].to_numpy()
    return BandStructure(ks, bands, f_max, df['path_rad_per_m'].to_numpy())


def gaps_json(gaps):
    return json.dumps(gaps.to_dict(), sort_keys=True, indent=2)


def regions_json(regions):
    return json.dumps(regions.to_dict(), sort_keys=True, indent=2)

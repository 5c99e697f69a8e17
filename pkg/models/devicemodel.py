""" Finite-structure eigenproblems: resonators, finite waveguides and
    coupled resonator-waveguide-resonator subsystems.

    Coupling between a resonator mode and a waveguide mode is recovered
    from the three normal-mode frequencies of the subsystem:

        Delta = w+ + w- - 2 w0
        g = sqrt(((w+ - w-)^2 - Delta^2) / 8)
"""

###########
# Imports #
###########
# Standard library
import json
import math
from dataclasses import dataclass, field

# Third party
import numpy as np
import shapely
from scipy.interpolate import LinearNDInterpolator

# Custom modules
from exceptions.device_exceptions import SingleModeApproximationError
from exceptions.device_exceptions import TripletError
from exceptions.device_exceptions import TuningError
from models import bandsmodel
from models import elasticitymodel
from models import geometrymodel
from models import meshmodel


#############
# Constants #
#############
DARK_MODE_THRESHOLD = 0.1
# Relative frequency difference below which modes count as degenerate
DEGENERACY_RTOL = 1e-6
# g / spacing above which the single-mode waveguide picture is suspect
SINGLE_MODE_RATIO = 0.25
TUNE_TOLERANCE_HZ = 1e6
# Half-width of the search window around a tuning target, relative
TUNE_WINDOW = 0.05


#########
# Types #
#########
@dataclass(frozen=True)
class CoupledTriplet:
    omega_minus: float
    omega_zero: float
    omega_plus: float

    def __post_init__(self):
        if not self.omega_minus <= self.omega_zero <= self.omega_plus:
            raise TripletError([self.omega_minus, self.omega_zero,
                                self.omega_plus])


    @classmethod
    def from_frequencies(cls, freqs):
        return cls(*sorted(float(f) for f in freqs))


    def as_list(self):
        return [self.omega_minus, self.omega_zero, self.omega_plus]


@dataclass(frozen=True)
class CouplingEstimate:
    detuning_delta: float
    coupling_g: float

    def to_dict(self):
        return {'detuning_delta_MHz': self.detuning_delta * 1e-6,
                'coupling_g_MHz': self.coupling_g * 1e-6}


@dataclass
class CatalogEntry:
    mode: object
    signature: dict
    region: str = 'none'
    parity: float = float('nan')
    confinement: float = float('nan')
    degeneracy: int = 1

    @property
    def frequency(self):
        return self.mode.frequency


    def to_dict(self):
        return {
            'frequency_GHz': self.frequency * 1e-9,
            'port_signature': {k: float(v) for k, v in
                               sorted(self.signature.items())},
            'region': self.region,
            'parity': None if math.isnan(self.parity) else self.parity,
            'confinement_fraction': (None if math.isnan(self.confinement)
                                     else self.confinement),
            'degeneracy': self.degeneracy,
            'residual': self.mode.residual,
        }


@dataclass
class ModeCatalog:
    entries: list
    ops: object = None
    label: str = ''
    spacings: list = field(default_factory=list)
    expected_spacings: list = field(default_factory=list)

    def __len__(self):
        return len(self.entries)


    def __iter__(self):
        return iter(self.entries)


    @property
    def frequencies(self):
        return np.array([e.frequency for e in self.entries])


    def nearest(self, f):
        if not self.entries:
            return None
        return min(self.entries, key=lambda e: abs(e.frequency - f))


    def to_json(self):
        data = {
            'label': self.label,
            'modes': [e.to_dict() for e in self.entries],
            'spacings_MHz': [s * 1e-6 for s in self.spacings],
            'expected_spacings_MHz': [s * 1e-6
                                      for s in self.expected_spacings],
        }
        return json.dumps(data, sort_keys=True, indent=2)


###########
# Helpers #
###########
def _normal_rms(displacement, nodes, normal):
    if len(nodes) == 0:
        return 0.0
    u = displacement[nodes]
    un = u[:, 0] * normal[0] + u[:, 1] * normal[1]
    return float(np.sqrt(np.mean(np.abs(un) ** 2)))


def _nodes_near_segment(mesh, segment, band):
    return meshmodel.nodes_on_segments(mesh.nodes, [segment], band)


def _group_degenerate(freqs):
    groups, start = [], 0
    for i in range(1, len(freqs) + 1):
        if i == len(freqs) or (
                freqs[i] - freqs[start] >
                DEGENERACY_RTOL * max(freqs[start], 1.0)):
            groups.append(list(range(start, i)))
            start = i
    return groups


def mirror_parity(mesh, displacement, axis_y=0.0):
    """ Overlap of a field with its mirror image about y = axis_y:
        +1 for fields with ux even and uy odd, -1 for the opposite.
    """
    nodes = mesh.nodes
    interp = LinearNDInterpolator(nodes, displacement)
    mirrored_pts = np.column_stack([nodes[:, 0], 2 * axis_y - nodes[:, 1]])
    um = interp(mirrored_pts)
    ok = ~np.isnan(um).any(axis=1)
    if not ok.any():
        return float('nan')
    um = um[ok] * np.array([1.0, -1.0])
    u = displacement[ok]
    num = np.real(np.sum(u.conj() * um))
    den = np.real(np.sum(u.conj() * u))
    return float(num / den) if den > 0 else float('nan')


def energy_fraction(ops, mode, polygon):
    """ Share of the mode's strain energy in elements whose centroid
        lies inside polygon.
    """
    energy = elasticitymodel.strain_energy_field(ops, mode)
    total = energy.sum()
    if total <= 0:
        return 0.0
    c = ops.mesh.centroids()
    inside = shapely.contains_xy(polygon, c[:, 0], c[:, 1])
    return float(energy[inside].sum() / total)


def resonator_signature(mode, mesh, res_spec, theta=0.0, center=(0.0, 0.0),
                        band=None):
    """ RMS normal displacement over each port of a placed resonator. """
    sig = {}
    for label in geometrymodel.PORT_ORDER:
        normal, mid = geometrymodel.port_frame(res_spec, theta, center,
                                               label)
        tangent = np.array([-normal[1], normal[0]])
        half = 0.5 * res_spec.corner_cut_s_prime
        a, b = mid - half * tangent, mid + half * tangent
        width = band if band is not None else 1e-9 * mesh.target_h
        nodes = _nodes_near_segment(mesh, (a[0], a[1], b[0], b[1]), width)
        sig[label] = _normal_rms(mode.displacement, nodes, normal)
    return sig


##############
# Operations #
##############
def resonator_modes(spec, material, f_window, target_h=None, regions=None,
                    tol=1e-9, min_angle=25.0):
    """ Free resonator modes in f_window with per-port signatures. """
    spec.validate()
    f_lo, f_hi = f_window
    print(f"\ndevicemodel: Resonator modes in [{f_lo * 1e-9:.4f}, "
          f"{f_hi * 1e-9:.4f}] GHz")
    mesh = meshmodel.resonator_mesh(spec, target_h, min_angle)
    ops = elasticitymodel.assemble(mesh, material)
    modes = elasticitymodel.eigs_window(ops, f_lo, f_hi, tol)
    freqs = [m.frequency for m in modes]
    entries = []
    for group in _group_degenerate(freqs):
        raw = [resonator_signature(modes[i], mesh, spec) for i in group]
        # Degenerate partners share one signature (sum of squares), which
        # is invariant under rotations within the degenerate subspace
        combined = {k: float(np.sqrt(sum(r[k] ** 2 for r in raw)))
                    for k in geometrymodel.PORT_ORDER}
        for i in group:
            label = ('none' if regions is None else
                     bandsmodel.classify_frequency(freqs[i], regions))
            entries.append(CatalogEntry(modes[i], combined, label,
                                        degeneracy=len(group)))
    print(f"devicemodel: {len(entries)} resonator mode(s) found")
    return ModeCatalog(entries, ops, 'resonator')


def finite_waveguide_modes(spec, length_L, material, f_window,
                           target_h=None, tol=1e-9, min_angle=25.0,
                           ellipse_segments=64, bands=None):
    """ Standing-wave modes of a free strip, with mirror parity and the
        spacing between adjacent symmetric modes.

        With the strip's band structure given, each spacing is paired
        with the estimate v_g/(2L) from the band slope.
    """
    if length_L < 3 * spec.period_d * (1 - 1e-9):
        raise ValueError("devicemodel: length_L must be at least 3 periods")
    if target_h is None:
        target_h = spec.period_d / bandsmodel.CELL_DIVISOR
    region = geometrymodel.waveguide_strip(spec, length_L, ellipse_segments)
    mesh = meshmodel.triangulate(region, target_h, min_angle)
    ops = elasticitymodel.assemble(mesh, material)
    modes = elasticitymodel.eigs_window(ops, f_window[0], f_window[1], tol)
    entries = []
    for m in modes:
        sig = {
            'end_minus': _normal_rms(m.displacement, mesh.tag('end_minus'),
                                     (1.0, 0.0)),
            'end_plus': _normal_rms(m.displacement, mesh.tag('end_plus'),
                                    (1.0, 0.0)),
        }
        entries.append(CatalogEntry(m, sig, parity=mirror_parity(
            mesh, m.displacement)))
    catalog = ModeCatalog(entries, ops, 'waveguide')
    catalog.spacings = list(mode_spacing(catalog))
    if bands is not None:
        catalog.expected_spacings = spacing_estimates(catalog, bands,
                                                      length_L)
        for got, est in zip(catalog.spacings, catalog.expected_spacings):
            print(f"devicemodel: Spacing {got * 1e-6:.3f} MHz, band slope "
                  f"estimate {est * 1e-6:.3f} MHz")
    print(f"devicemodel: {len(entries)} strip mode(s), "
          f"L = {length_L * 1e6:.3f} um")
    return catalog


def _family_frequencies(catalog, family):
    return np.sort([e.frequency for e in catalog.entries
                    if family is None or
                    (family == 'symmetric' and e.parity > 0) or
                    (family == 'antisymmetric' and e.parity < 0)])


def mode_spacing(catalog, family='symmetric'):
    """ Adjacent spacings (Hz) within a parity family. """
    return np.diff(_family_frequencies(catalog, family))


def spacing_estimates(catalog, bands, length_L, family='symmetric'):
    """ v_g / (2 length_L) at the midpoint of each adjacent pair in a
        parity family, v_g the band slope nearest that frequency.
    """
    freqs = _family_frequencies(catalog, family)
    mids = 0.5 * (freqs[1:] + freqs[:-1])
    return [bandsmodel.slope_at_frequency(bands, f) / (2 * length_L)
            for f in mids]


def single_mode_check(g, spacing):
    """ True when g is small against the waveguide mode spacing. """
    return bool(g < SINGLE_MODE_RATIO * spacing)


def _symmetric_offset(spec, material, length_L, f_target, target_h, tol):
    """ f - f_target of the symmetric strip mode nearest f_target, or
        None when the window holds no symmetric mode.
    """
    half = TUNE_WINDOW * f_target
    catalog = finite_waveguide_modes(spec, length_L, material,
                                     (f_target - half, f_target + half),
                                     target_h, tol)
    sym = [e.frequency for e in catalog.entries if e.parity > 0]
    if not sym:
        return None
    f = min(sym, key=lambda v: abs(v - f_target))
    return f - f_target


def tune_length(spec, material, f_target, L_range, target_h=None, tol=1e-9,
                scan_step=None):
    """ Length at which a symmetric standing-wave mode sits within 1 MHz
        of f_target.

        Scans L in steps of d/20, then bisects the first interval where
        the nearest mode's offset falls through zero. Mode frequencies
        drop as L grows, so a zero crossing is a + to - sign change.
    """
    L0, L1 = L_range
    if L1 - L0 < 2 * spec.period_d:
        raise ValueError("devicemodel: L_range must span two periods")
    step = scan_step or spec.period_d / 20
    Ls = np.arange(L0, L1 + 0.5 * step, step)
    print(f"\ndevicemodel: Tuning to {f_target * 1e-9:.6f} GHz over "
          f"{len(Ls)} lengths")

    def offset(L):
        return _symmetric_offset(spec, material, L, f_target, target_h, tol)

    offsets = [offset(L) for L in Ls]
    nearest = (float(Ls[0]), float('nan'))
    best = math.inf
    for L, s in zip(Ls, offsets):
        if s is not None and abs(s) < best:
            best = abs(s)
            nearest = (float(L), f_target + s)
    if best <= TUNE_TOLERANCE_HZ:
        return nearest

    for i in range(len(Ls) - 1):
        s0, s1 = offsets[i], offsets[i + 1]
        if s0 is None or s1 is None or not (s0 > 0 >= s1):
            continue
        # Reject branch switches: a true crossing is a small jump
        if s0 - s1 > 0.5 * TUNE_WINDOW * f_target:
            continue
        a, b = float(Ls[i]), float(Ls[i + 1])
        for _ in range(40):
            mid = 0.5 * (a + b)
            s = offset(mid)
            if s is None:
                break
            if abs(s) <= TUNE_TOLERANCE_HZ:
                print(f"devicemodel: Tuned L = {mid * 1e6:.4f} um")
                return mid, f_target + s
            if s > 0:
                a = mid
            else:
                b = mid
            if abs(s) < best:
                best, nearest = abs(s), (mid, f_target + s)
    raise TuningError(f_target, nearest)


def assembly_mesh(assembly, res_spec, wg_spec, target_h=None,
                  min_angle=25.0):
    if target_h is None:
        target_h = min(res_spec.side_s / 24,
                       wg_spec.period_d / bandsmodel.CELL_DIVISOR)
    return meshmodel.triangulate(assembly, target_h, min_angle)


def coupled_modes(assembly, material, f_center, window, res_spec,
                  label='C', mesh=None, target_h=None, tol=1e-9,
                  wg_spec=None):
    """ All assembly modes in the window. Returns
        (ops, [(mode, resonator_share, signature_1, signature_2)]).
    """
    if mesh is None:
        if wg_spec is None:
            raise ValueError("devicemodel: need a mesh or a waveguide spec")
        mesh = assembly_mesh(assembly, res_spec, wg_spec, target_h)
    ops = elasticitymodel.assemble(mesh, material)
    modes = elasticitymodel.eigs_window(ops, f_center - window / 2,
                                        f_center + window / 2, tol)
    res_union = shapely.union(assembly.parts['resonator_1'],
                              assembly.parts['resonator_2'])
    theta1 = geometrymodel.label_rotation(label)
    D = _resonator_spacing(assembly)
    scored = []
    for m in modes:
        share = energy_fraction(ops, m, res_union)
        sig1 = resonator_signature(m, mesh, res_spec, theta1, (0.0, 0.0),
                                   band=0.5 * mesh.target_h)
        sig2 = resonator_signature(m, mesh, res_spec, theta1 + math.pi,
                                   (D, 0.0), band=0.5 * mesh.target_h)
        scored.append((m, share, sig1, sig2))
    return ops, scored


def _resonator_spacing(assembly):
    c1 = assembly.parts['resonator_1'].centroid
    c2 = assembly.parts['resonator_2'].centroid
    return float(np.hypot(c2.x - c1.x, c2.y - c1.y))


def _cosine(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(a @ b / (na * nb))


def coupled_triplet(assembly, material, f_center, window, res_spec,
                    label='C', reference=None, mesh=None, target_h=None,
                    tol=1e-9, wg_spec=None, return_modes=False):
    """ The three normal modes of the resonator/waveguide family near
        f_center, sorted ascending.

        Each mode is scored by the correlation of its port signatures
        with the reference resonator mode, times its resonator energy
        share. The three best-scoring modes are kept.
    """
    print(f"\ndevicemodel: Coupled modes near {f_center * 1e-9:.4f} GHz")
    ops, scored = coupled_modes(assembly, material, f_center, window,
                                res_spec, label, mesh, target_h, tol,
                                wg_spec)
    if len(scored) < 3:
        raise TripletError([s[0].frequency for s in scored])
    ports = geometrymodel.PORT_ORDER
    if reference is not None:
        ref = [reference.signature[k] for k in ports] * 2
    else:
        ref = None
    ranked = []
    for m, share, sig1, sig2 in scored:
        vec = [sig1[k] for k in ports] + [sig2[k] for k in ports]
        corr = _cosine(vec, ref) if ref is not None else 1.0
        ranked.append((corr * share, m))
    ranked.sort(key=lambda item: (-item[0], abs(item[1].frequency - f_center)))
    chosen = sorted((m for _, m in ranked[:3]), key=lambda m: m.frequency)
    triplet = CoupledTriplet.from_frequencies([m.frequency for m in chosen])
    print("devicemodel: Triplet " + ', '.join(
        f'{f * 1e-9:.6f}' for f in triplet.as_list()) + " GHz")
    if return_modes:
        return triplet, chosen, ops
    return triplet


def extract_coupling(t):
    """ (Delta, g) from an ordered triplet. """
    wm, w0, wp = t.omega_minus, t.omega_zero, t.omega_plus
    delta = wp + wm - 2 * w0
    radicand = (wp - wm) ** 2 - delta ** 2
    scale = (wp - wm) ** 2 + delta ** 2 + (1e-12 * max(abs(w0), 1.0)) ** 2
    if radicand < 0:
        if radicand >= -1e-12 * scale:
            radicand = 0.0
        else:
            raise SingleModeApproximationError(radicand)
    return CouplingEstimate(delta, math.sqrt(radicand / 8))


def coupled_mode_triplet(f_r, delta, g):
    """ Normal modes of two resonators at f_r coupled with rate g to one
        waveguide mode at f_r + delta.
    """
    H = np.array([[f_r, g, 0.0],
                  [g, f_r + delta, g],
                  [0.0, g, f_r]])
    return CoupledTriplet.from_frequencies(np.linalg.eigvalsh(H))


def dark_mode_fraction(ops, mode, subregion):
    """ Share of strain energy inside subregion (a shapely polygon). """
    return energy_fraction(ops, mode, subregion)


def is_dark(fraction, threshold=DARK_MODE_THRESHOLD):
    return fraction < threshold

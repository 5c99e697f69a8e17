""" Parametric boundary representations for waveguides, resonators,
    shield cells and resonator-waveguide assemblies.

    All lengths are stored in meters. The *_um constructors and the
    text format use micrometers.
"""

###########
# Imports #
###########
# Standard library
import math
import re
from dataclasses import dataclass, field

# Third party
import numpy as np
from shapely import affinity
from shapely.geometry import Polygon
from shapely.geometry.polygon import orient
from shapely.ops import unary_union
from shapely.validation import explain_validity

# Custom modules
from exceptions.geometry_exceptions import DisconnectedAssembly
from exceptions.geometry_exceptions import InvalidRegion
from exceptions.geometry_exceptions import InvalidSpec
from exceptions.solver_exceptions import SingularMaterial
from functions import general


#############
# Constants #
#############
# Port axis angles (degrees) of a resonator in its reference orientation
PORT_ANGLES = {'C': 0.0, 'A': 120.0, 'B': 240.0}
# Counterclockwise cyclic order of ports
PORT_ORDER = ('C', 'A', 'B')
# Depth (fraction of strip width) by which strips are embedded into ports
EMBED_FRACTION = 0.01


#########
# Specs #
#########
@dataclass(frozen=True)
class Material:
    """ Isotropic elastic constants and plate thickness (SI units). """
    youngs_modulus: float
    poisson_ratio: float
    density: float
    thickness: float

    @classmethod
    def from_config(cls, E_GPa, nu, rho_kg_m3, thickness_um):
        return cls(E_GPa * 1e9, nu, rho_kg_m3, thickness_um * 1e-6)


    def validate(self):
        if not self.youngs_modulus > 0:
            raise InvalidSpec('Material', 'youngs_modulus > 0')
        if not self.density > 0:
            raise InvalidSpec('Material', 'density > 0')
        if not self.thickness > 0:
            raise InvalidSpec('Material', 'thickness > 0')
        if not -1.0 < self.poisson_ratio < 0.5:
            raise SingularMaterial(self.poisson_ratio)
        return self


    def scaled(self, factor):
        """ Scale E and rho jointly (wave speeds unchanged). """
        return Material(self.youngs_modulus * factor, self.poisson_ratio,
                        self.density * factor, self.thickness)


@dataclass(frozen=True)
class WaveguideSpec:
    """ Strip of width w with elliptical holes of semi-axes (a, b)
        every period d. a = b = 0 means no hole.
    """
    period_d: float
    width_w: float
    semi_major_a: float
    semi_minor_b: float

    @classmethod
    def from_um(cls, d, w, a, b):
        return cls(*general.um2m([d, w, a, b]))


    @property
    def has_hole(self):
        return self.semi_major_a > 0 and self.semi_minor_b > 0


    def validate(self):
        name = 'WaveguideSpec'
        if not self.period_d > 0:
            raise InvalidSpec(name, 'period_d > 0')
        if not self.width_w > 0:
            raise InvalidSpec(name, 'width_w > 0')
        if self.semi_major_a < 0 or self.semi_minor_b < 0:
            raise InvalidSpec(name, 'hole semi-axes >= 0')
        if (self.semi_major_a == 0) != (self.semi_minor_b == 0):
            raise InvalidSpec(name, 'both hole semi-axes zero or both > 0')
        if not 2 * self.semi_major_a < self.period_d:
            raise InvalidSpec(name, '2*semi_major_a < period_d')
        if not 2 * self.semi_minor_b < self.width_w:
            raise InvalidSpec(name, '2*semi_minor_b < width_w')
        return self


    def replace(self, param, value):
        """ Copy with one of d, w, a, b replaced (meters). """
        names = {'d': 'period_d', 'w': 'width_w',
                 'a': 'semi_major_a', 'b': 'semi_minor_b'}
        vals = {
            'period_d': self.period_d, 'width_w': self.width_w,
            'semi_major_a': self.semi_major_a,
            'semi_minor_b': self.semi_minor_b,
        }
        vals[names.get(param, param)] = value
        return WaveguideSpec(**vals)


    def scaled(self, factor):
        return WaveguideSpec(self.period_d * factor, self.width_w * factor,
                             self.semi_major_a * factor,
                             self.semi_minor_b * factor)


@dataclass(frozen=True)
class ResonatorSpec:
    """ Equilateral triangle of side s with corner cuts of side s'. """
    side_s: float
    corner_cut_s_prime: float

    @classmethod
    def from_um(cls, s, s_prime):
        return cls(s * 1e-6, s_prime * 1e-6)


    def validate(self):
        if not self.side_s > 0:
            raise InvalidSpec('ResonatorSpec', 'side_s > 0')
        if not 0 <= self.corner_cut_s_prime < self.side_s / 2:
            raise InvalidSpec('ResonatorSpec',
                              '0 <= corner_cut_s_prime < side_s/2')
        return self


    @property
    def circumradius(self):
        return self.side_s / math.sqrt(3)


    @property
    def inradius(self):
        return self.side_s / (2 * math.sqrt(3))


    @property
    def port_offset(self):
        """ Distance from the centroid to a port (cut) edge. """
        return self.circumradius - self.corner_cut_s_prime * math.sqrt(3) / 2


    @property
    def area(self):
        s, c = self.side_s, self.corner_cut_s_prime
        return math.sqrt(3) / 4 * (s ** 2 - 3 * c ** 2)


    def scaled(self, factor):
        return ResonatorSpec(self.side_s * factor,
                             self.corner_cut_s_prime * factor)


@dataclass(frozen=True)
class ShieldSpec:
    """ Square cell of period h, centred block h', tethers of width l. """
    period_h: float
    block_h_prime: float
    tether_l: float

    @classmethod
    def from_um(cls, h, h_prime, l):
        return cls(h * 1e-6, h_prime * 1e-6, l * 1e-6)


    @property
    def is_solid(self):
        return self.block_h_prime >= self.period_h


    def validate(self):
        name = 'ShieldSpec'
        if not self.period_h > 0:
            raise InvalidSpec(name, 'period_h > 0')
        if not self.block_h_prime > 0:
            raise InvalidSpec(name, 'block_h_prime > 0')
        if self.block_h_prime > self.period_h:
            raise InvalidSpec(name, 'block_h_prime <= period_h')
        if self.is_solid:
            return self
        if not self.tether_l > 0:
            raise InvalidSpec(name, 'tether_l > 0 (block is disconnected)')
        if not self.tether_l < self.block_h_prime:
            raise InvalidSpec(name, 'tether_l < block_h_prime')
        return self


##############
# PolyRegion #
##############
@dataclass
class PolyRegion:
    """ Polygon with holes plus boundary tags.

        outer_loop: (N, 2) counterclockwise vertices, not closed
        hole_loops: list of (M, 2) clockwise vertex arrays
        tag_map: tag name -> list of (x0, y0, x1, y1) segments
        parts: name -> shapely polygon of a sub-component
        periodic_pairs: list of (minus_tag, plus_tag, translation)
    """
    outer_loop: np.ndarray
    hole_loops: list = field(default_factory=list)
    tag_map: dict = field(default_factory=dict)
    parts: dict = field(default_factory=dict)
    periodic_pairs: list = field(default_factory=list)

    def __post_init__(self):
        self.outer_loop = np.asarray(self.outer_loop, dtype=float)
        self.hole_loops = [np.asarray(h, dtype=float) for h in self.hole_loops]


    @property
    def scale(self):
        """ Characteristic length (bounding box diagonal). """
        lo = self.outer_loop.min(axis=0)
        hi = self.outer_loop.max(axis=0)
        return float(np.hypot(*(hi - lo)))


    def polygon(self):
        return Polygon(self.outer_loop, [h for h in self.hole_loops])


    def area(self):
        return general.signed_area(self.outer_loop) + sum(
            general.signed_area(h) for h in self.hole_loops)


    def validate(self):
        """ Check simplicity, orientation and hole containment. """
        if len(self.outer_loop) < 3:
            raise InvalidRegion('outer loop has fewer than 3 vertices')
        poly = self.polygon()
        if not poly.is_valid:
            reason = explain_validity(poly)
            raise InvalidRegion(reason, _location_from_reason(reason))
        if not general.signed_area(self.outer_loop) > 0:
            raise InvalidRegion('outer loop is not counterclockwise',
                                tuple(self.outer_loop[0]))
        for hole in self.hole_loops:
            if not general.signed_area(hole) < 0:
                raise InvalidRegion('hole loop is not clockwise',
                                    tuple(hole[0]))
        return self


    def hole_points(self):
        """ One point strictly inside each hole. """
        return [tuple(Polygon(h).representative_point().coords[0])
                for h in self.hole_loops]


    def transformed(self, theta=0.0, offset=(0.0, 0.0)):
        """ Rotate by theta (radians) about the origin, then translate. """
        offset = np.asarray(offset, dtype=float)

        def move(pts):
            return general.rotate_points(pts, theta) + offset

        tags = {}
        for tag, segs in self.tag_map.items():
            tags[tag] = []
            for x0, y0, x1, y1 in segs:
                (a, b) = move([[x0, y0], [x1, y1]])
                tags[tag].append((a[0], a[1], b[0], b[1]))
        parts = {
            name: affinity.translate(
                affinity.rotate(p, theta, origin=(0, 0),
                                        use_radians=True),
                offset[0], offset[1])
            for name, p in self.parts.items()
        }
        pairs = [(m, p, general.rotation_matrix(theta) @ np.asarray(t))
                 for m, p, t in self.periodic_pairs]
        return PolyRegion(move(self.outer_loop),
                          [move(h) for h in self.hole_loops],
                          tags, parts, pairs)


    def scaled(self, factor):
        """ Copy with every length multiplied by factor. """
        tags = {tag: [tuple(v * factor for v in seg) for seg in segs]
                for tag, segs in self.tag_map.items()}
        parts = {name: affinity.scale(p, factor, factor, origin=(0, 0))
                 for name, p in self.parts.items()}
        pairs = [(m, p, np.asarray(t) * factor)
                 for m, p, t in self.periodic_pairs]
        return PolyRegion(self.outer_loop * factor,
                          [h * factor for h in self.hole_loops],
                          tags, parts, pairs)


    def to_text(self):
        """ Plain-text polygon format in micrometers. """
        lines = ['OUTER']
        lines += [f'{x * 1e6:.17g} {y * 1e6:.17g}' for x, y in self.outer_loop]
        for hole in self.hole_loops:
            lines.append('')
            lines.append('HOLE')
            lines += [f'{x * 1e6:.17g} {y * 1e6:.17g}' for x, y in hole]
        for tag in sorted(self.tag_map):
            lines.append('')
            lines.append(f'TAG {tag}')
            for seg in self.tag_map[tag]:
                lines.append(' '.join(f'{v * 1e6:.17g}' for v in seg))
        return '\n'.join(lines) + '\n'


    @classmethod
    def from_text(cls, text):
        outer, holes, tags = None, [], {}
        for block in re.split(r'\n\s*\n', text.strip()):
            rows = block.strip().splitlines()
            header, body = rows[0].strip(), rows[1:]
            values = [[float(v) * 1e-6 for v in r.split()] for r in body]
            if header == 'OUTER':
                outer = values
            elif header == 'HOLE':
                holes.append(values)
            elif header.startswith('TAG '):
                tags[header[4:]] = [tuple(v) for v in values]
            else:
                # Headerless first block is an outer loop
                values = [[float(v) * 1e-6 for v in r.split()] for r in rows]
                outer = values
        if outer is None:
            raise InvalidRegion('no outer loop in polygon text')
        return cls(outer, holes, tags)


def _location_from_reason(reason):
    """ Pull the [x y] coordinates out of a shapely validity message. """
    match = re.search(r'\[([-\d.eE+]+)\s+([-\d.eE+]+)\]', reason)
    if match:
        return float(match.group(1)), float(match.group(2))
    return None


def region_from_polygon(poly, tag_map=None, parts=None):
    """ Build a PolyRegion from a shapely polygon. """
    poly = orient(poly, sign=1.0)
    outer = np.asarray(poly.exterior.coords)[:-1]
    holes = [np.asarray(r.coords)[:-1] for r in poly.interiors]
    return PolyRegion(outer, holes, tag_map or {}, parts or {})


##############
# Operations #
##############
def ellipse_polygon(a, b, segments, center=(0.0, 0.0)):
    """ Counterclockwise polygon inscribed in the ellipse with semi-axes
        a (along x) and b (along y).

        The inscribed area is (n/2)*a*b*sin(2*pi/n), short of pi*a*b
        by O(n^-2).
    """
    theta = 2 * np.pi * np.arange(segments) / segments
    pts = np.column_stack([a * np.cos(theta), b * np.sin(theta)])
    return pts + np.asarray(center, dtype=float)


def waveguide_cell(spec, ellipse_segments=64):
    """ One period of a waveguide, centred at the origin. """
    spec.validate()
    if ellipse_segments < 16:
        raise InvalidSpec('waveguide_cell', 'ellipse_segments >= 16')
    d, w = spec.period_d, spec.width_w
    outer = np.array([[-d / 2, -w / 2], [d / 2, -w / 2],
                      [d / 2, w / 2], [-d / 2, w / 2]])
    holes = []
    if spec.has_hole:
        holes.append(ellipse_polygon(spec.semi_major_a, spec.semi_minor_b,
                                     ellipse_segments)[::-1])
    tags = {
        'periodic_minus': [(-d / 2, -w / 2, -d / 2, w / 2)],
        'periodic_plus': [(d / 2, -w / 2, d / 2, w / 2)],
        'bottom': [(-d / 2, -w / 2, d / 2, -w / 2)],
        'top': [(-d / 2, w / 2, d / 2, w / 2)],
    }
    region = PolyRegion(outer, holes, tags,
                        periodic_pairs=[('periodic_minus', 'periodic_plus',
                                         np.array([d, 0.0]))])
    region.parts = {'cell': region.polygon()}
    return region.validate()


def hole_count(spec, length_L):
    """ Number of whole periods that fit in length_L. """
    return int(math.floor(length_L / spec.period_d + 1e-9))


def waveguide_strip(spec, length_L, ellipse_segments=64, embed=(0.0, 0.0)):
    """ Finite strip along x, centred at the origin, holding only whole
        holes placed symmetrically about the midpoint.

        embed extends the rectangle past the minus/plus ends by the given
        depths without moving the holes (used to overlap resonator ports).
    """
    spec.validate()
    if length_L < spec.period_d * (1 - 1e-9):
        raise InvalidSpec('waveguide_strip', 'length_L >= period_d')
    w = spec.width_w
    x0 = -length_L / 2 - embed[0]
    x1 = length_L / 2 + embed[1]
    outer = np.array([[x0, -w / 2], [x1, -w / 2], [x1, w / 2], [x0, w / 2]])
    n = hole_count(spec, length_L)
    holes = []
    if spec.has_hole:
        for j in range(n):
            xc = (j - (n - 1) / 2) * spec.period_d
            holes.append(ellipse_polygon(spec.semi_major_a,
                                         spec.semi_minor_b,
                                         ellipse_segments, (xc, 0.0))[::-1])
    tags = {
        'end_minus': [(x0, -w / 2, x0, w / 2)],
        'end_plus': [(x1, -w / 2, x1, w / 2)],
        'bottom': [(x0, -w / 2, x1, -w / 2)],
        'top': [(x0, w / 2, x1, w / 2)],
    }
    region = PolyRegion(outer, holes, tags)
    region.parts = {'strip': region.polygon()}
    return region.validate()


def _resonator_vertices(spec):
    """ Corner-cut triangle vertices, counterclockwise, with the index
        pairs of the port (cut) edges.
    """
    R = spec.circumradius
    corners = {k: R * general.unit_vector(math.radians(a))
               for k, a in PORT_ANGLES.items()}
    cut = spec.corner_cut_s_prime
    if cut == 0:
        verts = [corners[k] for k in PORT_ORDER]
        return np.array(verts), {k: (i, i) for i, k in enumerate(PORT_ORDER)}
    verts, ports = [], {}
    for i, key in enumerate(PORT_ORDER):
        prev_key = PORT_ORDER[i - 1]
        next_key = PORT_ORDER[(i + 1) % 3]
        c = corners[key]
        to_prev = corners[prev_key] - c
        to_next = corners[next_key] - c
        ports[key] = (len(verts), len(verts) + 1)
        verts.append(c + cut * to_prev / np.linalg.norm(to_prev))
        verts.append(c + cut * to_next / np.linalg.norm(to_next))
    return np.array(verts), ports


def resonator_outline(spec):
    """ Corner-cut equilateral triangle centred at the origin with port
        C on +x, A at 120 degrees and B at 240 degrees.
    """
    spec.validate()
    verts, ports = _resonator_vertices(spec)
    tags = {}
    for key, (i, j) in ports.items():
        tags[f'port_{key}'] = [(verts[i][0], verts[i][1],
                                verts[j][0], verts[j][1])]
    region = PolyRegion(verts, [], tags)
    region.parts = {'resonator': region.polygon()}
    return region.validate()


def resonator_sector(spec):
    """ The 120 degree sector of the resonator around port C, bounded
        by seams from the centroid to the midpoints of the two long
        sides. Rotating it by 120 and 240 degrees tiles the outline.
    """
    spec.validate()
    verts, ports = _resonator_vertices(spec)
    r = spec.inradius
    m_minus = r * general.unit_vector(math.radians(-60.0))
    m_plus = r * general.unit_vector(math.radians(60.0))
    i, j = ports['C']
    if i == j:
        loop = [[0.0, 0.0], m_minus, verts[i], m_plus]
    else:
        loop = [[0.0, 0.0], m_minus, verts[i], verts[j], m_plus]
    tags = {
        'seam_minus': [(0.0, 0.0, m_minus[0], m_minus[1])],
        'seam_plus': [(0.0, 0.0, m_plus[0], m_plus[1])],
        'port_C': [(verts[i][0], verts[i][1], verts[j][0], verts[j][1])],
    }
    return PolyRegion(loop, [], tags).validate()


def shield_cell(spec):
    """ Square cell of side h with a centred block of side h' tied to
        all four cell edges by tethers of width l.
    """
    spec.validate()
    h, hp, l = spec.period_h, spec.block_h_prime, spec.tether_l
    H, B, T = h / 2, hp / 2, l / 2
    if spec.is_solid:
        outer = np.array([[-H, -H], [H, -H], [H, H], [-H, H]])
        edges = {'x': (-H, H), 'y': (-H, H)}
    else:
        outer = np.array([
            [-T, -H], [T, -H], [T, -B], [B, -B], [B, -T], [H, -T],
            [H, T], [B, T], [B, B], [T, B], [T, H], [-T, H],
            [-T, B], [-B, B], [-B, T], [-H, T], [-H, -T], [-B, -T],
            [-B, -B], [-T, -B],
        ])
        edges = {'x': (-T, T), 'y': (-T, T)}
    lo, hi = edges['x']
    tags = {
        'periodic_x_minus': [(-H, lo, -H, hi)],
        'periodic_x_plus': [(H, lo, H, hi)],
        'periodic_y_minus': [(lo, -H, hi, -H)],
        'periodic_y_plus': [(lo, H, hi, H)],
    }
    pairs = [
        ('periodic_x_minus', 'periodic_x_plus', np.array([h, 0.0])),
        ('periodic_y_minus', 'periodic_y_plus', np.array([0.0, h])),
    ]
    region = PolyRegion(outer, [], tags, periodic_pairs=pairs)
    region.parts = {'cell': region.polygon()}
    return region.validate()


def shield_void_fraction(spec):
    """ Area fraction of the cell that is etched away. """
    h, hp, l = spec.period_h, spec.block_h_prime, spec.tether_l
    if spec.is_solid:
        return 0.0
    return 1 - (hp ** 2 + 2 * l * (h - hp)) / h ** 2


def port_frame(res_spec, theta, center, label):
    """ Outward unit normal and midpoint of a port of a resonator
        rotated by theta (radians) and centred at center.
    """
    angle = math.radians(PORT_ANGLES[label]) + theta
    normal = general.unit_vector(angle)
    mid = np.asarray(center, dtype=float) + res_spec.port_offset * normal
    return normal, mid


def attached_strip(res_spec, wg_spec, theta, center, label, length_L,
                   ellipse_segments=64):
    """ Strip leaving a resonator port outward, flush with the port
        edge and embedded into the resonator by a small hidden depth.
    """
    if wg_spec.width_w > max(res_spec.corner_cut_s_prime, 0.0) + 1e-15:
        raise InvalidSpec('subsystem_assembly',
                          'waveguide width <= resonator port width')
    embed = EMBED_FRACTION * wg_spec.width_w
    strip = waveguide_strip(wg_spec, length_L, ellipse_segments,
                            embed=(embed, 0.0))
    normal, mid = port_frame(res_spec, theta, center, label)
    angle = math.atan2(normal[1], normal[0])
    return strip.transformed(angle, mid + normal * length_L / 2), embed


def resonator_placed(res_spec, theta, center):
    return resonator_outline(res_spec).transformed(theta, center)


def label_rotation(label):
    """ Rotation (radians) that turns port `label` onto +x. """
    return -math.radians(PORT_ANGLES[label])


def _parse_stubs(stub_specs, label):
    """ Normalize stub specs to [(label, spec, periods)]. Two-element
        entries are assigned to the remaining ports in C, A, B order.
    """
    free = [k for k in PORT_ORDER if k != label]
    out = []
    for item in stub_specs or []:
        if len(item) == 3:
            out.append(tuple(item))
        else:
            out.append((free[len(out)],) + tuple(item))
    return out


def union_region(pieces, parts, tag_map=None):
    """ Boolean union of placed PolyRegions into one connected region. """
    merged = unary_union([p.polygon() for p in pieces])
    if merged.geom_type != 'Polygon':
        raise DisconnectedAssembly(len(getattr(merged, 'geoms', [])))
    return region_from_polygon(merged, tag_map, parts).validate()


def subsystem_assembly(res, wg, length_L, stub_specs=None, label='C',
                       ellipse_segments=64):
    """ Two resonators joined through port `label` by a strip of length
        length_L, with optional stubs on the remaining ports.

        Resonator 1 sits at the origin with port `label` on +x, and
        resonator 2 is its 180 degree rotation centred at
        (length_L + 2*port_offset, 0).
    """
    res.validate()
    wg.validate()
    theta1 = label_rotation(label)
    theta2 = theta1 + math.pi
    D = length_L + 2 * res.port_offset
    centers = [np.zeros(2), np.array([D, 0.0])]
    thetas = [theta1, theta2]

    pieces, parts = [], {}
    for i in range(2):
        piece = resonator_placed(res, thetas[i], centers[i])
        pieces.append(piece)
        parts[f'resonator_{i + 1}'] = piece.polygon()

    # Main strip, embedded at both ends
    embed = EMBED_FRACTION * wg.width_w
    if wg.width_w > res.corner_cut_s_prime + 1e-15:
        raise InvalidSpec('subsystem_assembly',
                          'waveguide width <= resonator port width')
    strip = waveguide_strip(wg, length_L, ellipse_segments,
                            embed=(embed, embed))
    strip = strip.transformed(0.0, (D / 2, 0.0))
    pieces.append(strip)
    parts['waveguide'] = strip.polygon()

    tags = {}
    for stub_label, stub_spec, periods in _parse_stubs(stub_specs, label):
        stub_spec.validate()
        for i in range(2):
            stub, _ = attached_strip(res, stub_spec, thetas[i], centers[i],
                                     stub_label, periods * stub_spec.period_d,
                                     ellipse_segments)
            name = f'stub_{stub_label}_{i + 1}'
            pieces.append(stub)
            parts[name] = stub.polygon()
            tags[f'{name}_end'] = stub.tag_map['end_plus']

    region = union_region(pieces, parts, tags)
    region.parts['subsystem'] = unary_union(
        [parts['resonator_1'], parts['resonator_2'], parts['waveguide']])
    return region


def subsystem_extent(region):
    """ Shapely polygon of the two resonators plus connecting strip. """
    return region.parts['subsystem']


def write_region(path, region):
    with open(path, 'w') as fh:
        fh.write(region.to_text())


def read_region(path):
    with open(path, 'r') as fh:
        return PolyRegion.from_text(fh.read())

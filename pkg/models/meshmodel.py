""" Quadratic triangle meshes of PolyRegions.

    Corner triangulation is done by Triangle (constrained Delaunay
    refinement). Midside nodes are added here so that every element is
    a 6-node straight-edged triangle ordered [c0, c1, c2, m01, m12, m20]
    with counterclockwise corners.
"""

###########
# Imports #
###########
# Standard library
import math
import re
from dataclasses import dataclass

# Third party
import numpy as np
import triangle
from scipy.spatial import cKDTree

# Custom modules
from exceptions.mesh_exceptions import PeriodicPairingError
from exceptions.mesh_exceptions import UnmeshableRegion
from functions import general
from models import geometrymodel


#############
# Constants #
#############
# Max triangle area as a fraction of target_h**2. At a 20 degree
# minimum angle this keeps the longest edge below 1.5*target_h.
AREA_FACTOR = 0.2


########
# Mesh #
########
class Mesh:
    """ Immutable quadratic triangle mesh.

        nodes: (N, 2) coordinates in meters
        elements: (E, 6) node indices
        boundary_tags: tag -> sorted array of node indices
    """

    def __init__(self, nodes, elements, boundary_tags, target_h, region=None):
        self.nodes = np.array(nodes, dtype=float)
        self.elements = np.array(elements, dtype=np.int64)
        self.boundary_tags = {k: np.array(sorted(set(int(i) for i in v)),
                                          dtype=np.int64)
                              for k, v in boundary_tags.items()}
        self.target_h = float(target_h)
        self.region = region
        self.nodes.setflags(write=False)
        self.elements.setflags(write=False)
        for arr in self.boundary_tags.values():
            arr.setflags(write=False)


    @property
    def n_nodes(self):
        return len(self.nodes)


    @property
    def n_elements(self):
        return len(self.elements)


    @property
    def n_dof(self):
        return 2 * len(self.nodes)


    def corner_coords(self):
        """ (E, 3, 2) corner coordinates. """
        return self.nodes[self.elements[:, :3]]


    def element_areas(self):
        c = self.corner_coords()
        e1 = c[:, 1] - c[:, 0]
        e2 = c[:, 2] - c[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


    def total_area(self):
        return float(self.element_areas().sum())


    def centroids(self):
        return self.corner_coords().mean(axis=1)


    def tag(self, name):
        if name not in self.boundary_tags:
            raise UnmeshableRegion(f"no boundary tag '{name}' in mesh")
        return self.boundary_tags[name]


    def scaled(self, factor):
        """ Same topology with every coordinate multiplied by factor. """
        region = self.region.scaled(factor) if self.region else None
        return Mesh(self.nodes * factor, self.elements, self.boundary_tags,
                    self.target_h * factor, region)


    def to_text(self):
        """ Plain-text mesh: NODES, ELEMENTS and TAG blocks (micrometers). """
        lines = [f'NODES {self.n_nodes}']
        lines += [f'{i} {x * 1e6:.17g} {y * 1e6:.17g}'
                  for i, (x, y) in enumerate(self.nodes)]
        lines.append('')
        lines.append(f'ELEMENTS {self.n_elements}')
        lines += [f'{i} ' + ' '.join(str(n) for n in el)
                  for i, el in enumerate(self.elements)]
        for tag in sorted(self.boundary_tags):
            lines.append('')
            lines.append(f'TAG {tag}')
            lines.append(' '.join(str(n) for n in self.boundary_tags[tag]))
        lines.append('')
        lines.append(f'TARGET_H {self.target_h * 1e6:.17g}')
        return '\n'.join(lines) + '\n'


    @classmethod
    def from_text(cls, text):
        nodes, elements, tags, target_h = [], [], {}, 0.0
        for block in re.split(r'\n\s*\n', text.strip()):
            rows = block.strip().splitlines()
            header = rows[0].split()
            if header[0] == 'NODES':
                nodes = [[float(v) * 1e-6 for v in r.split()[1:]]
                         for r in rows[1:]]
            elif header[0] == 'ELEMENTS':
                elements = [[int(v) for v in r.split()[1:]] for r in rows[1:]]
            elif header[0] == 'TAG':
                body = ' '.join(rows[1:]).split()
                tags[header[1]] = [int(v) for v in body]
            elif header[0] == 'TARGET_H':
                target_h = float(header[1]) * 1e-6
        return cls(nodes, elements, tags, target_h)


@dataclass(frozen=True)
class PeriodicMap:
    """ (minus, plus) node pairs with plus = minus + translation. """
    pairs: np.ndarray
    translation: np.ndarray

    def __len__(self):
        return len(self.pairs)


@dataclass(frozen=True)
class QualityStats:
    min_angle: float
    mean_angle: float
    max_aspect_ratio: float
    max_edge: float
    n_elements: int
    n_nodes: int
    total_area: float

    def as_dict(self):
        return dict(self.__dict__)


##################
# Boundary PSLG #
##################
class _Boundary:
    """ Planar straight-line graph of the region loops. Each loop edge
        keeps a sorted list of split parameters in [0, 1).
    """

    def __init__(self, region, target_h):
        self.loops = [region.outer_loop] + list(region.hole_loops)
        self.splits = []
        for loop in self.loops:
            per_edge = []
            for k in range(len(loop)):
                a, b = loop[k], loop[(k + 1) % len(loop)]
                n = max(1, int(math.ceil(np.linalg.norm(b - a) / target_h
                                         - 1e-9)))
                per_edge.append(set(np.arange(n) / n))
            self.splits.append(per_edge)


    def insert(self, point, tol):
        """ Add a split at point if it lies on a loop edge. """
        p = np.asarray(point, dtype=float)
        for li, loop in enumerate(self.loops):
            for k in range(len(loop)):
                a, b = loop[k], loop[(k + 1) % len(loop)]
                ab = b - a
                length = np.linalg.norm(ab)
                t = float(np.dot(p - a, ab) / np.dot(ab, ab))
                # The end point belongs to the next edge
                if (t * length >= -tol and (1 - t) * length > tol
                        and np.linalg.norm(a + t * ab - p) <= tol):
                    t = max(t, 0.0)
                    if all(abs(t - s) * length > tol
                           for s in self.splits[li][k]):
                        self.splits[li][k].add(t)
                    return True
        return False


    def clear_edges(self, segments, tol):
        """ Drop the interior splits of every loop edge lying on one of
            the (x0, y0, x1, y1) segments.
        """
        for li, loop in enumerate(self.loops):
            for k in range(len(loop)):
                a, b = loop[k], loop[(k + 1) % len(loop)]
                pts = np.array([a, 0.5 * (a + b), b])
                if len(nodes_on_segments(pts, segments, tol)) == 3:
                    self.splits[li][k] = {0.0}


    def pslg(self):
        vertices, segments = [], []
        for li, loop in enumerate(self.loops):
            start = len(vertices)
            for k in range(len(loop)):
                a, b = loop[k], loop[(k + 1) % len(loop)]
                for t in sorted(self.splits[li][k]):
                    vertices.append(a + t * (b - a))
            n = len(vertices) - start
            segments += [(start + i, start + (i + 1) % n) for i in range(n)]
        return np.array(vertices), np.array(segments, dtype=np.int64)


def _check_short_edges(region, target_h):
    for loop in [region.outer_loop] + list(region.hole_loops):
        for k in range(len(loop)):
            a, b = loop[k], loop[(k + 1) % len(loop)]
            if np.linalg.norm(b - a) < 1e-9 * target_h:
                raise UnmeshableRegion('degenerate boundary edge',
                                       tuple(0.5 * (a + b)))


def _run_triangle(region, boundary, target_h, min_angle, fixed):
    """ Triangulate in units of target_h (Triangle's option parser does
        not accept exponent notation).
    """
    vertices, segments = boundary.pslg()
    data = {'vertices': vertices / target_h, 'segments': segments}
    holes = region.hole_points()
    if holes:
        data['holes'] = np.array(holes) / target_h
    opts = f'pq{min_angle:.4f}a{AREA_FACTOR:.4f}Q'
    if fixed:
        opts += 'Y'
    try:
        out = triangle.triangulate(data, opts)
    except Exception as exc:
        raise UnmeshableRegion(f'Triangle failed: {exc}',
                               tuple(region.outer_loop[0]))
    if 'triangles' not in out or len(out['triangles']) == 0:
        raise UnmeshableRegion('Triangle produced no elements',
                               tuple(region.outer_loop[0]))
    return out['vertices'] * target_h, np.asarray(out['triangles'])


def nodes_on_segments(points, segments, tol):
    """ Indices of points within tol of any (x0, y0, x1, y1) segment. """
    hits = np.zeros(len(points), dtype=bool)
    for x0, y0, x1, y1 in segments:
        a = np.array([x0, y0])
        ab = np.array([x1 - x0, y1 - y0])
        L2 = float(np.dot(ab, ab))
        if L2 == 0:
            dist = np.linalg.norm(points - a, axis=1)
        else:
            t = np.clip((points - a) @ ab / L2, 0.0, 1.0)
            dist = np.linalg.norm(points - (a + t[:, None] * ab), axis=1)
        hits |= dist <= tol
    return np.nonzero(hits)[0]


def _sync_pairs(region):
    """ (minus_tag, plus_tag, forward map, inverse map) for each
        periodic pair of the region.
    """
    out = []
    for minus, plus, t in region.periodic_pairs:
        t = np.asarray(t, dtype=float)
        out.append((minus, plus,
                    lambda p, t=t: p + t, lambda p, t=t: p - t))
    return out


def _copy_periodic_boundary(region, boundary, pairs, tol):
    """ Replace the boundary points of every plus boundary by the
        translated (or rotated) points of its minus boundary.

        Region corners on a plus boundary cannot move, so their images
        are added to the minus boundary first.
    """
    for _, plus, _, inv in pairs:
        loops = np.vstack(boundary.loops)
        pinned = loops[nodes_on_segments(loops, region.tag_map[plus], tol)]
        for p in pinned:
            boundary.insert(inv(p), tol)
        boundary.clear_edges(region.tag_map[plus], tol)
    for minus, _, fwd, _ in pairs:
        vertices, _ = boundary.pslg()
        on_minus = vertices[nodes_on_segments(vertices,
                                              region.tag_map[minus], tol)]
        for p in on_minus:
            boundary.insert(fwd(p), tol)


def _unpaired_points(region, corners, pairs, tol):
    unmatched = []
    for minus, plus, fwd, _ in pairs:
        on_minus = corners[nodes_on_segments(corners,
                                              region.tag_map[minus], tol)]
        on_plus = corners[nodes_on_segments(corners,
                                             region.tag_map[plus], tol)]
        if len(on_minus) != len(on_plus):
            unmatched += [tuple(p) for p in on_plus]
            continue
        if not len(on_minus):
            continue
        dist, _ = cKDTree(on_plus).query(np.array([fwd(p) for p in on_minus]))
        unmatched += [tuple(p) for p, d in zip(on_minus, dist) if d > tol]
    return unmatched


def _corner_mesh(region, target_h, min_angle, pairs):
    """ Corner triangulation with matched boundary points on paired
        boundaries.

        A free first pass settles the boundary points of each minus side.
        These are copied onto the plus side and Triangle meshes again
        with the boundary held fixed (switch Y), so the pairing holds by
        construction.
    """
    boundary = _Boundary(region, target_h)
    corners, tris = _run_triangle(region, boundary, target_h, min_angle,
                                  fixed=False)
    if not pairs:
        return corners, tris
    tol = 1e-9 * target_h
    for minus, _, _, _ in pairs:
        for p in corners[nodes_on_segments(corners, region.tag_map[minus],
                                           tol)]:
            boundary.insert(p, tol)
    _copy_periodic_boundary(region, boundary, pairs, tol)
    corners, tris = _run_triangle(region, boundary, target_h, min_angle,
                                  fixed=True)
    unmatched = _unpaired_points(region, corners, pairs, tol)
    if unmatched:
        raise PeriodicPairingError(unmatched)
    return corners, tris


def _quadratic(corners, tris):
    """ Add midside nodes. Returns (nodes, elements, boundary edge list). """
    nodes = [tuple(p) for p in corners]
    edge_mid = {}
    edge_count = {}
    elements = []
    for tri in tris:
        c = [int(v) for v in tri]
        # Triangle emits counterclockwise triangles, but make sure
        a, b, d = corners[c[0]], corners[c[1]], corners[c[2]]
        if (b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0]) < 0:
            c = [c[0], c[2], c[1]]
        mids = []
        for i, j in ((c[0], c[1]), (c[1], c[2]), (c[2], c[0])):
            key = (min(i, j), max(i, j))
            if key not in edge_mid:
                edge_mid[key] = len(nodes)
                nodes.append(tuple(0.5 * (corners[i] + corners[j])))
            edge_count[key] = edge_count.get(key, 0) + 1
            mids.append(edge_mid[key])
        elements.append(c + mids)
    boundary = [(i, j, edge_mid[(i, j)])
                for (i, j), n in edge_count.items() if n == 1]
    return np.array(nodes), np.array(elements, dtype=np.int64), boundary


def _tag_nodes(nodes, boundary_edges, region, tol):
    bnodes = np.array(sorted({n for e in boundary_edges for n in e}),
                      dtype=np.int64)
    tags = {'boundary': bnodes}
    for tag, segs in region.tag_map.items():
        hits = nodes_on_segments(nodes[bnodes], segs, tol)
        tags[tag] = bnodes[hits]
    return tags


def _check_elements(nodes, elements):
    c = nodes[elements[:, :3]]
    e1 = c[:, 1] - c[:, 0]
    e2 = c[:, 2] - c[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    bad = np.nonzero(det <= 0)[0]
    if len(bad):
        raise UnmeshableRegion('degenerate element',
                               tuple(c[bad[0]].mean(axis=0)))


##############
# Operations #
##############
def triangulate(region, target_h, min_angle=25.0):
    """ Conforming quadratic mesh of region.

        Boundary points on each periodic pair of the region are made to
        match under the pair's translation.
    """
    if not target_h > 0:
        raise UnmeshableRegion('target_h must be positive')
    if not 0 < min_angle <= 28:
        raise UnmeshableRegion('min_angle must be in (0, 28] degrees')
    region.validate()
    _check_short_edges(region, target_h)
    print(f"\nmeshmodel: Meshing region (area {region.area() * 1e12:.4g} "
          f"um^2) at h = {target_h * 1e6:.4g} um")
    corners, tris = _corner_mesh(region, target_h, min_angle,
                                 _sync_pairs(region))
    nodes, elements, bedges = _quadratic(corners, tris)
    _check_elements(nodes, elements)
    tags = _tag_nodes(nodes, bedges, region, 1e-9 * target_h)
    mesh = Mesh(nodes, elements, tags, target_h, region)
    print(f"meshmodel: {mesh.n_elements} elements, {mesh.n_nodes} nodes")
    return mesh


def triangulate_rotational(sector, target_h, min_angle=25.0, copies=3,
                           tag_region=None):
    """ Mesh one sector and replicate it by rotation about the origin.

        The sector must carry 'seam_minus' and 'seam_plus' tags with
        seam_plus equal to seam_minus rotated by 2*pi/copies. Shared seam
        nodes are merged, so the result is exactly copies-fold symmetric.
    """
    if not target_h > 0:
        raise UnmeshableRegion('target_h must be positive')
    sector.validate()
    _check_short_edges(sector, target_h)
    theta = 2 * math.pi / copies
    rot = general.rotation_matrix(theta)
    pairs = [('seam_minus', 'seam_plus',
              lambda p: rot @ p, lambda p: rot.T @ p)]
    print(f"\nmeshmodel: Meshing 1/{copies} sector at "
          f"h = {target_h * 1e6:.4g} um")
    corners, tris = _corner_mesh(sector, target_h, min_angle, pairs)

    # Replicate and merge coincident corner nodes
    all_corners = np.vstack([general.rotate_points(corners, k * theta)
                             for k in range(copies)])
    all_tris = np.vstack([tris + k * len(corners) for k in range(copies)])
    tol = 1e-9 * target_h
    parent = np.arange(len(all_corners))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in sorted(cKDTree(all_corners).query_pairs(tol)):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(all_corners))])
    keep, new_index = np.unique(roots, return_inverse=True)
    corners = all_corners[keep]
    tris = new_index[all_tris]

    nodes, elements, bedges = _quadratic(corners, tris)
    _check_elements(nodes, elements)
    region = tag_region if tag_region is not None else sector
    tags = _tag_nodes(nodes, bedges, region, 1e-9 * target_h)
    mesh = Mesh(nodes, elements, tags, target_h, region)
    print(f"meshmodel: {mesh.n_elements} elements, {mesh.n_nodes} nodes")
    return mesh


def resonator_mesh(spec, target_h=None, min_angle=25.0):
    """ Three-fold symmetric mesh of a resonator outline. """
    if target_h is None:
        target_h = spec.side_s / 24
    sector = geometrymodel.resonator_sector(spec)
    outline = geometrymodel.resonator_outline(spec)
    return triangulate_rotational(sector, target_h, min_angle, 3, outline)


def rectangle_mesh(width, height, nx, ny, origin=(0.0, 0.0)):
    """ Structured quadratic mesh of a rectangle, each cell split along
        its rising diagonal. Tags: left, right, bottom, top.
    """
    x = origin[0] + np.linspace(0.0, width, nx + 1)
    y = origin[1] + np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(x, y)
    corners = np.column_stack([X.ravel(), Y.ravel()])

    def idx(i, j):
        return j * (nx + 1) + i

    tris = []
    for j in range(ny):
        for i in range(nx):
            tris.append([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)])
            tris.append([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)])
    nodes, elements, bedges = _quadratic(corners, np.array(tris))
    x0, y0 = origin
    x1, y1 = x0 + width, y0 + height
    outer = [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
    tags = {
        'left': [(x0, y0, x0, y1)], 'right': [(x1, y0, x1, y1)],
        'bottom': [(x0, y0, x1, y0)], 'top': [(x0, y1, x1, y1)],
    }
    region = geometrymodel.PolyRegion(
        outer, [], tags,
        periodic_pairs=[('left', 'right', np.array([width, 0.0])),
                        ('bottom', 'top', np.array([0.0, height]))])
    h = max(width / nx, height / ny)
    return Mesh(nodes, elements, _tag_nodes(nodes, bedges, region, 1e-9 * h),
                h, region)


def periodic_pair(mesh, minus_tag, plus_tag, translation):
    """ Match nodes of plus_tag to nodes of minus_tag shifted by
        translation.
    """
    t = np.asarray(translation, dtype=float)
    tol = 1e-9 * np.linalg.norm(t)
    minus = mesh.tag(minus_tag)
    plus = mesh.tag(plus_tag)
    shifted = mesh.nodes[minus] + t
    unmatched = []
    pairs = []
    used = set()
    tree = cKDTree(mesh.nodes[plus]) if len(plus) else None
    for k, q in enumerate(shifted):
        if tree is None:
            unmatched.append(tuple(mesh.nodes[minus[k]]))
            continue
        dist, j = tree.query(q)
        if dist > tol or j in used:
            unmatched.append(tuple(mesh.nodes[minus[k]]))
            continue
        used.add(j)
        pairs.append((int(minus[k]), int(plus[j])))
    for j in range(len(plus)):
        if j not in used:
            unmatched.append(tuple(mesh.nodes[plus[j]]))
    if unmatched:
        raise PeriodicPairingError(unmatched)
    return PeriodicMap(np.array(pairs, dtype=np.int64).reshape(-1, 2), t)


def region_maps(mesh):
    """ PeriodicMaps for every periodic pair of the mesh's region. """
    return [periodic_pair(mesh, m, p, t)
            for m, p, t in mesh.region.periodic_pairs]


def quality_report(mesh):
    c = mesh.corner_coords()
    edges = np.stack([c[:, 1] - c[:, 0], c[:, 2] - c[:, 1],
                      c[:, 0] - c[:, 2]], axis=1)
    lengths = np.linalg.norm(edges, axis=2)
    angles = []
    for k in range(3):
        u = -edges[:, k - 1]
        v = edges[:, k]
        cosang = np.sum(u * v, axis=1) / (lengths[:, k - 1] * lengths[:, k])
        angles.append(np.degrees(np.arccos(np.clip(cosang, -1, 1))))
    angles = np.stack(angles, axis=1)
    areas = mesh.element_areas()
    inradius = 2 * areas / lengths.sum(axis=1)
    # Equilateral triangle has aspect ratio 1
    aspect = lengths.max(axis=1) / (2 * math.sqrt(3) * inradius)
    return QualityStats(
        min_angle=float(angles.min()),
        mean_angle=float(angles.mean()),
        max_aspect_ratio=float(aspect.max()),
        max_edge=float(lengths.max()),
        n_elements=mesh.n_elements,
        n_nodes=mesh.n_nodes,
        total_area=float(areas.sum()),
    )


def write_mesh(path, mesh):
    with open(path, 'w') as fh:
        fh.write(mesh.to_text())


def read_mesh(path):
    with open(path, 'r') as fh:
        return Mesh.from_text(fh.read())

""" Plane-stress elastodynamics on quadratic triangle meshes.

    Assembles stiffness K and mass M, eliminates Bloch-periodic slave
    degrees of freedom, and solves K u = w^2 M u by shift-invert Krylov
    iteration on a sparse LU factorization of K - sigma^2 M.
"""

###########
# Imports #
###########
# Standard library
import math
from dataclasses import dataclass

# Third party
import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

# Custom modules
from exceptions.solver_exceptions import AssemblyError
from exceptions.solver_exceptions import BlochError
from exceptions.solver_exceptions import ConvergenceError
from exceptions.solver_exceptions import ShiftFactorizationError
from exceptions.solver_exceptions import SingularMaterial
from exceptions.solver_exceptions import TooManyModes


#############
# Constants #
#############
# Degree-4 six-point rule on the reference triangle (weights sum to 1/2)
_A, _WA = 0.445948490915965, 0.223381589678011
_B, _WB = 0.091576213509771, 0.109951743655322
QUAD_POINTS = np.array([
    [_A, _A], [1 - 2 * _A, _A], [_A, 1 - 2 * _A],
    [_B, _B], [1 - 2 * _B, _B], [_B, 1 - 2 * _B],
])
QUAD_WEIGHTS = 0.5 * np.array([_WA, _WA, _WA, _WB, _WB, _WB])

# Problems at or below this many unknowns are solved densely
DENSE_LIMIT = 600
# Replacement for a zero shift so free structures can be factorized
ZERO_SHIFT_HZ = 1e6
# Extra Ritz pairs computed beyond the requested count
SURPLUS = 4
# Columns with ||Ku|| below this fraction of ||K|| ||u|| count as rigid
RIGID_RATIO = 1e-10


#########
# Types #
#########
@dataclass(frozen=True)
class LameConstants:
    lam: float
    mu: float

    @property
    def plane_stress_lambda(self):
        """ Effective lambda of the plane-stress reduction. """
        return 2 * self.lam * self.mu / (self.lam + 2 * self.mu)


    def plane_stress_matrix(self):
        """ 3x3 constitutive matrix for (exx, eyy, 2*exy). """
        ls, mu = self.plane_stress_lambda, self.mu
        return np.array([[ls + 2 * mu, ls, 0.0],
                         [ls, ls + 2 * mu, 0.0],
                         [0.0, 0.0, mu]])


@dataclass(frozen=True)
class OperatorPair:
    """ Stiffness/mass pair.

        K, M: sparse matrices on the reduced unknowns
        dof_map: (N, 2) node -> (ux, uy) row of the full system
        reduced: True once periodic slave unknowns are eliminated
        expansion: sparse T with u_full = T @ u_reduced (None if full)
    """
    K: object
    M: object
    dof_map: np.ndarray
    reduced: bool
    mesh: object
    material: object
    element_stiffness: np.ndarray
    element_dofs: np.ndarray
    expansion: object = None
    wavevector: tuple = (0.0, 0.0)

    @property
    def n_unknowns(self):
        return self.K.shape[0]


    def expand(self, vector):
        """ Full nodal field (N, 2) from a reduced vector. """
        full = vector if self.expansion is None else self.expansion @ vector
        return np.asarray(full).reshape(-1, 2)


@dataclass(frozen=True)
class ModeSolution:
    """ One eigenpair. displacement is the full nodal field (N, 2). """
    omega: float
    frequency: float
    eigenvalue: float
    displacement: np.ndarray
    vector: np.ndarray
    residual: float
    backward_error: float
    wavevector: tuple = (0.0, 0.0)

    def to_text(self):
        lines = [f'# frequency_GHz {self.frequency * 1e-9:.12f}',
                 f'# residual {self.residual:.6e}',
                 f'# backward_error {self.backward_error:.6e}',
                 f'# wavevector_rad_per_m {self.wavevector[0]:.12e} '
                 f'{self.wavevector[1]:.12e}',
                 '# node re_ux im_ux re_uy im_uy']
        for i, (ux, uy) in enumerate(self.displacement):
            lines.append(f'{i} {ux.real:.12e} {ux.imag:.12e} '
                         f'{uy.real:.12e} {uy.imag:.12e}')
        return '\n'.join(lines) + '\n'


    @classmethod
    def from_text(cls, text):
        header, rows = {}, []
        for line in text.strip().splitlines():
            if line.startswith('#'):
                parts = line[1:].split()
                header[parts[0]] = parts[1:]
            else:
                rows.append([float(v) for v in line.split()[1:]])
        data = np.array(rows).reshape(-1, 4)
        disp = np.column_stack([data[:, 0] + 1j * data[:, 1],
                                data[:, 2] + 1j * data[:, 3]])
        f = float(header['frequency_GHz'][0]) * 1e9
        k = tuple(float(v) for v in header.get('wavevector_rad_per_m',
                                               ['0', '0']))
        omega = 2 * math.pi * f
        return cls(omega, f, omega ** 2, disp, disp.ravel(),
                   float(header['residual'][0]),
                   float(header.get('backward_error', ['nan'])[0]), k)


############
# Elements #
############
def _shape_functions(xi, eta):
    """ Quadratic shape functions and reference derivatives at a point.
        Node order [c0, c1, c2, m01, m12, m20].
    """
    L = np.array([1 - xi - eta, xi, eta])
    dL = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    N = np.array([L[0] * (2 * L[0] - 1), L[1] * (2 * L[1] - 1),
                  L[2] * (2 * L[2] - 1), 4 * L[0] * L[1],
                  4 * L[1] * L[2], 4 * L[2] * L[0]])
    dN = np.zeros((6, 2))
    for i in range(3):
        dN[i] = (4 * L[i] - 1) * dL[i]
    for k, (a, b) in enumerate(((0, 1), (1, 2), (2, 0))):
        dN[3 + k] = 4 * (L[a] * dL[b] + L[b] * dL[a])
    return N, dN


_REF = [_shape_functions(x, y) for x, y in QUAD_POINTS]
REF_N = np.array([r[0] for r in _REF])        # (Q, 6)
REF_DN = np.array([r[1] for r in _REF])       # (Q, 6, 2)


def _element_geometry(mesh):
    """ Physical shape-function gradients (E, Q, 6, 2) and det J (E, Q). """
    X = mesh.nodes[mesh.elements]                       # (E, 6, 2)
    J = np.einsum('qia,eib->eqab', REF_DN, X)           # (E, Q, 2, 2)
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    bad = np.nonzero((det <= 0).any(axis=1))[0]
    if len(bad):
        raise AssemblyError(int(bad[0]))
    inv = np.empty_like(J)
    inv[..., 0, 0] = J[..., 1, 1] / det
    inv[..., 1, 1] = J[..., 0, 0] / det
    inv[..., 0, 1] = -J[..., 0, 1] / det
    inv[..., 1, 0] = -J[..., 1, 0] / det
    grad = np.einsum('qia,eqba->eqib', REF_DN, inv)
    return grad, det


def _strain_matrices(grad):
    """ B matrices (E, Q, 3, 12) for unknowns [u0x, u0y, u1x, ...]. """
    E, Q = grad.shape[:2]
    B = np.zeros((E, Q, 3, 12))
    B[..., 0, 0::2] = grad[..., 0]
    B[..., 1, 1::2] = grad[..., 1]
    B[..., 2, 0::2] = grad[..., 1]
    B[..., 2, 1::2] = grad[..., 0]
    return B


def element_dofs(mesh):
    return np.stack([2 * mesh.elements, 2 * mesh.elements + 1],
                    axis=2).reshape(-1, 12)


def _scatter(blocks, dofs, n):
    rows = np.repeat(dofs, 12, axis=1).ravel()
    cols = np.tile(dofs, (1, 12)).ravel()
    return sp.coo_matrix((blocks.ravel(), (rows, cols)),
                         shape=(n, n)).tocsr()


##############
# Operations #
##############
def lame_constants(material):
    """ lambda = nu E / ((1 + nu)(1 - 2 nu)), mu = E / (2 (1 + nu)). """
    E, nu = material.youngs_modulus, material.poisson_ratio
    if not -1.0 < nu < 0.5:
        raise SingularMaterial(nu)
    lam = nu * E / ((1 + nu) * (1 - 2 * nu))
    mu = E / (2 * (1 + nu))
    return LameConstants(lam, mu)


def assemble(mesh, material):
    """ Global plane-stress stiffness and consistent mass matrices. """
    material.validate()
    lame = lame_constants(material)
    D = lame.plane_stress_matrix()
    t, rho = material.thickness, material.density

    grad, det = _element_geometry(mesh)
    B = _strain_matrices(grad)
    wdet = det * QUAD_WEIGHTS[None, :]
    Ke = t * np.einsum('eq,eqia,ij,eqjb->eab', wdet, B, D, B)

    Nmat = np.zeros((len(QUAD_WEIGHTS), 2, 12))
    Nmat[:, 0, 0::2] = REF_N
    Nmat[:, 1, 1::2] = REF_N
    Me = rho * t * np.einsum('eq,qia,qib->eab', wdet, Nmat, Nmat)

    dofs = element_dofs(mesh)
    n = mesh.n_dof
    K = _scatter(Ke, dofs, n)
    M = _scatter(Me, dofs, n)
    # Exact symmetry
    K = (0.5 * (K + K.T)).tocsr()
    M = (0.5 * (M + M.T)).tocsr()
    print(f"elasticitymodel: Assembled {n} unknowns on "
          f"{mesh.n_elements} elements")
    dof_map = np.arange(n).reshape(-1, 2)
    return OperatorPair(K, M, dof_map, False, mesh, material, Ke, dofs)


def _as_wavevector(k):
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if k.size == 1:
        return np.array([k[0], 0.0])
    return k[:2]


def apply_bloch(ops, maps, k):
    """ Eliminate plus-side unknowns with u_plus = exp(i k.t) u_minus.

        maps: one PeriodicMap or a list of them. Slave chains (corner
        nodes shared by two maps) are resolved to a single master.
    """
    if ops.reduced:
        raise BlochError('operators are already reduced')
    if not isinstance(maps, (list, tuple)):
        maps = [maps]
    if not maps:
        raise BlochError('no periodic map supplied')
    kvec = _as_wavevector(k)
    trans = np.array([m.translation for m in maps])

    # k must lie in the span of the map translations
    if np.linalg.norm(kvec) > 0:
        coef, *_ = np.linalg.lstsq(trans.T, kvec, rcond=None)
        proj = trans.T @ coef
        if np.linalg.norm(kvec - proj) > 1e-9 * np.linalg.norm(kvec):
            raise BlochError('wavevector has a component along an axis '
                             'without a periodic map')
    for m in maps:
        if abs(kvec @ m.translation) > math.pi * (1 + 1e-9):
            raise BlochError('|k.R| exceeds pi (outside the first '
                             'Brillouin zone)')

    slave = {}
    for m in maps:
        phase = np.exp(1j * (kvec @ m.translation))
        for minus, plus in m.pairs:
            if plus == minus:
                raise BlochError(f'node {plus} is paired with itself')
            if plus not in slave:
                slave[int(plus)] = (int(minus), phase)

    def resolve(node):
        phase = 1.0 + 0j
        seen = set()
        while node in slave:
            if node in seen:
                raise BlochError('cyclic periodic pairing')
            seen.add(node)
            node, ph = slave[node]
            phase *= ph
        return node, phase

    n_nodes = ops.mesh.n_nodes
    masters = [i for i in range(n_nodes) if i not in slave]
    column = {node: j for j, node in enumerate(masters)}
    rows, cols, vals = [], [], []
    for i in range(n_nodes):
        master, phase = resolve(i)
        j = column[master]
        rows += [2 * i, 2 * i + 1]
        cols += [2 * j, 2 * j + 1]
        vals += [phase, phase]
    vals = np.array(vals)
    if np.all(vals.imag == 0):
        vals = vals.real
    T = sp.csr_matrix((vals, (rows, cols)),
                      shape=(2 * n_nodes, 2 * len(masters)))
    TH = T.conj().T.tocsr()
    K = (TH @ ops.K @ T).tocsr()
    M = (TH @ ops.M @ T).tocsr()
    K = (0.5 * (K + K.conj().T)).tocsr()
    M = (0.5 * (M + M.conj().T)).tocsr()
    return OperatorPair(K, M, ops.dof_map, True, ops.mesh, ops.material,
                        ops.element_stiffness, ops.element_dofs, T,
                        (float(kvec[0]), float(kvec[1])))


def _residuals(K, M, lam, U):
    """ ||Ku - lam Mu|| / ||Ku|| and the normwise backward error per
        column.

        Near-rigid columns (Ku at roundoff level) report the backward
        error as their residual.
    """
    KU = K @ U
    MU = M @ U
    R = KU - MU * lam[None, :]
    normK = spla.norm(K, 1)
    normM = spla.norm(M, 1)
    rnorm = np.linalg.norm(R, axis=0)
    unorm = np.linalg.norm(U, axis=0)
    kunorm = np.linalg.norm(KU, axis=0)
    backward = rnorm / ((normK + np.abs(lam) * normM) * unorm)
    rigid = kunorm <= RIGID_RATIO * normK * unorm
    with np.errstate(divide='ignore', invalid='ignore'):
        residual = np.where(rigid, backward, rnorm / kunorm)
    return residual, backward


def _dense_pairs(K, M):
    Kd = K.toarray() if sp.issparse(K) else np.asarray(K)
    Md = M.toarray() if sp.issparse(M) else np.asarray(M)
    return sla.eigh(Kd, Md)


def _sparse_pairs(K, M, sigma2, count):
    """ Eigenpairs nearest sigma2 from ARPACK in shift-invert mode. """
    n = K.shape[0]
    dtype = np.result_type(K.dtype, M.dtype)
    rng = np.random.default_rng(0)
    v0 = rng.standard_normal(n)
    if np.issubdtype(dtype, np.complexfloating):
        v0 = v0 + 1j * rng.standard_normal(n)
    try:
        lam, vecs = spla.eigsh(K.tocsc(), k=count, M=M.tocsc(),
                               sigma=sigma2, which='LM',
                               v0=v0.astype(dtype))
    except spla.ArpackNoConvergence as exc:
        if exc.eigenvectors is None or exc.eigenvectors.shape[1] == 0:
            raise ConvergenceError([float('inf')], 0.0)
        lam, vecs = np.real(exc.eigenvalues), exc.eigenvectors
    except spla.ArpackError:
        raise ConvergenceError([float('inf')], 0.0)
    except RuntimeError:
        # splu of K - sigma2 M is exactly singular
        raise ShiftFactorizationError(math.sqrt(abs(sigma2)) / (2 * math.pi))
    return np.real(lam), vecs


def eigs(ops, shift_sigma, count_m, tol=1e-9, method='auto'):
    """ The count_m eigenpairs nearest shift_sigma (Hz), measured in
        w^2, sorted ascending by frequency and mass-normalized.

        method: 'auto', 'sparse' or 'dense'.
    """
    if count_m < 1:
        raise TooManyModes(count_m, ops.n_unknowns)
    if tol < 1e-12:
        raise ConvergenceError([], tol)
    n = ops.n_unknowns
    if count_m > n:
        raise TooManyModes(count_m, n)
    K, M = ops.K, ops.M
    sigma2 = (2 * math.pi * shift_sigma) ** 2
    if sigma2 == 0:
        sigma2 = -(2 * math.pi * ZERO_SHIFT_HZ) ** 2

    n_solve = min(count_m + SURPLUS, n)
    use_dense = method == 'dense' or (
        method == 'auto' and (n <= DENSE_LIMIT or n_solve >= n - 1))
    if use_dense:
        lam, U = _dense_pairs(K, M)
    else:
        lam, U = _sparse_pairs(K, M, sigma2, min(n_solve, n - 2))
    if len(lam) < count_m:
        raise TooManyModes(count_m, len(lam))

    order = np.argsort(np.abs(lam - sigma2), kind='stable')[:count_m]
    lam, U = lam[order], U[:, order]
    # Mass normalization
    norms = np.sqrt(np.real(np.einsum('ij,ij->j', U.conj(), M @ U)))
    U = U / norms[None, :]
    residual, backward = _residuals(K, M, lam, U)
    if np.any(residual > tol):
        raise ConvergenceError(residual, tol)

    modes = []
    for j in np.argsort(lam, kind='stable'):
        omega = math.sqrt(max(float(lam[j]), 0.0))
        vec = U[:, j]
        modes.append(ModeSolution(
            omega=omega,
            frequency=omega / (2 * math.pi),
            eigenvalue=float(lam[j]),
            displacement=ops.expand(vec).astype(complex),
            vector=vec,
            residual=float(residual[j]),
            backward_error=float(backward[j]),
            wavevector=ops.wavevector,
        ))
    return modes


def eigs_window(ops, f_lo, f_hi, tol=1e-9, start=8):
    """ Every mode with f_lo <= f <= f_hi.

        The mode count grows until the farthest returned eigenvalue lies
        outside the window in w^2, so nothing inside can be missed.
    """
    lam_lo = (2 * math.pi * f_lo) ** 2
    lam_hi = (2 * math.pi * f_hi) ** 2
    center = 0.5 * (lam_lo + lam_hi)
    f_center = math.sqrt(center) / (2 * math.pi)
    need = max(center - lam_lo, lam_hi - center)
    n = ops.n_unknowns
    count = min(start, n)
    while True:
        modes = eigs(ops, f_center, count, tol)
        radius = max(abs(m.eigenvalue - center) for m in modes)
        if radius > need or count >= n:
            break
        count = min(2 * count, n)
        print(f"elasticitymodel: Window not covered; requesting "
              f"{count} modes")
    return [m for m in modes if f_lo <= m.frequency <= f_hi]


def strain_energy_field(ops, mode):
    """ Per-element elastic energy 1/2 u_e^H K_e u_e of a mode. Sums to
        1/2 w^2 for a mass-normalized mode.
    """
    u = mode.displacement.ravel()
    ue = u[ops.element_dofs]                            # (E, 12)
    energy = 0.5 * np.real(np.einsum('ea,eab,eb->e', ue.conj(),
                                     ops.element_stiffness, ue))
    return energy


def write_mode(path, mode):
    with open(path, 'w') as fh:
        fh.write(mode.to_text())


def read_mode(path):
    with open(path, 'r') as fh:
        return ModeSolution.from_text(fh.read())
